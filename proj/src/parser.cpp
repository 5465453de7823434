#include "ectsim/parser.hpp"

#include <cctype>
#include <optional>
#include <set>
#include <sstream>

namespace ectsim {

const char* var_kind_name(VarKind k) {
    switch (k) {
        case VarKind::Int: return "int";
        case VarKind::Chan: return "chan";
        case VarKind::Mutex: return "mutex";
        case VarKind::Wg: return "wg";
        case VarKind::Cond: return "cond";
    }
    return "?";
}

namespace {

enum class Tok { Ident, Keyword, Int, Punct, Newline, Eof };

struct Token {
    Tok kind;
    std::string text;
    std::int64_t value = 0;
    SourceLoc loc;
};

const std::set<std::string> kKeywords = {
    "func", "var", "make", "mutex", "wg", "cond", "go", "send", "recv", "close",
    "lock", "unlock", "add", "done", "wait", "cwait", "signal", "broadcast",
    "select", "case", "default", "if", "else", "for", "in", "loop", "yield",
    "return", "skip", "chan", "int",
};

struct Lexer {
    const std::string& src;
    const std::string& file;
    size_t pos = 0;
    int line = 1, col = 1;
    std::vector<Diagnostic>& diags;

    Lexer(const std::string& s, const std::string& f, std::vector<Diagnostic>& d)
        : src(s), file(f), diags(d) {}

    SourceLoc here() const { return {file, line, col}; }

    char peek() const { return pos < src.size() ? src[pos] : '\0'; }
    char peek2() const { return pos + 1 < src.size() ? src[pos + 1] : '\0'; }

    void advance() {
        if (pos < src.size()) {
            if (src[pos] == '\n') {
                line++;
                col = 1;
            } else {
                col++;
            }
            pos++;
        }
    }

    std::vector<Token> lex() {
        std::vector<Token> out;
        bool line_has_token = false;
        while (pos < src.size()) {
            char c = peek();
            if (c == '\n') {
                if (line_has_token) out.push_back({Tok::Newline, "\n", 0, here()});
                line_has_token = false;
                advance();
                continue;
            }
            if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
                continue;
            }
            if (c == '/' && peek2() == '/') {
                while (pos < src.size() && peek() != '\n') advance();
                continue;
            }
            SourceLoc loc = here();
            if (std::isdigit(static_cast<unsigned char>(c))) {
                std::string num;
                while (std::isdigit(static_cast<unsigned char>(peek()))) {
                    num += peek();
                    advance();
                }
                Token t{Tok::Int, num, 0, loc};
                try {
                    t.value = std::stoll(num);
                } catch (const std::exception&) {
                    diags.push_back({loc, "integer literal out of range: " + num});
                }
                out.push_back(t);
                line_has_token = true;
                continue;
            }
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                std::string id;
                while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_') {
                    id += peek();
                    advance();
                }
                out.push_back({kKeywords.count(id) ? Tok::Keyword : Tok::Ident, id, 0, loc});
                line_has_token = true;
                continue;
            }
            // multi-char operators first
            static const char* two[] = {"==", "!=", "<=", ">=", "&&", "||", ".."};
            std::string pair{c, peek2()};
            bool matched = false;
            for (const char* op : two) {
                if (pair == op) {
                    advance();
                    advance();
                    out.push_back({Tok::Punct, pair, 0, loc});
                    matched = true;
                    break;
                }
            }
            if (matched) {
                line_has_token = true;
                continue;
            }
            if (std::string("(){},=+-*/%<>!:").find(c) != std::string::npos) {
                advance();
                out.push_back({Tok::Punct, std::string(1, c), 0, loc});
                line_has_token = true;
                continue;
            }
            diags.push_back({loc, std::string("unexpected character '") + c + "'"});
            advance();
        }
        if (line_has_token) out.push_back({Tok::Newline, "\n", 0, here()});
        out.push_back({Tok::Eof, "", 0, here()});
        return out;
    }
};

struct Parser {
    std::vector<Token> toks;
    size_t pos = 0;
    std::vector<Diagnostic>& diags;

    explicit Parser(std::vector<Token> t, std::vector<Diagnostic>& d)
        : toks(std::move(t)), diags(d) {}

    const Token& cur() const { return toks[pos]; }
    const Token& next() { return toks[pos < toks.size() - 1 ? pos++ : pos]; }

    bool at(Tok k, const std::string& text = "") const {
        return cur().kind == k && (text.empty() || cur().text == text);
    }
    bool at_punct(const std::string& p) const { return at(Tok::Punct, p); }
    bool at_kw(const std::string& k) const { return at(Tok::Keyword, k); }

    bool accept(Tok k, const std::string& text = "") {
        if (at(k, text)) {
            pos++;
            return true;
        }
        return false;
    }

    void skip_newlines() {
        while (cur().kind == Tok::Newline) pos++;
    }

    struct SyntaxError {};

    [[noreturn]] void fail(const std::string& msg) {
        diags.push_back({cur().loc, msg});
        throw SyntaxError{};
    }

    void expect_punct(const std::string& p) {
        if (!accept(Tok::Punct, p)) fail("expected '" + p + "', got '" + cur().text + "'");
    }

    std::string expect_ident() {
        if (cur().kind != Tok::Ident) fail("expected identifier, got '" + cur().text + "'");
        return next().text;
    }

    // Resynchronize after a syntax error: skip to end of line or block close.
    void recover() {
        int depth = 0;
        while (cur().kind != Tok::Eof) {
            if (at_punct("{")) depth++;
            if (at_punct("}")) {
                if (depth == 0) return;
                depth--;
            }
            if (cur().kind == Tok::Newline && depth == 0) {
                pos++;
                return;
            }
            pos++;
        }
    }

    Program parse_program(const std::string& file) {
        Program prog;
        prog.file = file;
        skip_newlines();
        while (cur().kind != Tok::Eof) {
            if (!at_kw("func")) {
                diags.push_back({cur().loc, "expected 'func', got '" + cur().text + "'"});
                recover();
                skip_newlines();
                continue;
            }
            try {
                FuncDecl fn = parse_func();
                bool dup = false;
                for (const auto& f : prog.functions) dup = dup || f.name == fn.name;
                if (dup) {
                    diags.push_back({fn.loc, "duplicate function name '" + fn.name + "'"});
                } else {
                    prog.functions.push_back(std::move(fn));
                }
            } catch (const SyntaxError&) {
                recover();
            }
            skip_newlines();
        }
        for (const auto& f : prog.functions) prog.by_name[f.name] = &f;
        return prog;
    }

    FuncDecl parse_func() {
        FuncDecl fn;
        fn.loc = cur().loc;
        accept(Tok::Keyword, "func");
        fn.name = expect_ident();
        expect_punct("(");
        if (!at_punct(")")) {
            do {
                Param p;
                p.name = expect_ident();
                expect_punct(":");
                if (at_kw("int")) p.kind = VarKind::Int;
                else if (at_kw("chan")) p.kind = VarKind::Chan;
                else if (at_kw("mutex")) p.kind = VarKind::Mutex;
                else if (at_kw("wg")) p.kind = VarKind::Wg;
                else if (at_kw("cond")) p.kind = VarKind::Cond;
                else fail("expected parameter kind (int|chan|mutex|wg|cond)");
                pos++;
                fn.params.push_back(std::move(p));
            } while (accept(Tok::Punct, ","));
        }
        expect_punct(")");
        fn.body = parse_block();
        return fn;
    }

    std::vector<StmtPtr> parse_block() {
        skip_newlines();
        expect_punct("{");
        std::vector<StmtPtr> stmts;
        skip_newlines();
        while (!at_punct("}")) {
            if (cur().kind == Tok::Eof) fail("unterminated block, expected '}'");
            try {
                stmts.push_back(parse_stmt());
            } catch (const SyntaxError&) {
                recover();
            }
            skip_newlines();
        }
        expect_punct("}");
        return stmts;
    }

    void end_stmt() {
        if (cur().kind == Tok::Newline) {
            pos++;
            return;
        }
        if (at_punct("}") || cur().kind == Tok::Eof) return;
        fail("expected end of statement, got '" + cur().text + "'");
    }

    StmtPtr mk(StmtKind k, SourceLoc loc) {
        auto s = std::make_unique<Stmt>();
        s->kind = k;
        s->loc = loc;
        return s;
    }

    StmtPtr parse_stmt() {
        SourceLoc loc = cur().loc;
        if (at_kw("var")) {
            pos++;
            return parse_assign_tail(loc);
        }
        if (cur().kind == Tok::Ident) {
            return parse_assign_tail(loc);
        }
        if (at_kw("go")) {
            pos++;
            auto s = mk(StmtKind::Go, loc);
            s->callee = expect_ident();
            expect_punct("(");
            if (!at_punct(")")) {
                do {
                    s->args.push_back(parse_expr());
                } while (accept(Tok::Punct, ","));
            }
            expect_punct(")");
            end_stmt();
            return s;
        }
        if (at_kw("send")) {
            pos++;
            auto s = mk(StmtKind::Send, loc);
            s->res = expect_ident();
            s->expr = parse_expr();
            end_stmt();
            return s;
        }
        if (at_kw("recv")) {
            pos++;
            auto s = mk(StmtKind::Recv, loc);
            s->res = expect_ident();
            end_stmt();
            return s;
        }
        auto unary_res = [&](const char* kw, StmtKind k) -> StmtPtr {
            pos++;
            auto s = mk(k, loc);
            (void)kw;
            s->res = expect_ident();
            end_stmt();
            return s;
        };
        if (at_kw("close")) return unary_res("close", StmtKind::Close);
        if (at_kw("lock")) return unary_res("lock", StmtKind::Lock);
        if (at_kw("unlock")) return unary_res("unlock", StmtKind::Unlock);
        if (at_kw("done")) return unary_res("done", StmtKind::WgDone);
        if (at_kw("wait")) return unary_res("wait", StmtKind::WgWait);
        if (at_kw("cwait")) return unary_res("cwait", StmtKind::CvWait);
        if (at_kw("signal")) return unary_res("signal", StmtKind::CvSignal);
        if (at_kw("broadcast")) return unary_res("broadcast", StmtKind::CvBroadcast);
        if (at_kw("add")) {
            pos++;
            auto s = mk(StmtKind::WgAdd, loc);
            s->res = expect_ident();
            s->expr = parse_expr();
            end_stmt();
            return s;
        }
        if (at_kw("select")) {
            pos++;
            auto s = mk(StmtKind::Select, loc);
            skip_newlines();
            expect_punct("{");
            skip_newlines();
            while (at_kw("case")) {
                SelectCase c;
                c.loc = cur().loc;
                pos++;
                if (at_kw("send")) {
                    pos++;
                    c.is_send = true;
                    c.chan = expect_ident();
                    c.send_value = parse_expr();
                } else if (at_kw("recv")) {
                    pos++;
                    c.chan = expect_ident();
                } else if (cur().kind == Tok::Ident) {
                    c.recv_target = expect_ident();
                    expect_punct("=");
                    if (!accept(Tok::Keyword, "recv")) fail("expected 'recv'");
                    c.chan = expect_ident();
                } else {
                    fail("expected select case operation");
                }
                c.body = parse_block();
                s->cases.push_back(std::move(c));
                skip_newlines();
            }
            if (at_kw("default")) {
                pos++;
                s->has_default = true;
                s->default_body = parse_block();
                skip_newlines();
            }
            expect_punct("}");
            if (s->cases.empty() && !s->has_default)
                diags.push_back({loc, "select must have at least one case or a default"});
            end_stmt();
            return s;
        }
        if (at_kw("if")) {
            pos++;
            auto s = mk(StmtKind::If, loc);
            s->expr = parse_expr();
            s->body = parse_block();
            if (at_kw("else")) {
                pos++;
                s->else_body = parse_block();
            }
            end_stmt();
            return s;
        }
        if (at_kw("for")) {
            pos++;
            auto s = mk(StmtKind::ForRange, loc);
            s->aux_name = expect_ident();
            if (!accept(Tok::Keyword, "in")) fail("expected 'in'");
            s->expr = parse_expr();
            expect_punct("..");
            s->expr2 = parse_expr();
            s->body = parse_block();
            end_stmt();
            return s;
        }
        if (at_kw("loop")) {
            pos++;
            auto s = mk(StmtKind::Loop, loc);
            s->body = parse_block();
            end_stmt();
            return s;
        }
        if (at_kw("yield")) {
            pos++;
            end_stmt();
            return mk(StmtKind::Yield, loc);
        }
        if (at_kw("return")) {
            pos++;
            end_stmt();
            return mk(StmtKind::Return, loc);
        }
        if (at_kw("skip")) {
            pos++;
            end_stmt();
            return mk(StmtKind::Skip, loc);
        }
        fail("expected statement, got '" + cur().text + "'");
    }

    // IDENT already pending (or after 'var'): assignment forms.
    StmtPtr parse_assign_tail(SourceLoc loc) {
        std::string name = expect_ident();
        expect_punct("=");
        if (at_kw("make")) {
            pos++;
            expect_punct("(");
            if (!accept(Tok::Keyword, "chan")) fail("expected 'chan'");
            auto s = mk(StmtKind::MakeChan, loc);
            s->target = name;
            if (accept(Tok::Punct, ",")) s->expr = parse_expr();
            expect_punct(")");
            end_stmt();
            return s;
        }
        if (at_kw("mutex")) {
            pos++;
            expect_punct("(");
            expect_punct(")");
            auto s = mk(StmtKind::MakeMutex, loc);
            s->target = name;
            end_stmt();
            return s;
        }
        if (at_kw("wg")) {
            pos++;
            expect_punct("(");
            expect_punct(")");
            auto s = mk(StmtKind::MakeWg, loc);
            s->target = name;
            end_stmt();
            return s;
        }
        if (at_kw("cond")) {
            pos++;
            expect_punct("(");
            auto s = mk(StmtKind::MakeCond, loc);
            s->target = name;
            s->aux_name = expect_ident();
            expect_punct(")");
            end_stmt();
            return s;
        }
        if (at_kw("recv")) {
            pos++;
            auto s = mk(StmtKind::Recv, loc);
            s->target = name;
            s->res = expect_ident();
            end_stmt();
            return s;
        }
        auto s = mk(StmtKind::Assign, loc);
        s->target = name;
        s->expr = parse_expr();
        end_stmt();
        return s;
    }

    // Precedence climbing: || < && < comparison < additive < multiplicative < unary.
    ExprPtr parse_expr() { return parse_or(); }

    ExprPtr mk_bin(std::string op, SourceLoc loc, ExprPtr l, ExprPtr r) {
        auto e = std::make_unique<Expr>();
        e->kind = ExprKind::Binary;
        e->loc = loc;
        e->op = std::move(op);
        e->lhs = std::move(l);
        e->rhs = std::move(r);
        return e;
    }

    ExprPtr parse_or() {
        auto l = parse_and();
        while (at_punct("||")) {
            SourceLoc loc = next().loc;
            l = mk_bin("||", loc, std::move(l), parse_and());
        }
        return l;
    }
    ExprPtr parse_and() {
        auto l = parse_cmp();
        while (at_punct("&&")) {
            SourceLoc loc = next().loc;
            l = mk_bin("&&", loc, std::move(l), parse_cmp());
        }
        return l;
    }
    ExprPtr parse_cmp() {
        auto l = parse_add();
        static const char* ops[] = {"==", "!=", "<=", ">=", "<", ">"};
        for (;;) {
            bool matched = false;
            for (const char* op : ops) {
                if (at_punct(op)) {
                    SourceLoc loc = next().loc;
                    l = mk_bin(op, loc, std::move(l), parse_add());
                    matched = true;
                    break;
                }
            }
            if (!matched) return l;
        }
    }
    ExprPtr parse_add() {
        auto l = parse_mul();
        while (at_punct("+") || at_punct("-")) {
            std::string op = cur().text;
            SourceLoc loc = next().loc;
            l = mk_bin(op, loc, std::move(l), parse_mul());
        }
        return l;
    }
    ExprPtr parse_mul() {
        auto l = parse_unary();
        while (at_punct("*") || at_punct("/") || at_punct("%")) {
            std::string op = cur().text;
            SourceLoc loc = next().loc;
            l = mk_bin(op, loc, std::move(l), parse_unary());
        }
        return l;
    }
    ExprPtr parse_unary() {
        if (at_punct("!") || at_punct("-")) {
            std::string op = cur().text;
            SourceLoc loc = next().loc;
            auto e = std::make_unique<Expr>();
            e->kind = ExprKind::Unary;
            e->loc = loc;
            e->op = op;
            e->lhs = parse_unary();
            return e;
        }
        return parse_primary();
    }
    ExprPtr parse_primary() {
        SourceLoc loc = cur().loc;
        if (cur().kind == Tok::Int) {
            auto e = std::make_unique<Expr>();
            e->kind = ExprKind::IntLit;
            e->loc = loc;
            e->value = next().value;
            return e;
        }
        if (cur().kind == Tok::Ident) {
            auto e = std::make_unique<Expr>();
            e->kind = ExprKind::Var;
            e->loc = loc;
            e->name = next().text;
            return e;
        }
        if (accept(Tok::Punct, "(")) {
            auto e = parse_expr();
            expect_punct(")");
            return e;
        }
        fail("expected expression, got '" + cur().text + "'");
    }
};

}  // namespace

ParseResult parse(const std::string& text, const std::string& file_name) {
    ParseResult res;
    Lexer lexer(text, file_name, res.diagnostics);
    auto toks = lexer.lex();
    Parser p(std::move(toks), res.diagnostics);
    res.program = p.parse_program(file_name);
    return res;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace {

struct Checker {
    const Program& prog;
    std::vector<Diagnostic>& diags;
    const FuncDecl* fn = nullptr;
    std::map<std::string, VarKind> kinds;  // per-function inferred kinds
    std::set<std::string> assigned;

    void err(const SourceLoc& loc, const std::string& m) { diags.push_back({loc, m}); }

    void set_kind(const std::string& name, VarKind k, const SourceLoc& loc) {
        auto it = kinds.find(name);
        if (it == kinds.end()) {
            kinds[name] = k;
        } else if (it->second != k) {
            err(loc, "variable " + name + " used as " + var_kind_name(k) + " but previously " +
                         var_kind_name(it->second));
        }
    }

    void require_kind(const std::string& name, VarKind k, const SourceLoc& loc) {
        if (!assigned.count(name)) {
            err(loc, "variable " + name + " used before assignment");
            assigned.insert(name);  // avoid cascades
        }
        set_kind(name, k, loc);
    }

    void check_expr(const Expr& e) {
        switch (e.kind) {
            case ExprKind::IntLit:
                break;
            case ExprKind::Var:
                require_kind(e.name, VarKind::Int, e.loc);
                break;
            case ExprKind::Unary:
                check_expr(*e.lhs);
                break;
            case ExprKind::Binary:
                check_expr(*e.lhs);
                check_expr(*e.rhs);
                if ((e.op == "/" || e.op == "%") && e.rhs->kind == ExprKind::IntLit &&
                    e.rhs->value == 0) {
                    err(e.rhs->loc, "division by literal zero");
                }
                break;
        }
    }

    void check_call(const Stmt& s) {
        const FuncDecl* callee = prog.find(s.callee);
        if (!callee) {
            err(s.loc, "call to undefined function '" + s.callee + "'");
            return;
        }
        if (callee->params.size() != s.args.size()) {
            err(s.loc, "call to " + s.callee + " with " + std::to_string(s.args.size()) +
                           " arguments, expected " + std::to_string(callee->params.size()));
            return;
        }
        for (size_t i = 0; i < s.args.size(); i++) {
            const Expr& a = *s.args[i];
            VarKind want = callee->params[i].kind;
            if (want == VarKind::Int) {
                check_expr(a);
            } else if (a.kind == ExprKind::Var) {
                require_kind(a.name, want, a.loc);
            } else {
                err(a.loc, "argument " + std::to_string(i) + " of " + s.callee + " must be a " +
                               var_kind_name(want) + " variable");
            }
        }
    }

    void check_block(const std::vector<StmtPtr>& body) {
        for (const auto& sp : body) check_stmt(*sp);
    }

    void check_stmt(const Stmt& s) {
        switch (s.kind) {
            case StmtKind::Assign:
                // rebinding a resource handle (`ch = ch1`) aliases the object
                if (s.expr->kind == ExprKind::Var && kinds.count(s.expr->name) &&
                    kinds[s.expr->name] != VarKind::Int) {
                    require_kind(s.expr->name, kinds[s.expr->name], s.expr->loc);
                    set_kind(s.target, kinds[s.expr->name], s.loc);
                } else {
                    check_expr(*s.expr);
                    set_kind(s.target, VarKind::Int, s.loc);
                }
                assigned.insert(s.target);
                break;
            case StmtKind::MakeChan:
                if (s.expr) check_expr(*s.expr);
                set_kind(s.target, VarKind::Chan, s.loc);
                assigned.insert(s.target);
                break;
            case StmtKind::MakeMutex:
                set_kind(s.target, VarKind::Mutex, s.loc);
                assigned.insert(s.target);
                break;
            case StmtKind::MakeWg:
                set_kind(s.target, VarKind::Wg, s.loc);
                assigned.insert(s.target);
                break;
            case StmtKind::MakeCond:
                require_kind(s.aux_name, VarKind::Mutex, s.loc);
                set_kind(s.target, VarKind::Cond, s.loc);
                assigned.insert(s.target);
                break;
            case StmtKind::Go:
                check_call(s);
                break;
            case StmtKind::Send:
                require_kind(s.res, VarKind::Chan, s.loc);
                check_expr(*s.expr);
                break;
            case StmtKind::Recv:
                require_kind(s.res, VarKind::Chan, s.loc);
                if (!s.target.empty()) {
                    set_kind(s.target, VarKind::Int, s.loc);
                    assigned.insert(s.target);
                }
                break;
            case StmtKind::Close:
                require_kind(s.res, VarKind::Chan, s.loc);
                break;
            case StmtKind::Lock:
            case StmtKind::Unlock:
                require_kind(s.res, VarKind::Mutex, s.loc);
                break;
            case StmtKind::WgAdd:
                require_kind(s.res, VarKind::Wg, s.loc);
                check_expr(*s.expr);
                break;
            case StmtKind::WgDone:
            case StmtKind::WgWait:
                require_kind(s.res, VarKind::Wg, s.loc);
                break;
            case StmtKind::CvWait:
            case StmtKind::CvSignal:
            case StmtKind::CvBroadcast:
                require_kind(s.res, VarKind::Cond, s.loc);
                break;
            case StmtKind::Select:
                for (const auto& c : s.cases) {
                    require_kind(c.chan, VarKind::Chan, c.loc);
                    if (c.is_send) check_expr(*c.send_value);
                    if (!c.recv_target.empty()) {
                        set_kind(c.recv_target, VarKind::Int, c.loc);
                        assigned.insert(c.recv_target);
                    }
                    check_block(c.body);
                }
                if (s.has_default) check_block(s.default_body);
                if (s.cases.empty() && !s.has_default)
                    err(s.loc, "select must have at least one case or a default");
                break;
            case StmtKind::If: {
                check_expr(*s.expr);
                auto before = assigned;
                check_block(s.body);
                auto after_then = assigned;
                assigned = before;
                check_block(s.else_body);
                // a variable counts as assigned after the if when either arm assigned it
                assigned.insert(after_then.begin(), after_then.end());
                break;
            }
            case StmtKind::ForRange:
                check_expr(*s.expr);
                check_expr(*s.expr2);
                set_kind(s.aux_name, VarKind::Int, s.loc);
                assigned.insert(s.aux_name);
                check_block(s.body);
                break;
            case StmtKind::Loop:
                check_block(s.body);
                break;
            case StmtKind::Yield:
            case StmtKind::Return:
            case StmtKind::Skip:
                break;
        }
    }

    void check_fn(const FuncDecl& f) {
        fn = &f;
        kinds.clear();
        assigned.clear();
        for (const auto& p : f.params) {
            kinds[p.name] = p.kind;
            assigned.insert(p.name);
        }
        if (f.name == "main") {
            kinds["ARG0"] = VarKind::Int;  // supplied by the CLI
            assigned.insert("ARG0");
        }
        check_block(f.body);
    }
};

}  // namespace

std::vector<Diagnostic> validate(Program& program) {
    std::vector<Diagnostic> diags;
    const FuncDecl* main_fn = program.find("main");
    if (!main_fn) {
        diags.push_back({{program.file, 1, 1}, "missing function 'main'"});
    } else if (!main_fn->params.empty()) {
        diags.push_back({main_fn->loc, "main must take no parameters"});
    }
    Checker c{program, diags};
    for (const auto& f : program.functions) c.check_fn(f);
    if (diags.empty()) program.checked = true;
    return diags;
}

ParseResult parse_and_validate(const std::string& text, const std::string& file_name) {
    ParseResult res = parse(text, file_name);
    if (res.ok()) {
        auto vd = validate(res.program);
        res.diagnostics.insert(res.diagnostics.end(), vd.begin(), vd.end());
    }
    return res;
}

// ---------------------------------------------------------------------------
// Pretty printer
// ---------------------------------------------------------------------------

namespace {

void print_expr(std::ostream& os, const Expr& e, int parent_prec = 0);

int prec_of(const std::string& op) {
    if (op == "||") return 1;
    if (op == "&&") return 2;
    if (op == "==" || op == "!=" || op == "<" || op == "<=" || op == ">" || op == ">=") return 3;
    if (op == "+" || op == "-") return 4;
    return 5;  // * / %
}

void print_expr(std::ostream& os, const Expr& e, int parent_prec) {
    switch (e.kind) {
        case ExprKind::IntLit:
            os << e.value;
            break;
        case ExprKind::Var:
            os << e.name;
            break;
        case ExprKind::Unary:
            os << e.op;
            print_expr(os, *e.lhs, 6);
            break;
        case ExprKind::Binary: {
            int p = prec_of(e.op);
            bool paren = p < parent_prec;
            if (paren) os << "(";
            print_expr(os, *e.lhs, p);
            os << " " << e.op << " ";
            print_expr(os, *e.rhs, p + 1);
            if (paren) os << ")";
            break;
        }
    }
}

void print_block(std::ostream& os, const std::vector<StmtPtr>& body, int indent);

void print_stmt(std::ostream& os, const Stmt& s, int indent) {
    std::string pad(static_cast<size_t>(indent) * 4, ' ');
    os << pad;
    switch (s.kind) {
        case StmtKind::Assign:
            os << s.target << " = ";
            print_expr(os, *s.expr);
            break;
        case StmtKind::MakeChan:
            os << s.target << " = make(chan";
            if (s.expr) {
                os << ", ";
                print_expr(os, *s.expr);
            }
            os << ")";
            break;
        case StmtKind::MakeMutex:
            os << s.target << " = mutex()";
            break;
        case StmtKind::MakeWg:
            os << s.target << " = wg()";
            break;
        case StmtKind::MakeCond:
            os << s.target << " = cond(" << s.aux_name << ")";
            break;
        case StmtKind::Go: {
            os << "go " << s.callee << "(";
            for (size_t i = 0; i < s.args.size(); i++) {
                if (i) os << ", ";
                print_expr(os, *s.args[i]);
            }
            os << ")";
            break;
        }
        case StmtKind::Send:
            os << "send " << s.res << " ";
            print_expr(os, *s.expr);
            break;
        case StmtKind::Recv:
            if (!s.target.empty()) os << s.target << " = ";
            os << "recv " << s.res;
            break;
        case StmtKind::Close:
            os << "close " << s.res;
            break;
        case StmtKind::Lock:
            os << "lock " << s.res;
            break;
        case StmtKind::Unlock:
            os << "unlock " << s.res;
            break;
        case StmtKind::WgAdd:
            os << "add " << s.res << " ";
            print_expr(os, *s.expr);
            break;
        case StmtKind::WgDone:
            os << "done " << s.res;
            break;
        case StmtKind::WgWait:
            os << "wait " << s.res;
            break;
        case StmtKind::CvWait:
            os << "cwait " << s.res;
            break;
        case StmtKind::CvSignal:
            os << "signal " << s.res;
            break;
        case StmtKind::CvBroadcast:
            os << "broadcast " << s.res;
            break;
        case StmtKind::Select: {
            os << "select {\n";
            std::string pad1(static_cast<size_t>(indent + 1) * 4, ' ');
            for (const auto& c : s.cases) {
                os << pad1 << "case ";
                if (c.is_send) {
                    os << "send " << c.chan << " ";
                    print_expr(os, *c.send_value);
                } else {
                    if (!c.recv_target.empty()) os << c.recv_target << " = ";
                    os << "recv " << c.chan;
                }
                os << " ";
                print_block(os, c.body, indent + 1);
                os << "\n";
            }
            if (s.has_default) {
                os << pad1 << "default ";
                print_block(os, s.default_body, indent + 1);
                os << "\n";
            }
            os << pad << "}";
            break;
        }
        case StmtKind::If:
            os << "if ";
            print_expr(os, *s.expr);
            os << " ";
            print_block(os, s.body, indent);
            if (!s.else_body.empty()) {
                os << " else ";
                print_block(os, s.else_body, indent);
            }
            break;
        case StmtKind::ForRange:
            os << "for " << s.aux_name << " in ";
            print_expr(os, *s.expr);
            os << " .. ";
            print_expr(os, *s.expr2);
            os << " ";
            print_block(os, s.body, indent);
            break;
        case StmtKind::Loop:
            os << "loop ";
            print_block(os, s.body, indent);
            break;
        case StmtKind::Yield:
            os << "yield";
            break;
        case StmtKind::Return:
            os << "return";
            break;
        case StmtKind::Skip:
            os << "skip";
            break;
    }
    os << "\n";
}

void print_block(std::ostream& os, const std::vector<StmtPtr>& body, int indent) {
    os << "{\n";
    for (const auto& s : body) print_stmt(os, *s, indent + 1);
    os << std::string(static_cast<size_t>(indent) * 4, ' ') << "}";
}

}  // namespace

std::string pretty_print(const Program& program) {
    std::ostringstream os;
    bool first = true;
    for (const auto& f : program.functions) {
        if (!first) os << "\n";
        first = false;
        os << "func " << f.name << "(";
        for (size_t i = 0; i < f.params.size(); i++) {
            if (i) os << ", ";
            os << f.params[i].name << ": " << var_kind_name(f.params[i].kind);
        }
        os << ") ";
        print_block(os, f.body, 0);
        os << "\n";
    }
    return os.str();
}

}  // namespace ectsim
