#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace ectsim {

struct SourceLoc {
    std::string file;
    int line = 1;
    int col = 1;
    auto operator<=>(const SourceLoc&) const = default;
    std::string str() const { return file + ":" + std::to_string(line) + ":" + std::to_string(col); }
};

struct Diagnostic {
    SourceLoc loc;
    std::string message;
    std::string str() const { return loc.str() + ": " + message; }
};

// Kinds a variable or parameter can hold. Resource kinds are handles:
// assignment and parameter passing alias the same runtime object.
enum class VarKind { Int, Chan, Mutex, Wg, Cond };

const char* var_kind_name(VarKind k);

enum class ExprKind { IntLit, Var, Binary, Unary };

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
    ExprKind kind;
    SourceLoc loc;
    std::int64_t value = 0;  // IntLit
    std::string name;        // Var
    std::string op;          // Binary / Unary
    ExprPtr lhs, rhs;
};

enum class StmtKind {
    Assign,
    MakeChan,
    MakeMutex,
    MakeWg,
    MakeCond,
    Go,
    Send,
    Recv,
    Close,
    Lock,
    Unlock,
    WgAdd,
    WgDone,
    WgWait,
    CvWait,
    CvSignal,
    CvBroadcast,
    Select,
    If,
    ForRange,
    Loop,
    Yield,
    Return,
    Skip,
};

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;

struct SelectCase {
    bool is_send = false;
    std::string chan;
    ExprPtr send_value;       // is_send
    std::string recv_target;  // optional, recv only
    std::vector<StmtPtr> body;
    SourceLoc loc;
};

struct Stmt {
    StmtKind kind;
    SourceLoc loc;
    std::string target;   // Assign/Make*/Recv target variable
    std::string res;      // resource operand (Send/Recv/Close/Lock/...)
    std::string callee;   // Go
    std::string aux_name; // MakeCond: associated mutex; ForRange: loop variable
    ExprPtr expr;         // Assign rhs, Send value, WgAdd delta, MakeChan capacity,
                          // If condition, ForRange begin
    ExprPtr expr2;        // ForRange end
    std::vector<ExprPtr> args;           // Go call arguments
    std::vector<StmtPtr> body;           // If-then / ForRange / Loop
    std::vector<StmtPtr> else_body;      // If-else
    std::vector<SelectCase> cases;       // Select
    bool has_default = false;
    std::vector<StmtPtr> default_body;
};

struct Param {
    std::string name;
    VarKind kind;
};

struct FuncDecl {
    std::string name;
    std::vector<Param> params;
    std::vector<StmtPtr> body;
    SourceLoc loc;
};

struct Program {
    std::string file;
    std::vector<FuncDecl> functions;
    std::map<std::string, const FuncDecl*> by_name;  // filled by parse
    bool checked = false;                            // set by validate

    const FuncDecl* find(const std::string& name) const {
        auto it = by_name.find(name);
        return it == by_name.end() ? nullptr : it->second;
    }
    const FuncDecl* entry() const { return find("main"); }
};

}  // namespace ectsim
