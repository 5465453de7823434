#pragma once

#include <string>
#include <vector>

#include "ectsim/ast.hpp"

namespace ectsim {

struct ParseResult {
    Program program;
    std::vector<Diagnostic> diagnostics;
    bool ok() const { return diagnostics.empty(); }
};

// Parses DSL text into an AST. Pure and deterministic; errors are reported
// as diagnostics, never by throwing.
ParseResult parse(const std::string& text, const std::string& file_name);

// Checks all Program invariants (single zero-parameter main, name resolution,
// assign-before-use, call arity, variable/parameter kind consistency).
// On success sets program.checked. Returns the list of violations found.
std::vector<Diagnostic> validate(Program& program);

// Canonical source form. parse(pretty_print(parse(text))) is structurally
// identical to parse(text).
std::string pretty_print(const Program& program);

// Convenience: parse + validate, collecting all diagnostics.
ParseResult parse_and_validate(const std::string& text, const std::string& file_name);

}  // namespace ectsim
