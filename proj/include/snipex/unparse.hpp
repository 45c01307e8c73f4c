#pragma once

#include <string>

#include "snipex/ast.hpp"

namespace snipex {

// Renders a module back to source text. Every statement is emitted on its
// original start line (blank lines pad the gaps), so line numbers in the
// rendered text agree with the input AST; statements that spanned several
// physical lines are collapsed onto their start line.
std::string unparse(const ast::Module& module);

// Single-line rendering of one expression, parenthesized as needed.
std::string unparse_expr(const ast::Expr& expr);

}  // namespace snipex
