#pragma once

#include <string>

#include "snipex/ast.hpp"

namespace snipex {

// Parses a whole snippet into a module AST. Throws ParseError.
ast::Module parse_module(const std::string& source);

// Parses a single expression (used by the checker to locate attribute bases
// inside a context line). Throws ParseError.
ast::ExprP parse_expression(const std::string& source);

}  // namespace snipex
