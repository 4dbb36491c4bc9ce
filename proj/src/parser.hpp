#pragma once

#include <string>

#include "expr.hpp"

namespace jetvar {

/// Parse an expression in the canonical grammar against a context.
/// line0/col0 locate the text inside a larger document for error messages.
Expr parse_expr(const JetContext* ctx, const std::string& text, int line0 = 1, int col0 = 1);

} // namespace jetvar
