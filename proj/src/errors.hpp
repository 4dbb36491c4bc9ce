#pragma once

#include <stdexcept>
#include <string>

namespace jetvar {

/// Base class for all jetvar errors.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Structural misuse: dimension mismatch, undeclared coordinate, bad index.
struct semantic_error : error {
    using error::error;
};

/// A jet coordinate beyond the context's max order would be created.
struct order_cap_error : error {
    using error::error;
};

/// Expression/model text could not be parsed.
struct parse_error : error {
    parse_error(const std::string& msg, int line, int col)
        : error(msg + " at line " + std::to_string(line) + ", column " + std::to_string(col)),
          line(line), col(col) {}
    int line;
    int col;
};

/// Numeric evaluation failure (unbound coordinate, singular metric, ...).
struct eval_error : error {
    using error::error;
};

/// A documented operation precondition does not hold (e.g. nonzero Bianchi
/// expression handed to superpotential extraction). Carries the diagnostic.
struct precondition_error : error {
    precondition_error(const std::string& msg, std::string diag = {})
        : error(msg), diagnostic(std::move(diag)) {}
    std::string diagnostic;
};

} // namespace jetvar
