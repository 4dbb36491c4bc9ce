#pragma once

#include <boost/container/small_vector.hpp>

#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "context.hpp"
#include "errors.hpp"
#include "multiindex.hpp"
#include "rational.hpp"

namespace jetvar {

struct Factor {
    uint32_t sym;
    int32_t exp;
    bool operator==(const Factor&) const = default;
};

using Monomial = boost::container::small_vector<Factor, 4>;

struct Term {
    Rational coeff;
    Monomial mono;
};

/// Canonical sum of terms: exact rational coefficient times a monomial over
/// coordinates and derived symbols (integer powers; negative powers only for
/// symbols declared invertible). The canonical form is maintained by every
/// operation, so structural equality decides expression equality on the
/// polynomial fragment.
class Expr {
public:
    Expr() = default;
    explicit Expr(const JetContext* ctx) : ctx_(ctx) {}

    static Expr constant(const JetContext* ctx, Rational c);
    static Expr symbol(const JetContext* ctx, uint32_t sym, int exp = 1);

    const JetContext* ctx() const { return ctx_; }
    const std::vector<Term>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_[0].mono.empty()); }
    Rational constant_value() const;
    size_t size() const { return terms_.size(); }

    Expr operator-() const;
    Expr& operator+=(const Expr& o);
    Expr& operator-=(const Expr& o);
    friend Expr operator+(Expr a, const Expr& b) { return a += b; }
    friend Expr operator-(Expr a, const Expr& b) { return a -= b; }
    friend Expr operator*(const Expr& a, const Expr& b);
    Expr& operator*=(const Expr& o) { return *this = *this * o; }
    Expr scaled(const Rational& c) const;
    Expr pow(int e) const;

    /// Canonical structural equality (same context assumed).
    friend bool operator==(const Expr& a, const Expr& b);

    /// Internal: adopt raw terms and canonicalize.
    static Expr from_terms(const JetContext* ctx, std::vector<Term>&& ts);

private:
    const JetContext* ctx_ = nullptr;
    std::vector<Term> terms_;
    friend void canonicalize(const JetContext* ctx, std::vector<Term>& ts);
};

/// Re-canonicalization; idempotent (expressions are kept canonical throughout).
Expr normalize(const Expr& e);

/// Formal partial derivative with respect to a symbol, treating all symbols
/// as independent (no chain rule through derived quantities).
Expr partial_symbol(const Expr& e, uint32_t sym);

/// Partial derivative with respect to a declared coordinate, applying the
/// registered differentiation rules of derived symbols (chain rule).
Expr partial(const Expr& e, uint32_t coord);

/// Simultaneous substitution of coordinates, then normalization.
Expr substitute(const Expr& e, const std::unordered_map<uint32_t, Expr>& bindings);

/// Exact numeric evaluation at a point; values live in Q(sqrt d).
QuadExt eval_numeric(const Expr& e, const EvalPoint& pt);

/// Formal (total) derivative D_sigma.
Expr total_derivative(const Expr& e, int sigma);
Expr total_derivative_multi(const Expr& e, const MultiIndex& alpha);

/// Highest jet order among non-parameter fields (or all fields).
int max_jet_order(const Expr& e, bool include_parameters = true);

void for_each_symbol(const Expr& e, const std::function<void(uint32_t, int)>& f);
std::unordered_set<uint32_t> symbol_support(const Expr& e);

struct LinearParts {
    std::unordered_map<uint32_t, Expr> coeff; ///< symbol -> coefficient expression
    Expr remainder;                           ///< part free of the selected symbols
};

/// Split an expression linear in the selected symbols into coefficients;
/// throws semantic_error if any term is nonlinear in them.
LinearParts collect_linear(const Expr& e, const std::function<bool(uint32_t)>& select);

/// Explicit rewrite pass reducing complete contractions g_{mu a} g^{a nu}
/// (inverse-metric symbol against the metric field) to Kronecker deltas.
/// Not part of normalize by design.
Expr simplify_metric_contractions(const Expr& e);

std::string render_text(const Expr& e);

} // namespace jetvar
