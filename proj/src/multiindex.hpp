#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rational.hpp"

namespace jetvar {

inline constexpr int kMaxBaseDim = 8;

/// Symmetric derivative multi-index over base coordinates x1..xn.
/// Dense fixed-size representation; contexts reject n > 8.
class MultiIndex {
public:
    MultiIndex() = default;
    explicit MultiIndex(int dim);

    /// The unit index e_sigma (one derivative in direction sigma, 1-based).
    static MultiIndex unit(int dim, int sigma);

    int dim() const { return dim_; }
    int order() const;
    bool is_zero() const { return order() == 0; }

    /// Count for base label sigma (1-based).
    int operator[](int sigma) const { return counts_[sigma - 1]; }

    MultiIndex plus(int sigma) const;
    MultiIndex minus(int sigma) const; // pre: counts[sigma] > 0
    bool contains(const MultiIndex& other) const;

    Int factorial() const;

    /// Graded-lex total order: by |alpha| first, then lexicographically by
    /// counts (so in n=2: (0,0) < (1,0) < (0,1) < (2,0) < (1,1) < (0,2)).
    std::strong_ordering operator<=>(const MultiIndex& other) const;
    bool operator==(const MultiIndex& other) const = default;

    /// "x1^2 x3" style; the empty index renders as "1".
    std::string str() const;

    /// Space-separated derivative labels as used inside jet brackets,
    /// e.g. "x1^2 x3"; empty string for the zero index.
    std::string label_str() const;

    size_t hash() const;

private:
    int8_t dim_ = 0;
    std::array<uint8_t, kMaxBaseDim> counts_{};
    friend MultiIndex add(const MultiIndex&, const MultiIndex&);
    friend MultiIndex sub(const MultiIndex&, const MultiIndex&);
};

MultiIndex add(const MultiIndex& a, const MultiIndex& b);
/// Componentwise difference; pre: a >= b componentwise.
MultiIndex sub(const MultiIndex& a, const MultiIndex& b);

/// (m+a)! / (m! a!) as an exact (integer-valued) rational.
Rational multinomial(const MultiIndex& m, const MultiIndex& a);

/// All multi-indices of order <= s in graded-lex order; C(n+s, n) entries.
std::vector<MultiIndex> enumerate_multiindices(int n, int s);

/// All multi-indices of order exactly k, graded-lex order.
std::vector<MultiIndex> multiindices_of_order(int n, int k);

Int binomial(long n, long k);

} // namespace jetvar

template <>
struct std::hash<jetvar::MultiIndex> {
    size_t operator()(const jetvar::MultiIndex& m) const { return m.hash(); }
};
