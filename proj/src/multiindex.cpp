#include "multiindex.hpp"

#include <algorithm>

#include "errors.hpp"

namespace jetvar {

MultiIndex::MultiIndex(int dim) : dim_(static_cast<int8_t>(dim)) {
    if (dim < 1 || dim > kMaxBaseDim)
        throw semantic_error("multi-index dimension must be in 1.." + std::to_string(kMaxBaseDim) +
                             ", got " + std::to_string(dim));
}

MultiIndex MultiIndex::unit(int dim, int sigma) {
    MultiIndex m(dim);
    if (sigma < 1 || sigma > dim)
        throw semantic_error("base label " + std::to_string(sigma) + " out of range 1.." + std::to_string(dim));
    m.counts_[sigma - 1] = 1;
    return m;
}

int MultiIndex::order() const {
    int s = 0;
    for (int i = 0; i < dim_; ++i) s += counts_[i];
    return s;
}

MultiIndex MultiIndex::plus(int sigma) const {
    if (sigma < 1 || sigma > dim_)
        throw semantic_error("base label " + std::to_string(sigma) + " out of range");
    MultiIndex m = *this;
    if (m.counts_[sigma - 1] == 255) throw semantic_error("multi-index count overflow");
    ++m.counts_[sigma - 1];
    return m;
}

MultiIndex MultiIndex::minus(int sigma) const {
    if (sigma < 1 || sigma > dim_ || counts_[sigma - 1] == 0)
        throw semantic_error("cannot remove derivative x" + std::to_string(sigma) + " from " + str());
    MultiIndex m = *this;
    --m.counts_[sigma - 1];
    return m;
}

bool MultiIndex::contains(const MultiIndex& other) const {
    if (dim_ != other.dim_) return false;
    for (int i = 0; i < dim_; ++i)
        if (counts_[i] < other.counts_[i]) return false;
    return true;
}

Int MultiIndex::factorial() const {
    Int f = 1;
    for (int i = 0; i < dim_; ++i)
        for (int k = 2; k <= counts_[i]; ++k) f *= k;
    return f;
}

std::strong_ordering MultiIndex::operator<=>(const MultiIndex& other) const {
    if (auto c = dim_ <=> other.dim_; c != 0) return c;
    if (auto c = order() <=> other.order(); c != 0) return c;
    // within a grade: lexicographic with higher leading counts first,
    // so (1,0) precedes (0,1)
    for (int i = 0; i < dim_; ++i)
        if (auto c = other.counts_[i] <=> counts_[i]; c != 0) return c;
    return std::strong_ordering::equal;
}

std::string MultiIndex::str() const {
    std::string s = label_str();
    return s.empty() ? "1" : s;
}

std::string MultiIndex::label_str() const {
    std::string s;
    for (int i = 0; i < dim_; ++i) {
        if (counts_[i] == 0) continue;
        if (!s.empty()) s += ' ';
        s += "x" + std::to_string(i + 1);
        if (counts_[i] > 1) s += "^" + std::to_string(counts_[i]);
    }
    return s;
}

size_t MultiIndex::hash() const {
    size_t h = 1469598103934665603ull;
    h = (h ^ static_cast<size_t>(dim_)) * 1099511628211ull;
    for (int i = 0; i < dim_; ++i) h = (h ^ counts_[i]) * 1099511628211ull;
    return h;
}

MultiIndex add(const MultiIndex& a, const MultiIndex& b) {
    if (a.dim_ != b.dim_)
        throw semantic_error("multi-index dimension mismatch: " + std::to_string(a.dim()) + " vs " +
                             std::to_string(b.dim()));
    MultiIndex m = a;
    for (int i = 0; i < a.dim_; ++i) m.counts_[i] = static_cast<uint8_t>(m.counts_[i] + b.counts_[i]);
    return m;
}

MultiIndex sub(const MultiIndex& a, const MultiIndex& b) {
    if (a.dim_ != b.dim_) throw semantic_error("multi-index dimension mismatch");
    if (!a.contains(b)) throw semantic_error("multi-index difference would be negative");
    MultiIndex m = a;
    for (int i = 0; i < a.dim_; ++i) m.counts_[i] = static_cast<uint8_t>(m.counts_[i] - b.counts_[i]);
    return m;
}

Rational multinomial(const MultiIndex& m, const MultiIndex& a) {
    Int num = add(m, a).factorial();
    Int den = m.factorial() * a.factorial();
    return Rational(num) / Rational(den);
}

std::vector<MultiIndex> multiindices_of_order(int n, int k) {
    std::vector<MultiIndex> out;
    MultiIndex cur(n);
    // distribute k over n slots, lexicographic with higher leading counts first
    std::function<void(int, int, MultiIndex)> rec = [&](int slot, int left, MultiIndex m) {
        if (slot == n) {
            if (left == 0) out.push_back(m);
            return;
        }
        for (int c = left; c >= 0; --c) {
            MultiIndex next = m;
            for (int i = 0; i < c; ++i) next = next.plus(slot + 1);
            rec(slot + 1, left - c, next);
        }
    };
    rec(0, k, cur);
    return out;
}

std::vector<MultiIndex> enumerate_multiindices(int n, int s) {
    if (n < 1) throw semantic_error("enumerate: dimension must be >= 1");
    if (s < 0) throw semantic_error("enumerate: max order must be >= 0");
    std::vector<MultiIndex> out;
    for (int k = 0; k <= s; ++k) {
        auto layer = multiindices_of_order(n, k);
        out.insert(out.end(), layer.begin(), layer.end());
    }
    return out;
}

Int binomial(long n, long k) {
    if (k < 0 || k > n) return 0;
    Int r;
    mpz_bin_uiui(r.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
    return r;
}

} // namespace jetvar
