#include "expr.hpp"

#include <algorithm>
#include <cassert>

namespace jetvar {

namespace {

const JetContext* join_ctx(const JetContext* a, const JetContext* b) {
    if (!a) return b;
    if (b && a != b) throw semantic_error("expressions from different contexts");
    return a;
}

// grade = sum of exponents (can be negative for invertible symbols)
long mono_degree(const Monomial& m) {
    long d = 0;
    for (const Factor& f : m) d += f.exp;
    return d;
}

/// true if a sorts before b (descending canonical order: higher grade first,
/// then lexicographic by symbol key / exponent).
bool mono_before(const JetContext* ctx, const Monomial& a, const Monomial& b) {
    long da = mono_degree(a), db = mono_degree(b);
    if (da != db) return da > db;
    size_t k = std::min(a.size(), b.size());
    for (size_t i = 0; i < k; ++i) {
        if (a[i].sym != b[i].sym) return ctx->sym_less(a[i].sym, b[i].sym);
        if (a[i].exp != b[i].exp) return a[i].exp > b[i].exp;
    }
    return a.size() < b.size();
}

bool mono_equal(const Monomial& a, const Monomial& b) { return a == b; }

size_t mono_hash(const Monomial& m) {
    size_t h = 1469598103934665603ull;
    for (const Factor& f : m) {
        h = (h ^ f.sym) * 1099511628211ull;
        h = (h ^ static_cast<size_t>(static_cast<uint32_t>(f.exp))) * 1099511628211ull;
    }
    return h;
}

struct MonoHash {
    size_t operator()(const Monomial& m) const { return mono_hash(m); }
};
struct MonoEq {
    bool operator()(const Monomial& a, const Monomial& b) const { return mono_equal(a, b); }
};

} // namespace

void canonicalize(const JetContext* ctx, std::vector<Term>& ts) {
    for (Term& t : ts) {
        std::sort(t.mono.begin(), t.mono.end(),
                  [&](const Factor& a, const Factor& b) { return ctx->sym_less(a.sym, b.sym); });
        size_t w = 0;
        for (size_t r = 0; r < t.mono.size(); ++r) {
            if (w > 0 && t.mono[w - 1].sym == t.mono[r].sym) {
                t.mono[w - 1].exp += t.mono[r].exp;
                if (t.mono[w - 1].exp == 0) --w;
            } else {
                t.mono[w++] = t.mono[r];
            }
        }
        t.mono.resize(w);
    }
    std::erase_if(ts, [](const Term& t) { return t.coeff == 0; });
    std::sort(ts.begin(), ts.end(), [&](const Term& a, const Term& b) { return mono_before(ctx, a.mono, b.mono); });
    size_t w = 0;
    for (size_t r = 0; r < ts.size(); ++r) {
        if (w > 0 && mono_equal(ts[w - 1].mono, ts[r].mono)) {
            ts[w - 1].coeff += ts[r].coeff;
        } else {
            if (w > 0 && ts[w - 1].coeff == 0) --w;
            ts[w++] = std::move(ts[r]);
        }
    }
    if (w > 0 && ts[w - 1].coeff == 0) --w;
    ts.resize(w);
}

Expr Expr::from_terms(const JetContext* ctx, std::vector<Term>&& ts) {
    Expr e(ctx);
    e.terms_ = std::move(ts);
    canonicalize(ctx, e.terms_);
    return e;
}

Expr Expr::constant(const JetContext* ctx, Rational c) {
    Expr e(ctx);
    if (c != 0) e.terms_.push_back({std::move(c), {}});
    return e;
}

Expr Expr::symbol(const JetContext* ctx, uint32_t sym, int exp) {
    if (exp == 0) return constant(ctx, 1);
    if (exp < 0 && !ctx->sym(sym).invertible)
        throw semantic_error("negative power of non-invertible symbol " + ctx->sym(sym).name);
    Expr e(ctx);
    e.terms_.push_back({Rational(1), Monomial{Factor{sym, exp}}});
    return e;
}

Rational Expr::constant_value() const {
    if (terms_.empty()) return Rational(0);
    if (terms_.size() != 1 || !terms_[0].mono.empty()) throw semantic_error("expression is not constant");
    return terms_[0].coeff;
}

Expr Expr::operator-() const {
    Expr e = *this;
    for (Term& t : e.terms_) t.coeff = -t.coeff;
    return e;
}

Expr& Expr::operator+=(const Expr& o) {
    const JetContext* c = join_ctx(ctx_, o.ctx_);
    ctx_ = c;
    if (o.terms_.empty()) return *this;
    if (terms_.empty()) {
        terms_ = o.terms_;
        return *this;
    }
    std::vector<Term> out;
    out.reserve(terms_.size() + o.terms_.size());
    size_t i = 0, j = 0;
    while (i < terms_.size() && j < o.terms_.size()) {
        if (mono_equal(terms_[i].mono, o.terms_[j].mono)) {
            Rational s = terms_[i].coeff + o.terms_[j].coeff;
            if (s != 0) out.push_back({std::move(s), terms_[i].mono});
            ++i, ++j;
        } else if (mono_before(c, terms_[i].mono, o.terms_[j].mono)) {
            out.push_back(std::move(terms_[i++]));
        } else {
            out.push_back(o.terms_[j++]);
        }
    }
    for (; i < terms_.size(); ++i) out.push_back(std::move(terms_[i]));
    for (; j < o.terms_.size(); ++j) out.push_back(o.terms_[j]);
    terms_ = std::move(out);
    return *this;
}

Expr& Expr::operator-=(const Expr& o) { return *this += -o; }

Expr operator*(const Expr& a, const Expr& b) {
    const JetContext* c = join_ctx(a.ctx_, b.ctx_);
    Expr out(c);
    if (a.terms_.empty() || b.terms_.empty()) return out;
    auto mul_mono = [](const Monomial& x, const Monomial& y) {
        Monomial m = x;
        m.insert(m.end(), y.begin(), y.end());
        return m;
    };
    if (a.terms_.size() * b.terms_.size() <= 64) {
        std::vector<Term> ts;
        ts.reserve(a.terms_.size() * b.terms_.size());
        for (const Term& ta : a.terms_)
            for (const Term& tb : b.terms_) ts.push_back({ta.coeff * tb.coeff, mul_mono(ta.mono, tb.mono)});
        return Expr::from_terms(c, std::move(ts));
    }
    std::unordered_map<Monomial, Rational, MonoHash, MonoEq> acc;
    acc.reserve(a.terms_.size() * 2);
    for (const Term& ta : a.terms_) {
        for (const Term& tb : b.terms_) {
            Monomial m = mul_mono(ta.mono, tb.mono);
            std::sort(m.begin(), m.end(), [&](const Factor& x, const Factor& y) { return c->sym_less(x.sym, y.sym); });
            size_t w = 0;
            for (size_t r = 0; r < m.size(); ++r) {
                if (w > 0 && m[w - 1].sym == m[r].sym) {
                    m[w - 1].exp += m[r].exp;
                    if (m[w - 1].exp == 0) --w;
                } else {
                    m[w++] = m[r];
                }
            }
            m.resize(w);
            acc[std::move(m)] += ta.coeff * tb.coeff;
        }
    }
    std::vector<Term> ts;
    ts.reserve(acc.size());
    for (auto& [m, q] : acc)
        if (q != 0) ts.push_back({std::move(q), m});
    return Expr::from_terms(c, std::move(ts));
}

Expr Expr::scaled(const Rational& c) const {
    if (c == 0) return Expr(ctx_);
    Expr e = *this;
    for (Term& t : e.terms_) t.coeff *= c;
    return e;
}

Expr Expr::pow(int e) const {
    if (e == 0) return constant(ctx_, 1);
    if (e < 0) {
        // only single invertible-monomial terms can be inverted
        if (terms_.size() != 1) throw semantic_error("cannot invert a sum");
        const Term& t = terms_[0];
        for (const Factor& f : t.mono)
            if (!ctx_->sym(f.sym).invertible)
                throw semantic_error("cannot invert non-invertible symbol " + ctx_->sym(f.sym).name);
        Expr inv(ctx_);
        Monomial m = t.mono;
        for (Factor& f : m) f.exp = -f.exp;
        inv.terms_.push_back({Rational(1) / t.coeff, std::move(m)});
        return inv.pow(-e);
    }
    Expr r = constant(ctx_, 1);
    Expr base = *this;
    int k = e;
    while (k > 0) {
        if (k & 1) r = r * base;
        if (k >>= 1) base = base * base;
    }
    return r;
}

bool operator==(const Expr& a, const Expr& b) {
    if (a.terms_.size() != b.terms_.size()) return false;
    for (size_t i = 0; i < a.terms_.size(); ++i)
        if (a.terms_[i].coeff != b.terms_[i].coeff || !mono_equal(a.terms_[i].mono, b.terms_[i].mono)) return false;
    return true;
}

Expr normalize(const Expr& e) {
    std::vector<Term> ts = e.terms();
    return Expr::from_terms(e.ctx(), std::move(ts));
}

Expr partial_symbol(const Expr& e, uint32_t sym) {
    std::vector<Term> out;
    for (const Term& t : e.terms()) {
        for (size_t i = 0; i < t.mono.size(); ++i) {
            if (t.mono[i].sym != sym) continue;
            Term d;
            d.coeff = t.coeff * t.mono[i].exp;
            d.mono = t.mono;
            if (--d.mono[i].exp == 0) d.mono.erase(d.mono.begin() + i);
            out.push_back(std::move(d));
            break;
        }
    }
    return Expr::from_terms(e.ctx(), std::move(out));
}

Expr partial(const Expr& e, uint32_t coord) {
    const JetContext* ctx = e.ctx();
    if (ctx->sym(coord).kind == SymKind::Derived)
        throw semantic_error("partial expects a declared coordinate, not derived symbol " + ctx->sym(coord).name);
    Expr out = partial_symbol(e, coord);
    // chain rule through derived symbols present in e
    std::unordered_set<uint32_t> seen;
    for (const Term& t : e.terms())
        for (const Factor& f : t.mono)
            if (ctx->sym(f.sym).kind == SymKind::Derived && seen.insert(f.sym).second)
                if (const Expr* r = ctx->rule(f.sym, coord)) out += partial_symbol(e, f.sym) * *r;
    return out;
}

Expr substitute(const Expr& e, const std::unordered_map<uint32_t, Expr>& bindings) {
    const JetContext* ctx = e.ctx();
    for (const auto& [s, b] : bindings) {
        if (ctx->sym(s).kind == SymKind::Derived)
            throw semantic_error("cannot substitute into opaque derived symbol " + ctx->sym(s).name);
        (void)b;
    }
    Expr out(ctx);
    for (const Term& t : e.terms()) {
        Expr piece(ctx);
        Term residual{t.coeff, {}};
        bool bound_any = false;
        piece = Expr::constant(ctx, 1);
        for (const Factor& f : t.mono) {
            auto it = bindings.find(f.sym);
            if (it == bindings.end()) {
                residual.mono.push_back(f);
            } else {
                bound_any = true;
                piece = piece * it->second.pow(f.exp);
            }
        }
        Expr rest(ctx);
        rest = Expr::from_terms(ctx, {std::move(residual)});
        out += bound_any ? rest * piece : rest;
    }
    return out;
}

QuadExt eval_numeric(const Expr& e, const EvalPoint& pt) {
    QuadExt acc{Rational(0)};
    for (const Term& t : e.terms()) {
        QuadExt v{t.coeff};
        for (const Factor& f : t.mono) v = v * pt.value_of(f.sym).pow(f.exp);
        acc = acc + v;
    }
    return acc;
}

Expr total_derivative(const Expr& e, int sigma) {
    const JetContext* ctx = e.ctx();
    std::vector<Term> out;
    Expr extra(ctx); // contributions with expression-valued factor derivatives
    for (const Term& t : e.terms()) {
        for (size_t i = 0; i < t.mono.size(); ++i) {
            const Factor& f = t.mono[i];
            const SymbolData& sd = ctx->sym(f.sym);
            switch (sd.kind) {
                case SymKind::Param: break;
                case SymKind::Base:
                    if (static_cast<int>(sd.ref) == sigma) {
                        Term d;
                        d.coeff = t.coeff * f.exp;
                        d.mono = t.mono;
                        if (--d.mono[i].exp == 0) d.mono.erase(d.mono.begin() + i);
                        out.push_back(std::move(d));
                    }
                    break;
                case SymKind::Jet: {
                    Term d;
                    d.coeff = t.coeff * f.exp;
                    d.mono = t.mono;
                    if (--d.mono[i].exp == 0) d.mono.erase(d.mono.begin() + i);
                    d.mono.push_back({ctx->sym_jet(sd.ref, sd.comp, sd.alpha.plus(sigma)), 1});
                    out.push_back(std::move(d));
                    break;
                }
                case SymKind::Derived: {
                    const Expr& ds = ctx->derived_total_derivative(f.sym, sigma);
                    if (ds.is_zero()) break;
                    Term d;
                    d.coeff = t.coeff * f.exp;
                    d.mono = t.mono;
                    if (--d.mono[i].exp == 0) d.mono.erase(d.mono.begin() + i);
                    extra += Expr::from_terms(ctx, {std::move(d)}) * ds;
                    break;
                }
            }
        }
    }
    return Expr::from_terms(ctx, std::move(out)) + extra;
}

Expr total_derivative_multi(const Expr& e, const MultiIndex& alpha) {
    Expr out = e;
    for (int sigma = 1; sigma <= alpha.dim(); ++sigma)
        for (int k = 0; k < alpha[sigma]; ++k) out = total_derivative(out, sigma);
    return out;
}

int max_jet_order(const Expr& e, bool include_parameters) {
    const JetContext* ctx = e.ctx();
    int best = 0;
    for (const Term& t : e.terms())
        for (const Factor& f : t.mono) {
            const SymbolData& sd = ctx->sym(f.sym);
            if (sd.kind != SymKind::Jet) continue;
            if (!include_parameters && ctx->fields()[sd.ref].parameter) continue;
            best = std::max(best, sd.alpha.order());
        }
    return best;
}

void for_each_symbol(const Expr& e, const std::function<void(uint32_t, int)>& fn) {
    for (const Term& t : e.terms())
        for (const Factor& f : t.mono) fn(f.sym, f.exp);
}

std::unordered_set<uint32_t> symbol_support(const Expr& e) {
    std::unordered_set<uint32_t> s;
    for_each_symbol(e, [&](uint32_t sym, int) { s.insert(sym); });
    return s;
}

LinearParts collect_linear(const Expr& e, const std::function<bool(uint32_t)>& select) {
    const JetContext* ctx = e.ctx();
    LinearParts lp;
    lp.remainder = Expr(ctx);
    std::unordered_map<uint32_t, std::vector<Term>> buckets;
    std::vector<Term> rem;
    for (const Term& t : e.terms()) {
        int hits = 0;
        size_t pos = 0;
        for (size_t i = 0; i < t.mono.size(); ++i) {
            if (select(t.mono[i].sym)) {
                hits += t.mono[i].exp;
                pos = i;
            }
        }
        if (hits == 0) {
            rem.push_back(t);
        } else if (hits == 1 && t.mono[pos].exp == 1) {
            Term r = t;
            r.mono.erase(r.mono.begin() + pos);
            buckets[t.mono[pos].sym].push_back(std::move(r));
        } else {
            throw semantic_error("expression is not linear in the selected symbols");
        }
    }
    for (auto& [s, ts] : buckets) lp.coeff.emplace(s, Expr::from_terms(ctx, std::move(ts)));
    lp.remainder = Expr::from_terms(ctx, std::move(rem));
    return lp;
}

Expr simplify_metric_contractions(const Expr& e) {
    const JetContext* ctx = e.ctx();
    // locate an inverse-metric family and its metric field
    int fam = -1, mf = -1;
    for (size_t i = 0; i < ctx->derived_families().size(); ++i)
        if (ctx->derived_families()[i].eval == DerivedEval::InverseMetric) {
            fam = static_cast<int>(i);
            mf = ctx->derived_families()[i].metric_field;
        }
    if (fam < 0) return e;
    const int n = ctx->n();
    MultiIndex zero(n);

    Expr cur = e;
    for (int pass = 0; pass < 16; ++pass) {
        std::unordered_map<Monomial, Rational, MonoHash, MonoEq> index;
        for (const Term& t : cur.terms()) index.emplace(t.mono, t.coeff);
        bool changed = false;
        for (const Term& t : cur.terms()) {
            if (index.find(t.mono) == index.end()) continue; // already consumed
            // look for a lower factor l_{a x} and an upper factor u^{x d}
            for (size_t li = 0; li < t.mono.size() && !changed; ++li) {
                const SymbolData& ls = ctx->sym(t.mono[li].sym);
                if (ls.kind != SymKind::Derived || ls.ref != fam || t.mono[li].exp < 1) continue;
                auto [a0, b0] = ctx->metric_pair_of(ls.comp);
                for (size_t ui = 0; ui < t.mono.size() && !changed; ++ui) {
                    const SymbolData& us = ctx->sym(t.mono[ui].sym);
                    if (us.kind != SymKind::Jet || static_cast<int>(us.ref) != mf || us.alpha.order() != 0 ||
                        t.mono[ui].exp < 1)
                        continue;
                    auto [c0, d0] = ctx->metric_pair_of(us.comp);
                    // candidate contracted index pairs (a, x) x (x, d)
                    std::array<std::pair<int, int>, 4> combos{{{a0, b0}, {b0, a0}, {c0, d0}, {d0, c0}}};
                    for (auto [afree, x] : {std::pair{a0, b0}, std::pair{b0, a0}}) {
                        for (auto [x2, dfree] : {std::pair{c0, d0}, std::pair{d0, c0}}) {
                            if (x != x2) continue;
                            // try the full contraction sum over x' = 1..n
                            Monomial base = t.mono;
                            auto removed = [&](Monomial m, int lcomp, int ucomp) {
                                for (auto& f : m)
                                    if (ctx->sym(f.sym).kind == SymKind::Derived && ctx->sym(f.sym).ref == fam &&
                                        ctx->sym(f.sym).comp == lcomp) {
                                        --f.exp;
                                        break;
                                    }
                                for (auto& f : m)
                                    if (ctx->sym(f.sym).kind == SymKind::Jet &&
                                        static_cast<int>(ctx->sym(f.sym).ref) == mf &&
                                        static_cast<int>(ctx->sym(f.sym).comp) == ucomp &&
                                        ctx->sym(f.sym).alpha.order() == 0) {
                                        --f.exp;
                                        break;
                                    }
                                m.erase(std::remove_if(m.begin(), m.end(),
                                                       [](const Factor& f) { return f.exp == 0; }),
                                        m.end());
                                std::sort(m.begin(), m.end(),
                                          [&](const Factor& p, const Factor& q) { return ctx->sym_less(p.sym, q.sym); });
                                return m;
                            };
                            Monomial residual =
                                removed(base, ctx->metric_pair_component(afree, x), ctx->metric_pair_component(x, dfree));
                            bool ok = true;
                            Rational cval = t.coeff;
                            std::vector<Monomial> group;
                            for (int xp = 1; xp <= n && ok; ++xp) {
                                Monomial sibling = residual;
                                sibling.push_back({ctx->sym_derived(fam, ctx->metric_pair_component(afree, xp)), 1});
                                sibling.push_back({ctx->sym_jet(mf, ctx->metric_pair_component(xp, dfree), zero), 1});
                                std::sort(sibling.begin(), sibling.end(), [&](const Factor& p, const Factor& q) {
                                    return ctx->sym_less(p.sym, q.sym);
                                });
                                // re-merge duplicated symbols
                                Monomial merged;
                                for (const Factor& f : sibling) {
                                    if (!merged.empty() && merged.back().sym == f.sym)
                                        merged.back().exp += f.exp;
                                    else
                                        merged.push_back(f);
                                }
                                auto it = index.find(merged);
                                if (it == index.end() || it->second != cval)
                                    ok = false;
                                else
                                    group.push_back(merged);
                            }
                            if (!ok) continue;
                            // replace: subtract the group, add delta term
                            Expr delta(ctx);
                            if (afree == dfree) delta = Expr::from_terms(ctx, {Term{cval, residual}});
                            Expr sum(ctx);
                            std::vector<Term> gts;
                            for (auto& m : group) gts.push_back({cval, m});
                            sum = Expr::from_terms(ctx, std::move(gts));
                            cur = cur - sum + delta;
                            changed = true;
                            break;
                        }
                        if (changed) break;
                    }
                    (void)combos;
                }
            }
            if (changed) break;
        }
        if (!changed) break;
    }
    return cur;
}

std::string render_text(const Expr& e) {
    if (e.is_zero()) return "0";
    const JetContext* ctx = e.ctx();
    std::string s;
    bool first = true;
    for (const Term& t : e.terms()) {
        Rational c = t.coeff;
        bool neg = c < 0;
        if (neg) c = -c;
        if (first) {
            if (neg) s += "-";
            first = false;
        } else {
            s += neg ? " - " : " + ";
        }
        bool coeff_printed = false;
        if (t.mono.empty() || c != 1) {
            s += c.get_str();
            coeff_printed = true;
        }
        for (size_t i = 0; i < t.mono.size(); ++i) {
            if (coeff_printed || i > 0) s += "*";
            s += ctx->sym(t.mono[i].sym).name;
            if (t.mono[i].exp != 1) s += "^" + std::to_string(t.mono[i].exp);
        }
    }
    return s;
}

} // namespace jetvar
