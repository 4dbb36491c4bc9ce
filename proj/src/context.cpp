#include "context.hpp"

#include <algorithm>

#include "errors.hpp"
#include "expr.hpp"

namespace jetvar {

namespace {

/// Exact symmetric-matrix inverse via Gauss-Jordan; row-major, n x n.
std::vector<Rational> invert_matrix(int n, const std::vector<Rational>& m) {
    std::vector<Rational> a = m;
    std::vector<Rational> inv(n * n, Rational(0));
    for (int i = 0; i < n; ++i) inv[i * n + i] = 1;
    for (int col = 0; col < n; ++col) {
        int pivot = -1;
        for (int r = col; r < n; ++r)
            if (a[r * n + col] != 0) { pivot = r; break; }
        if (pivot < 0) throw eval_error("singular derived symbol (det g = 0)");
        if (pivot != col) {
            for (int c = 0; c < n; ++c) {
                std::swap(a[pivot * n + c], a[col * n + c]);
                std::swap(inv[pivot * n + c], inv[col * n + c]);
            }
        }
        Rational p = a[col * n + col];
        for (int c = 0; c < n; ++c) {
            a[col * n + c] /= p;
            inv[col * n + c] /= p;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col || a[r * n + col] == 0) continue;
            Rational f = a[r * n + col];
            for (int c = 0; c < n; ++c) {
                a[r * n + c] -= f * a[col * n + c];
                inv[r * n + c] -= f * inv[col * n + c];
            }
        }
    }
    return inv;
}

Rational det_matrix(int n, std::vector<Rational> a) {
    Rational det(1);
    for (int col = 0; col < n; ++col) {
        int pivot = -1;
        for (int r = col; r < n; ++r)
            if (a[r * n + col] != 0) { pivot = r; break; }
        if (pivot < 0) return Rational(0);
        if (pivot != col) {
            for (int c = 0; c < n; ++c) std::swap(a[pivot * n + c], a[col * n + c]);
            det = -det;
        }
        det *= a[col * n + col];
        Rational p = a[col * n + col];
        for (int r = col + 1; r < n; ++r) {
            if (a[r * n + col] == 0) continue;
            Rational f = a[r * n + col] / p;
            for (int c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
        }
    }
    return det;
}

} // namespace

JetContext::JetContext(int n, int max_order) : n_(n), max_order_(max_order) {
    if (n < 1 || n > kMaxBaseDim)
        throw semantic_error("base dimension must be in 1.." + std::to_string(kMaxBaseDim));
    if (max_order < 0) throw semantic_error("max jet order must be >= 0");
}

std::shared_ptr<JetContext> JetContext::create(int n, int max_order) {
    return std::shared_ptr<JetContext>(new JetContext(n, max_order));
}

int JetContext::add_field(const std::string& name, FieldShape shape, int count, bool parameter) {
    if (frozen_) throw semantic_error("context is frozen");
    if (field_id(name) >= 0 || param_id(name) >= 0 || derived_family_id(name) >= 0)
        throw semantic_error("duplicate declaration: " + name);
    FieldDecl d;
    d.name = name;
    d.shape = shape;
    d.count = count;
    d.parameter = parameter;
    switch (shape) {
        case FieldShape::Scalar: d.components = count; break;
        case FieldShape::Covector: d.components = n_; break;
        case FieldShape::GaugeCovector: d.components = count * n_; break;
        case FieldShape::MetricUpper: d.components = n_ * (n_ + 1) / 2; break;
    }
    if (d.components < 1) throw semantic_error("field " + name + " must have at least one component");
    fields_.push_back(std::move(d));
    return static_cast<int>(fields_.size()) - 1;
}

int JetContext::add_param(const std::string& name, bool invertible) {
    if (frozen_) throw semantic_error("context is frozen");
    if (field_id(name) >= 0 || param_id(name) >= 0 || derived_family_id(name) >= 0)
        throw semantic_error("duplicate declaration: " + name);
    params_.push_back({name, invertible});
    return static_cast<int>(params_.size()) - 1;
}

int JetContext::add_derived_family(const std::string& name, int components, DerivedEval eval, int metric_field,
                                   bool invertible, int index_arity) {
    if (frozen_) throw semantic_error("context is frozen");
    if (field_id(name) >= 0 || param_id(name) >= 0 || derived_family_id(name) >= 0)
        throw semantic_error("duplicate declaration: " + name);
    DerivedFamily f;
    f.name = name;
    f.components = components;
    f.eval = eval;
    f.metric_field = metric_field;
    f.invertible = invertible;
    f.index_arity = index_arity;
    families_.push_back(std::move(f));
    return static_cast<int>(families_.size()) - 1;
}

int JetContext::field_id(const std::string& name) const {
    for (size_t i = 0; i < fields_.size(); ++i)
        if (fields_[i].name == name) return static_cast<int>(i);
    return -1;
}

int JetContext::param_id(const std::string& name) const {
    for (size_t i = 0; i < params_.size(); ++i)
        if (params_[i].name == name) return static_cast<int>(i);
    return -1;
}

int JetContext::derived_family_id(const std::string& name) const {
    for (size_t i = 0; i < families_.size(); ++i)
        if (families_[i].name == name) return static_cast<int>(i);
    return -1;
}

int JetContext::metric_pair_component(int mu, int nu) const {
    if (mu < 1 || nu < 1 || mu > n_ || nu > n_) throw semantic_error("metric index out of range");
    if (mu > nu) std::swap(mu, nu);
    // pairs in order (1,1),(1,2),...,(1,n),(2,2),...
    int comp = 0;
    for (int r = 1; r < mu; ++r) comp += n_ - r + 1;
    return comp + (nu - mu);
}

std::pair<int, int> JetContext::metric_pair_of(int comp) const {
    for (int mu = 1; mu <= n_; ++mu) {
        int row = n_ - mu + 1;
        if (comp < row) return {mu, mu + comp};
        comp -= row;
    }
    throw semantic_error("metric component out of range");
}

int JetContext::component_of_indices(int field, const std::vector<int>& idx) const {
    const FieldDecl& f = fields_[field];
    auto need = [&](size_t k) {
        if (idx.size() != k)
            throw semantic_error("field " + f.name + " expects " + std::to_string(k) + " component indices");
    };
    switch (f.shape) {
        case FieldShape::Scalar:
            need(1);
            if (idx[0] < 1 || idx[0] > f.count) throw semantic_error("component index out of range for " + f.name);
            return idx[0] - 1;
        case FieldShape::Covector:
            need(1);
            if (idx[0] < 1 || idx[0] > n_) throw semantic_error("component index out of range for " + f.name);
            return idx[0] - 1;
        case FieldShape::GaugeCovector:
            need(2);
            if (idx[0] < 1 || idx[0] > f.count || idx[1] < 1 || idx[1] > n_)
                throw semantic_error("component index out of range for " + f.name);
            return (idx[0] - 1) * n_ + (idx[1] - 1);
        case FieldShape::MetricUpper:
            need(2);
            return metric_pair_component(idx[0], idx[1]);
    }
    throw semantic_error("unknown field shape");
}

std::vector<int> JetContext::indices_of_component(int field, int comp) const {
    const FieldDecl& f = fields_[field];
    switch (f.shape) {
        case FieldShape::Scalar:
        case FieldShape::Covector: return {comp + 1};
        case FieldShape::GaugeCovector: return {comp / n_ + 1, comp % n_ + 1};
        case FieldShape::MetricUpper: {
            auto [mu, nu] = metric_pair_of(comp);
            return {mu, nu};
        }
    }
    throw semantic_error("unknown field shape");
}

uint64_t JetContext::pack_key0(SymKind k, uint16_t ref, uint16_t comp, int order) {
    return (static_cast<uint64_t>(k) << 56) | (static_cast<uint64_t>(ref) << 40) |
           (static_cast<uint64_t>(comp) << 24) | (static_cast<uint64_t>(order) << 16);
}

uint64_t JetContext::pack_key1(const MultiIndex& alpha) {
    // complemented counts so that ascending key order matches graded-lex
    uint64_t k = 0;
    for (int i = 1; i <= alpha.dim(); ++i) k = (k << 8) | static_cast<uint64_t>(255 - alpha[i]);
    k <<= 8 * (kMaxBaseDim - alpha.dim());
    return k;
}

uint32_t JetContext::intern(SymbolData&& sd, uint64_t lookup_key) const {
    symbols_.push_back(std::move(sd));
    uint32_t id = static_cast<uint32_t>(symbols_.size() - 1);
    lookup_[lookup_key] = id;
    return id;
}

uint32_t JetContext::sym_base(int sigma) const {
    if (sigma < 1 || sigma > n_) throw semantic_error("base label x" + std::to_string(sigma) + " out of range");
    uint64_t key = pack_key0(SymKind::Base, static_cast<uint16_t>(sigma), 0, 0);
    std::lock_guard<std::mutex> lock(mutex_);
    if (auto it = lookup_.find(key); it != lookup_.end()) return it->second;
    SymbolData sd;
    sd.kind = SymKind::Base;
    sd.ref = static_cast<uint16_t>(sigma);
    sd.key0 = key;
    sd.name = "x[" + std::to_string(sigma) + "]";
    return intern(std::move(sd), key);
}

uint32_t JetContext::sym_param(int param) const {
    if (param < 0 || param >= static_cast<int>(params_.size())) throw semantic_error("parameter id out of range");
    uint64_t key = pack_key0(SymKind::Param, static_cast<uint16_t>(param), 0, 0);
    std::lock_guard<std::mutex> lock(mutex_);
    if (auto it = lookup_.find(key); it != lookup_.end()) return it->second;
    SymbolData sd;
    sd.kind = SymKind::Param;
    sd.ref = static_cast<uint16_t>(param);
    sd.invertible = params_[param].invertible;
    sd.key0 = key;
    sd.name = params_[param].name;
    return intern(std::move(sd), key);
}

uint32_t JetContext::sym_derived(int family, int comp) const {
    if (family < 0 || family >= static_cast<int>(families_.size()))
        throw semantic_error("derived family id out of range");
    const DerivedFamily& f = families_[family];
    if (comp < 0 || comp >= f.components) throw semantic_error("derived component out of range for " + f.name);
    uint64_t key = pack_key0(SymKind::Derived, static_cast<uint16_t>(family), static_cast<uint16_t>(comp), 0);
    std::lock_guard<std::mutex> lock(mutex_);
    if (auto it = lookup_.find(key); it != lookup_.end()) return it->second;
    SymbolData sd;
    sd.kind = SymKind::Derived;
    sd.ref = static_cast<uint16_t>(family);
    sd.comp = static_cast<uint16_t>(comp);
    sd.invertible = f.invertible;
    sd.key0 = key;
    if (f.index_arity == 0) {
        sd.name = f.name;
    } else if (f.index_arity == 2) {
        auto [mu, nu] = metric_pair_of(comp);
        sd.name = f.name + "[" + std::to_string(mu) + " " + std::to_string(nu) + "]";
    } else {
        // Christoffel: comp = (m-1)*npairs + pair(nu, beta), lower pair unordered
        int npairs = n_ * (n_ + 1) / 2;
        int m = comp / npairs + 1;
        auto [a, b] = metric_pair_of(comp % npairs);
        sd.name = f.name + "[" + std::to_string(m) + " " + std::to_string(a) + " " + std::to_string(b) + "]";
    }
    return intern(std::move(sd), key);
}

uint32_t JetContext::sym_jet(int field, int comp, const MultiIndex& alpha) const {
    if (field < 0 || field >= static_cast<int>(fields_.size())) throw semantic_error("field id out of range");
    const FieldDecl& f = fields_[field];
    if (comp < 0 || comp >= f.components) throw semantic_error("component out of range for field " + f.name);
    if (alpha.dim() != n_) throw semantic_error("jet multi-index dimension mismatch for field " + f.name);
    auto jet_name = [&]() {
        std::string s = f.name + "[";
        auto idx = indices_of_component(field, comp);
        for (size_t i = 0; i < idx.size(); ++i) s += (i ? " " : "") + std::to_string(idx[i]);
        if (alpha.order() > 0) s += "; " + alpha.label_str();
        return s + "]";
    };
    if (alpha.order() > max_order_)
        throw order_cap_error("jet order cap " + std::to_string(max_order_) + " exceeded by coordinate " + jet_name());
    size_t h = (static_cast<size_t>(field) * 1000003u + static_cast<size_t>(comp)) * 1000003u + alpha.hash();
    std::lock_guard<std::mutex> lock(mutex_);
    auto range = jet_lookup_.equal_range(h);
    for (auto it = range.first; it != range.second; ++it) {
        const SymbolData& sd = symbols_[it->second];
        if (sd.kind == SymKind::Jet && sd.ref == field && sd.comp == comp && sd.alpha == alpha) return it->second;
    }
    SymbolData sd;
    sd.kind = SymKind::Jet;
    sd.ref = static_cast<uint16_t>(field);
    sd.comp = static_cast<uint16_t>(comp);
    sd.alpha = alpha;
    sd.key0 = pack_key0(SymKind::Jet, sd.ref, sd.comp, alpha.order());
    sd.key1 = pack_key1(alpha);
    sd.name = jet_name();
    symbols_.push_back(std::move(sd));
    uint32_t id = static_cast<uint32_t>(symbols_.size() - 1);
    jet_lookup_.emplace(h, id);
    return id;
}

void JetContext::set_rule(uint32_t derived_sym, uint32_t coord_sym, Expr rhs) {
    if (frozen_) throw semantic_error("derived-symbol registry is frozen");
    if (sym(derived_sym).kind != SymKind::Derived) throw semantic_error("rule target is not a derived symbol");
    if (sym(coord_sym).kind == SymKind::Derived) throw semantic_error("rule source must be a coordinate");
    uint64_t key = (static_cast<uint64_t>(derived_sym) << 32) | coord_sym;
    if (rhs.is_zero()) return;
    rules_[key] = std::make_unique<Expr>(std::move(rhs));
    rule_coords_[derived_sym].push_back(coord_sym);
}

const Expr* JetContext::rule(uint32_t derived_sym, uint32_t coord_sym) const {
    uint64_t key = (static_cast<uint64_t>(derived_sym) << 32) | coord_sym;
    auto it = rules_.find(key);
    return it == rules_.end() ? nullptr : it->second.get();
}

const std::vector<uint32_t>& JetContext::rule_coords(uint32_t derived_sym) const {
    auto it = rule_coords_.find(derived_sym);
    return it == rule_coords_.end() ? empty_coords_ : it->second;
}

const Expr& JetContext::derived_total_derivative(uint32_t derived_sym, int sigma) const {
    uint64_t key = (static_cast<uint64_t>(derived_sym) << 8) | static_cast<uint64_t>(sigma);
    {
        std::lock_guard<std::mutex> lock(mutex_);
        if (auto it = dsigma_cache_.find(key); it != dsigma_cache_.end()) return *it->second;
    }
    Expr out(this);
    for (uint32_t c : rule_coords(derived_sym)) {
        const SymbolData& sd = sym(c);
        Expr shift(this);
        if (sd.kind == SymKind::Jet) {
            shift = Expr::symbol(this, sym_jet(sd.ref, sd.comp, sd.alpha.plus(sigma)));
        } else if (sd.kind == SymKind::Base) {
            if (static_cast<int>(sd.ref) == sigma) shift = Expr::constant(this, 1);
        }
        if (!shift.is_zero()) out += *rule(derived_sym, c) * shift;
    }
    std::lock_guard<std::mutex> lock(mutex_);
    auto [it, inserted] = dsigma_cache_.emplace(key, std::make_unique<Expr>(std::move(out)));
    return *it->second;
}

std::vector<uint32_t> JetContext::coordinate_closure(uint32_t root) const {
    std::vector<uint32_t> out;
    std::unordered_set<uint32_t> seen;
    std::vector<uint32_t> stack{root};
    while (!stack.empty()) {
        uint32_t s = stack.back();
        stack.pop_back();
        if (!seen.insert(s).second) continue;
        const SymbolData& sd = sym(s);
        if (sd.kind != SymKind::Derived) {
            out.push_back(s);
            continue;
        }
        for (uint32_t c : rule_coords(s)) {
            stack.push_back(c);
            for (const Term& t : rule(s, c)->terms())
                for (const Factor& f : t.mono) stack.push_back(f.sym);
        }
    }
    std::sort(out.begin(), out.end(), [&](uint32_t a, uint32_t b) { return sym_less(a, b); });
    return out;
}

QuadExt JetContext::eval_derived(uint32_t symid, const EvalPoint& pt) const {
    const SymbolData& sd = sym(symid);
    const DerivedFamily& fam = families_[sd.ref];
    int mf = fam.metric_field;
    auto metric_value = [&](int mu, int nu) {
        uint32_t s = sym_jet(mf, metric_pair_component(mu, nu), MultiIndex(n_));
        auto it = pt.values.find(s);
        if (it == pt.values.end()) throw eval_error("unbound coordinate " + sym(s).name);
        return it->second;
    };
    std::vector<Rational> u(n_ * n_);
    for (int mu = 1; mu <= n_; ++mu)
        for (int nu = 1; nu <= n_; ++nu) u[(mu - 1) * n_ + (nu - 1)] = metric_value(mu, nu);
    switch (fam.eval) {
        case DerivedEval::InverseMetric: {
            auto inv = invert_matrix(n_, u);
            auto [mu, nu] = metric_pair_of(sd.comp);
            return QuadExt(inv[(mu - 1) * n_ + (nu - 1)]);
        }
        case DerivedEval::SqrtG: {
            Rational det = det_matrix(n_, u);
            if (det == 0) throw eval_error("singular derived symbol (det g = 0)");
            Rational absdet = det < 0 ? Rational(-det) : det;
            // sqrtg = |det g_lower|^(1/2) = |det g_upper|^(-1/2)
            return QuadExt(Rational(0), Rational(1), Rational(1) / absdet);
        }
        case DerivedEval::Christoffel: {
            auto inv = invert_matrix(n_, u); // lower metric values
            auto lower = [&](int x, int y) { return inv[(x - 1) * n_ + (y - 1)]; };
            auto djet = [&](int mu, int nu, int tau) {
                uint32_t s = sym_jet(mf, metric_pair_component(mu, nu), MultiIndex::unit(n_, tau));
                auto it = pt.values.find(s);
                if (it == pt.values.end()) throw eval_error("unbound coordinate " + sym(s).name);
                return it->second;
            };
            // d_tau g_xy = - sum_{ab} l_xa l_by u^{ab}_{,tau}
            auto dlower = [&](int tau, int x, int y) {
                Rational r(0);
                for (int a = 1; a <= n_; ++a)
                    for (int b = 1; b <= n_; ++b) r -= lower(x, a) * lower(b, y) * djet(a, b, tau);
                return r;
            };
            int npairs = n_ * (n_ + 1) / 2;
            int m = sd.comp / npairs + 1;
            int c = sd.comp % npairs;
            int x = 1, y = 1;
            for (x = 1; x <= n_; ++x) {
                int row = n_ - x + 1;
                if (c < row) { y = x + c; break; }
                c -= row;
            }
            Rational r(0);
            for (int a = 1; a <= n_; ++a)
                r += u[(m - 1) * n_ + (a - 1)] * (dlower(x, y, a) - dlower(a, x, y) + dlower(y, a, x));
            return QuadExt(r / 2);
        }
    }
    throw eval_error("unknown derived evaluator");
}

QuadExt EvalPoint::value_of(uint32_t symid) const {
    if (auto it = values.find(symid); it != values.end()) return QuadExt(it->second);
    if (auto it = cache.find(symid); it != cache.end()) return it->second;
    const SymbolData& sd = ctx->sym(symid);
    if (sd.kind == SymKind::Derived) {
        QuadExt v = ctx->eval_derived(symid, *this);
        cache.emplace(symid, v);
        return v;
    }
    throw eval_error("unbound coordinate " + sd.name);
}

} // namespace jetvar
