#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "multiindex.hpp"
#include "rational.hpp"

namespace jetvar {

class Expr;
struct EvalPoint;

enum class SymKind : uint8_t { Base = 0, Param = 1, Jet = 2, Derived = 3 };

/// Index structure of a declared field; fixes the flat component layout.
enum class FieldShape : uint8_t {
    Scalar,        ///< k components, index [i]
    Covector,      ///< n components, index [mu]
    GaugeCovector, ///< g*n components, index [a mu]
    MetricUpper,   ///< n(n+1)/2 components, unordered index [mu nu]
};

struct FieldDecl {
    std::string name;
    FieldShape shape = FieldShape::Scalar;
    int count = 1; ///< multiplet size (Scalar) or gauge dimension (GaugeCovector)
    bool parameter = false; ///< generator-parameter field of an extended context
    int components = 1;
};

struct ParamDecl {
    std::string name;
    bool invertible = false;
};

enum class DerivedEval : uint8_t { InverseMetric, SqrtG, Christoffel };

struct DerivedFamily {
    std::string name;
    int components = 1;
    DerivedEval eval = DerivedEval::SqrtG;
    int metric_field = -1;
    bool invertible = false;
    int index_arity = 0; ///< rendered index count (0 sqrtg, 2 ginv, 3 Gamma)
};

struct SymbolData {
    SymKind kind;
    uint16_t ref = 0;  ///< base label / param id / field id / family id
    uint16_t comp = 0; ///< flat component (Jet, Derived)
    MultiIndex alpha;  ///< Jet only
    bool invertible = false;
    uint64_t key0 = 0, key1 = 0; ///< structural sort key
    std::string name;            ///< canonical rendering
};

/// The chart: base dimension, declared fields, jet-order cap, symbolic
/// constants and the derived-quantity registry. Symbols are interned lazily;
/// the derived registry is frozen after model construction.
class JetContext {
public:
    static std::shared_ptr<JetContext> create(int n, int max_order);

    int n() const { return n_; }
    int max_order() const { return max_order_; }

    int add_field(const std::string& name, FieldShape shape, int count = 1, bool parameter = false);
    int add_param(const std::string& name, bool invertible = false);
    int add_derived_family(const std::string& name, int components, DerivedEval eval, int metric_field,
                           bool invertible, int index_arity);
    void set_rule(uint32_t derived_sym, uint32_t coord_sym, Expr rhs);
    void freeze() { frozen_ = true; }
    bool frozen() const { return frozen_; }

    const std::vector<FieldDecl>& fields() const { return fields_; }
    const std::vector<ParamDecl>& params() const { return params_; }
    const std::vector<DerivedFamily>& derived_families() const { return families_; }
    int field_id(const std::string& name) const;      ///< -1 if absent
    int param_id(const std::string& name) const;      ///< -1 if absent
    int derived_family_id(const std::string& name) const; ///< -1 if absent

    // component layout helpers
    int field_components(int field) const { return fields_[field].components; }
    int component_of_indices(int field, const std::vector<int>& idx) const;
    std::vector<int> indices_of_component(int field, int comp) const;
    int metric_pair_component(int mu, int nu) const; ///< unordered pair -> 0-based comp
    std::pair<int, int> metric_pair_of(int comp) const;

    // symbol interning (thread-safe); jet interning enforces the order cap
    uint32_t sym_base(int sigma) const;
    uint32_t sym_param(int param) const;
    uint32_t sym_jet(int field, int comp, const MultiIndex& alpha) const;
    uint32_t sym_derived(int family, int comp) const;

    const SymbolData& sym(uint32_t id) const { return symbols_[id]; }
    size_t symbol_count() const { return symbols_.size(); }

    bool sym_less(uint32_t a, uint32_t b) const {
        const SymbolData &sa = symbols_[a], &sb = symbols_[b];
        return sa.key0 != sb.key0 ? sa.key0 < sb.key0 : sa.key1 < sb.key1;
    }

    /// Differentiation rule d(derived)/d(coord); zero expr if none registered.
    const Expr* rule(uint32_t derived_sym, uint32_t coord_sym) const;
    const std::vector<uint32_t>& rule_coords(uint32_t derived_sym) const;

    /// D_sigma of a derived symbol, expanded through its rules (cached).
    const Expr& derived_total_derivative(uint32_t derived_sym, int sigma) const;

    /// All Base/Param/Jet coordinates a symbol's value depends on, following
    /// derived rules and evaluator dependencies transitively.
    std::vector<uint32_t> coordinate_closure(uint32_t sym) const;

    QuadExt eval_derived(uint32_t sym, const EvalPoint& pt) const;

private:
    JetContext(int n, int max_order);
    uint32_t intern(SymbolData&& sd, uint64_t lookup_key) const;
    static uint64_t pack_key0(SymKind k, uint16_t ref, uint16_t comp, int order);
    static uint64_t pack_key1(const MultiIndex& alpha);

    int n_;
    int max_order_;
    bool frozen_ = false;
    std::vector<FieldDecl> fields_;
    std::vector<ParamDecl> params_;
    std::vector<DerivedFamily> families_;

    mutable std::mutex mutex_;
    mutable std::vector<SymbolData> symbols_;
    mutable std::unordered_map<uint64_t, uint32_t> lookup_;
    mutable std::unordered_map<size_t, uint32_t> jet_lookup_;

    std::unordered_map<uint64_t, std::unique_ptr<Expr>> rules_;
    std::unordered_map<uint32_t, std::vector<uint32_t>> rule_coords_;
    mutable std::unordered_map<uint64_t, std::unique_ptr<Expr>> dsigma_cache_;
    std::vector<uint32_t> empty_coords_;
};

/// Point assignment for numeric evaluation. Values are exact rationals;
/// derived symbols evaluate into Q(sqrt d) where needed.
struct EvalPoint {
    const JetContext* ctx = nullptr;
    std::unordered_map<uint32_t, Rational> values;
    mutable std::unordered_map<uint32_t, QuadExt> cache;

    void bind(uint32_t sym, Rational v) { values[sym] = std::move(v); }
    QuadExt value_of(uint32_t sym) const;
};

} // namespace jetvar
