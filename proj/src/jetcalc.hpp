#pragma once

#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "expr.hpp"

namespace jetvar {

using FieldComp = std::pair<int, int>;                       ///< (field id, flat component)
using CompTable = std::map<FieldComp, Expr>;                 ///< per field component
using JetTable = std::map<std::tuple<int, int, MultiIndex>, Expr>; ///< per (field, comp, alpha)

/// A projectable / vertical / gauge-natural symmetry generator: base
/// components xi^sigma and fiber components Xi^i as expressions in fields
/// and abstract generator parameters (parameter fields of the context).
struct GeneratorSpec {
    enum class Kind { Projectable, Vertical, GaugeNaturalLift };

    const JetContext* ctx = nullptr;
    Kind kind = Kind::Projectable;
    std::string name;
    std::vector<Expr> xi;  ///< n base components
    CompTable Xi;          ///< fiber components; absent entries are zero
    std::vector<int> parameter_fields; ///< context field ids carrying abstract parameters

    Expr xi_comp(int sigma) const;       ///< 1-based
    Expr Xi_comp(int field, int comp) const;
    bool is_vertical() const;

    /// Checks the declared-kind invariants (vertical: xi = 0;
    /// gauge-natural: components linear homogeneous in the parameters).
    void validate() const;
};

/// Zero generator over a context.
GeneratorSpec zero_generator(const JetContext* ctx);

/// Lagrangian density L * omega of declared jet order s.
struct Density {
    Expr L;
    int order = 0;
};

Density make_density(Expr L);
Density make_density(Expr L, int declared_order);

/// (n-1)-form coefficients: eps = eps^sigma omega_sigma with
/// omega_sigma = d/dx^sigma  |  omega and d_H(eps^sigma omega_sigma) = (D_sigma eps^sigma) omega.
struct Current {
    std::vector<Expr> comps; ///< n entries
    Expr divergence() const; ///< D_sigma eps^sigma
};

Current zero_current(const JetContext* ctx);

/// (Xi_V)^i = Xi^i - y^i_sigma xi^sigma, per field component.
CompTable vertical_part(const GeneratorSpec& g);
Expr vertical_part_component(const GeneratorSpec& g, int field, int comp);

/// Vertical prolongation components D_alpha (Xi_V)^i for |alpha| <= s.
/// The horizontal part stays as the xi^sigma for contraction with D_sigma.
JetTable prolong_generator(const GeneratorSpec& g, int s);

/// Lie derivative of a density:
///   L_g lambda = sum_{i,alpha} D_alpha((Xi_V)^i) dL/dy^i_alpha + D_sigma(xi^sigma L).
/// Vanishing certifies g is a symmetry of lambda.
Density lie_derivative_density(const Density& lambda, const GeneratorSpec& g);

/// Coordinate Lie derivative of a section: (L_g gamma)^i = xi^sigma d_sigma gamma^i - Xi^i(gamma).
/// gamma components must depend on base coordinates (and constants) only.
CompTable lie_derivative_section(const CompTable& gamma, const GeneratorSpec& g);

} // namespace jetvar
