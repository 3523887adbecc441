#pragma once

#include "formation/graph.hpp"
#include "formation/numkernel.hpp"
#include "formation/rigidity.hpp"

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace formation {

enum class LawName { gradient_squared, gradient_plain, eq1_plain };

/// Single co-leader law u(d; |z|^2). Derivatives are taken with respect to
/// x = |z|^2 and, for `ud`, with respect to d at fixed z.
struct SingleEval {
    double u = 0.0;
    double ux = 0.0;
    double uxx = 0.0;
    double ud = 0.0;
};

/// Two co-leader law (u1, u2)(d_j, d_k; |z_j|^2, |z_k|^2, s = z_j^T z_k).
/// Suffix x, y, z follow the usual notation: derivatives in |z_j|^2, |z_k|^2 and s.
struct PairEval {
    double u1 = 0.0, u2 = 0.0;
    double u1x = 0.0, u1y = 0.0, u1z = 0.0;
    double u2x = 0.0, u2y = 0.0, u2z = 0.0;
    double u1dj = 0.0, u1dk = 0.0, u2dj = 0.0, u2dk = 0.0;
};

using SingleFn = std::function<double(double d, double n2)>;
using PairFn = std::function<std::array<double, 2>(double dj, double dk, double n2j, double n2k, double s)>;

/// A compatible feedback family. Built-ins carry analytic derivatives; custom
/// laws are differentiated by central differences.
class ControlLaw {
public:
    /// gradient_squared: u = gain (|z|^2 - d).
    /// gradient_plain:   u = gain (|z| - sqrt d).
    /// eq1_plain:        u = sign * gain (|z| - sqrt d) with sign = -1 as
    ///                   printed in the symmetric example, +1 when toggled.
    static ControlLaw builtin(LawName name, double gain = 1.0, bool toggle_sign = false);
    /// Throws ConfigError (code "unknown_law") on an unrecognised name.
    static ControlLaw builtin(std::string_view name, double gain = 1.0, bool toggle_sign = false);
    static ControlLaw custom(SingleFn single, PairFn pair, LengthConvention convention,
                             std::string name = "custom");

    SingleEval single(double d, double n2) const;
    PairEval pair(double dj, double dk, double n2j, double n2k, double s) const;

    const std::string& name() const noexcept { return name_; }
    double gain() const noexcept { return gain_; }
    /// Effective multiplier in front of the law (+1 except printed eq1_plain).
    double sign() const noexcept { return sign_; }
    bool analytic() const noexcept { return builtin_.has_value(); }
    /// Length convention the law's error term expects.
    LengthConvention convention() const noexcept { return convention_; }

private:
    ControlLaw() = default;
    std::optional<LawName> builtin_;
    std::string name_;
    double gain_ = 1.0;
    double sign_ = 1.0;
    LengthConvention convention_ = LengthConvention::squared;
    SingleFn single_fn_;
    PairFn pair_fn_;
};

std::optional<LawName> parse_law_name(std::string_view name);
std::string_view to_string(LawName name);

/// u(d; 0) = 0 and u_i(d_j, d_k; 0, 0, s) = 0 for sampled s, within tol.
bool satisfies_compatibility(const ControlLaw& law, double dj, double dk, double tol = 1e-12);

/// Graph + law + lengths. Immutable; every evaluator is pure.
class VectorFieldBundle {
public:
    /// Throws ConfigError (code "convention_mismatch") when the law's error
    /// convention differs from the lengths' tag, DimensionError on a size clash.
    VectorFieldBundle(FormationGraph graph, ControlLaw law, TargetLengths lengths);

    const FormationGraph& graph() const noexcept { return graph_; }
    const ControlLaw& law() const noexcept { return law_; }
    const TargetLengths& lengths() const noexcept { return lengths_; }
    const AdjacencyBundle& adjacency() const noexcept { return adj_; }

    VectorFieldBundle with_lengths(TargetLengths d) const;

    /// Edge coefficients U_k (length m) for stacked edge vectors z.
    num::Vector coefficients(const num::Vector& z) const;

    num::Vector F_x(const num::Vector& x) const;
    /// z-dynamics; rejects z off the cycle constraints by more than 1e-6.
    num::Vector F_z(const num::Vector& z) const;
    num::Vector F_z_unchecked(const num::Vector& z) const;

    /// Analytic dF_x/dx, valid at every state.
    num::Matrix jacobian_x(const num::Vector& x) const;
    /// Analytic dF_x/dd (2n x m), valid at every state.
    num::Matrix jacobian_x_d(const num::Vector& x) const;

    num::VectorMap field_x() const;
    num::VectorMap field_z() const;

    /// Residual of the cycle constraints (largest cokernel component).
    double cycle_violation(const num::Vector& z) const;

    /// Partner edge of i (other edge leaving its origin), if any.
    std::optional<std::size_t> partner(std::size_t i) const { return partner_[i]; }
    /// True when edge i is the first of its origin's two outgoing edges.
    bool is_first(std::size_t i) const { return first_[i]; }

private:
    struct EdgeTerms;
    std::vector<EdgeTerms> edge_terms(const num::Vector& z) const;
    num::Matrix edge_block_jacobian(const num::Vector& z) const;

    FormationGraph graph_;
    ControlLaw law_;
    TargetLengths lengths_;
    AdjacencyBundle adj_;
    std::vector<num::Vector> cokernel_;
    std::vector<std::optional<std::size_t>> partner_;
    std::vector<bool> first_;
};

num::Vector eval_F_x(const VectorFieldBundle& b, const num::Vector& x);
num::Vector eval_F_z(const VectorFieldBundle& b, const num::Vector& z);

struct JacobianBundle {
    std::vector<Vec2> zprime;
    std::vector<Vec2> zdprime;
    num::Matrix dFdz;       // 2m x 2m
    num::Matrix dFdd;       // 2m x m
    num::Matrix J_reduced;  // m x m
};

/// z'_i = 2 u_x z_i for a single co-leader; for a pair (j, k) leaving one
/// vertex, z'_j = 2(u1x z_j + u2x z_k) and z'_k = 2(u1y z_j + u2y z_k).
std::vector<Vec2> zprime_vectors(const VectorFieldBundle& b, const num::Vector& z);

/// z''_l = sum over edges k leaving the origin of l of z_k dU_k/dd_l, the
/// derivative taken at fixed z.
std::vector<Vec2> zdprime_vectors(const VectorFieldBundle& b, const num::Vector& z);

/// A_e^(2) D(z')^T D(z). Throws DomainError away from design equilibria,
/// where the dropped u I and u_z terms do not vanish.
num::Matrix jacobian_z(const VectorFieldBundle& b, const num::Vector& z);

/// A_e^(2) D(z'')^T, same domain as jacobian_z.
num::Matrix jacobian_d(const VectorFieldBundle& b, const num::Vector& z);

/// D(z) A_e^(2) D(z')^T, the m x m matrix carrying the nonzero spectrum.
num::Matrix reduced_J(const VectorFieldBundle& b, const num::Vector& z);

JacobianBundle jacobian_bundle(const VectorFieldBundle& b, const num::Vector& z);

/// Largest |U_k| relative to its natural scale; zero at design equilibria.
double design_defect(const VectorFieldBundle& b, const num::Vector& z);

}  // namespace formation
