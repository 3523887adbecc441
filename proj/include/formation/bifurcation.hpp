#pragma once

#include "formation/dynamics.hpp"
#include "formation/equilibria.hpp"
#include "formation/numkernel.hpp"

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace formation {

/// One-parameter family y' = G(y, mu) with a base point (y0, mu0). The
/// Jacobian in y at the base point may be supplied; otherwise it is taken by
/// central differences.
struct ParamFamily {
    std::function<num::Vector(const num::Vector&, double)> field;
    num::Vector y0;
    double mu0 = 0.0;
    std::function<num::Matrix()> jacobian;
};

ParamFamily logistic_family();        // y' = y (mu - y) at (0, 0)
ParamFamily saddle_node_family();     // y' = mu - y^2 at (0, 0)

/// The formation flow on the gauge slice through an equilibrium f, with mu
/// added to d at `edge` (squared units).
ParamFamily formation_family(const VectorFieldBundle& b, const Framework& f, std::size_t edge = 2);

struct SotomayorOptions {
    double h_jac = 1e-6;
    double h = 1e-4;            // second differences and d/dmu
    double tol_mu_rel = 1e-6;   // |t_mu| <= tol_mu_rel |dG/dmu|
    double tol_nondeg = 1e-6;   // |t_quad|, |t_mixed| > tol_nondeg
    double residual_tol = 1e-8;
};

struct SotomayorReport {
    bool zero_eig_unique = false;
    bool others_negative = false;
    bool degenerate = false;  // zero eigenvalue of multiplicity >= 2
    num::Vector w, v;         // unit left and right kernel vectors
    double t_mu = 0.0;
    double t_quad = 0.0;
    double t_mixed = 0.0;
    double dG_dmu_norm = 0.0;
    num::Spectrum spectrum;
    bool verdict = false;
};

/// Transcritical conditions at the base point. Throws DomainError when the
/// base point is not an equilibrium.
SotomayorReport sotomayor_check(const ParamFamily& fam, const SotomayorOptions& opts = {});

enum class Branch { design, ancillary_aligned };

std::string_view to_string(Branch b);

struct BranchPoint {
    double mu = 0.0;
    Branch branch = Branch::design;
    std::optional<Framework> framework;  // empty marks a gap
    double leading_real = 0.0;
    bool stable = false;
    num::Vector errors;
};

struct SweepOptions {
    std::size_t edge = 2;
    int max_halvings = 3;
    /// Refuse lengths outside the singular set (off for control sweeps).
    bool require_singular = true;
};

/// Design and aligned-ancillary branches over mu in [-eps, eps]. Both start
/// at the parallel design framework of d0 and are continued outwards from
/// mu = 0. Points are returned sorted by branch, then mu.
std::vector<BranchPoint> mu_sweep(const VectorFieldBundle& b0, double eps, int samples, const SweepOptions& opts = {});

enum class Detection { detected, not_detected, indeterminate };

std::string_view to_string(Detection d);

struct TranscriticalReport {
    Detection status = Detection::indeterminate;
    double crossing_design = 0.0;
    double crossing_aligned = 0.0;
    double grid_step = 0.0;
    bool design_stable_below = false;  // orientation of the exchange
    std::string reason;
};

TranscriticalReport transcritical_detect(const std::vector<BranchPoint>& points);

enum class LogisticStability { stable, unstable, degenerate };

std::string_view to_string(LogisticStability s);

struct LogisticRow {
    double mu = 0.0;
    double x = 0.0;
    LogisticStability stability = LogisticStability::degenerate;
};

/// Equilibria x = 0 and x = mu of x' = x (mu - x) on a uniform grid.
std::vector<LogisticRow> logistic_reference(double mu_min, double mu_max, int samples);

}  // namespace formation
