#pragma once

#include "formation/dynamics.hpp"
#include "formation/numkernel.hpp"
#include "formation/rigidity.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace formation {

enum class EquilibriumKind { design, ancillary_aligned, ancillary_collinear, ancillary_other };

std::string_view to_string(EquilibriumKind k);

struct EquilibriumRecord {
    Framework framework;          // canonical gauge
    EquilibriumKind kind = EquilibriumKind::ancillary_other;
    num::Spectrum spectrum_gauge;  // 2n - 3 values (2n - 2 when all agents coincide)
    int index = 0;                 // -1 or +1; 0 when not hyperbolic
    bool stable = false;
    bool hyperbolic = false;
    double residual = 0.0;         // |F_x|_inf
    num::Vector errors;            // e_i in the bundle's convention
    std::size_t structural_zeros = 0;  // zeros of the full 2n spectrum
};

struct CensusOptions {
    std::size_t n_random = 200;
    std::size_t n_collinear = 24;
    int aligned_grid = 16;
    double dedupe_tol = 1e-6;
    double residual_tol = 1e-9;
    double preflow_time = 20.0;
    double preflow_step = 2e-3;
    std::uint64_t seed = 1;
};

struct CensusReport {
    std::vector<EquilibriumRecord> records;
    bool feasible = false;
    bool almost_surely_stable = false;
    int index_sum = 0;
    std::size_t seeds_tried = 0;
    std::size_t seeds_failed = 0;
};

/// Translate the origin of edge 0 to the origin and rotate its target onto
/// +x. When that edge is degenerate the first agent away from the anchor is
/// used instead; coincident agents leave the rotation untouched.
num::Vector canonical_gauge(const FormationGraph& g, const num::Vector& x);

/// Largest coordinate difference after bringing both to canonical gauge.
double gauge_distance(const FormationGraph& g, const num::Vector& a, const num::Vector& b);

/// Slice through a canonical-gauge state: the anchor agent is pinned at the
/// origin and the axis agent on the +x axis.
struct GaugeSlice {
    FormationGraph graph;
    num::Vector base;  // canonical positions
    std::size_t anchor = 0;
    std::size_t axis = 0;
    bool has_rotation = true;
    std::vector<std::size_t> free;  // indices of the free coordinates

    GaugeSlice(const FormationGraph& g, const num::Vector& x);
    std::size_t dim() const noexcept { return free.size(); }
    num::Vector coordinates() const;
    num::Vector embed(const num::Vector& y) const;
    /// Removes the translation and rotation velocity that keeps the state on
    /// the slice, then restricts to the free coordinates.
    num::Vector project(const num::Vector& x, const num::Vector& v) const;
};

/// Vector field of the flow restricted to the slice.
num::Vector slice_field(const VectorFieldBundle& b, const GaugeSlice& s, const num::Vector& y);

/// Jacobian of slice_field at the slice base point; exact at equilibria.
num::Matrix gauge_jacobian(const VectorFieldBundle& b, const GaugeSlice& s);

/// Design frameworks of the 2-cycles in canonical gauge (four sign choices).
std::vector<Framework> design_frameworks(const FormationGraph& g, const TargetLengths& d);

/// Throws DomainError when |F_x|_inf exceeds tol at f.
void require_equilibrium(const VectorFieldBundle& b, const Framework& f, double tol = 1e-9);

num::Spectrum gauge_fixed_spectrum(const VectorFieldBundle& b, const Framework& f);

/// Sign of the gauge Jacobian determinant. Throws SingularityError when an
/// eigenvalue real part lies within tol_zero of zero.
int poincare_index(const VectorFieldBundle& b, const Framework& f);

/// Relative cutoff (times the spectral radius) separating zero eigenvalues.
inline constexpr double kTolZero = 1e-6;

EquilibriumKind classify_kind(const VectorFieldBundle& b, const Framework& f);

/// Full classification. Throws DomainError when f is not an equilibrium.
EquilibriumRecord classify(const VectorFieldBundle& b, const Framework& f, double residual_tol = 1e-9);

/// Aligned ancillary solutions are parameterised by the directions of z_2 and
/// z_4 about x_3, with x_1 at the origin and x_3 on +x.
struct AlignedSolution {
    EquilibriumRecord record;
    std::array<double, 2> angles{};
};

/// Angles of a 2-cycles framework in the aligned parameterisation.
std::array<double, 2> aligned_angles(const Framework& f);

/// Newton solve of e_2 = e_3 = e_4 = 0, z_1 x z_5 = 0 and the force balance at
/// agent 1 from one angle seed. Empty when Newton fails or verification does.
std::optional<AlignedSolution> solve_aligned_from(const VectorFieldBundle& b, std::array<double, 2> angles);

/// All distinct aligned solutions reached from a grid x grid seed lattice.
std::vector<EquilibriumRecord> solve_ancillary_aligned(const VectorFieldBundle& b, int grid = 16);

/// Seeds (design, aligned, collinear, random), polish, dedupe, classify.
/// Parallel over seeds when OpenMP is available; the result does not depend
/// on the thread count.
CensusReport census(const VectorFieldBundle& b, const CensusOptions& opts = {});

/// Same algorithm on a single thread. Kept as the reference implementation.
CensusReport census_serial(const VectorFieldBundle& b, const CensusOptions& opts = {});

/// Scalar systems x' = f(x), as in the one-dimensional stabilisability example.
struct ScalarEquilibrium {
    double x = 0.0;
    double slope = 0.0;
    bool stable = false;
    bool design = false;
    int index = 0;
};

struct ScalarCensus {
    std::vector<ScalarEquilibrium> equilibria;  // ascending x
    bool feasible = false;
    bool almost_surely_stable = false;
    int index_sum = 0;
};

ScalarCensus scalar_census(const std::function<double(double)>& f, const std::vector<double>& design,
                           double lo, double hi, int seeds = 101);

/// Published spectrum used by identify_convention.
struct ReferenceSpectrum {
    std::string name;
    bool design = true;
    std::vector<num::Complex> values;
};

/// Optimal eigenvalue pairing (minimises the largest deviation). Returns the
/// per-reference-value deviations in the order of `reference`, or an empty
/// vector when the sizes differ.
std::vector<double> match_spectrum(const num::Spectrum& s, const std::vector<num::Complex>& reference);

struct SpectrumMatch {
    std::string name;
    std::optional<EquilibriumRecord> record;
    std::vector<double> deviations;
    double max_dev = 0.0;
    bool qualitative = false;  // same count of unstable eigenvalues, hyperbolic
};

struct ConventionCandidate {
    std::string name;
    std::string law;
    bool swap45 = false;
    TargetLengths lengths;
    std::vector<SpectrumMatch> matches;
    double score = 0.0;  // worst deviation over all reference tuples
    bool quantitative = false;
    bool qualitative = false;
};

struct ConventionReport {
    std::vector<ConventionCandidate> candidates;
    std::size_t best = 0;
    double tolerance = 0.15;
    const ConventionCandidate& best_candidate() const { return candidates.at(best); }
};

/// Tries each built-in law, both readings of the length units, and both
/// labellings of edges 4 and 5; scores gauge spectra at design and aligned
/// equilibria against the reference tuples.
ConventionReport identify_convention(const num::Vector& d_plain, const std::vector<ReferenceSpectrum>& reference,
                                     double tolerance = 0.15);

}  // namespace formation
