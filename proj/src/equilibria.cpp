#include "formation/equilibria.hpp"

#include "formation/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <tuple>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace formation {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct GaugePair {
    std::size_t anchor = 0;
    std::size_t axis = 0;
    bool has_rotation = false;
};

GaugePair gauge_pair(const FormationGraph& g, const num::Vector& x) {
    GaugePair p;
    if (g.m() > 0) {
        p.anchor = g.edge(0).origin;
        p.axis = g.edge(0).target;
    } else {
        p.axis = g.n() > 1 ? 1 : 0;
    }
    const auto dist = [&](std::size_t i) {
        return std::hypot(x[2 * i] - x[2 * p.anchor], x[2 * i + 1] - x[2 * p.anchor + 1]);
    };
    double scale = 1.0;
    for (std::size_t i = 0; i < g.n(); ++i) scale = std::max(scale, dist(i));
    const double eps = 1e-12 * scale;
    if (p.axis != p.anchor && dist(p.axis) > eps) {
        p.has_rotation = true;
        return p;
    }
    for (std::size_t i = 0; i < g.n(); ++i) {
        if (i != p.anchor && dist(i) > eps) {
            p.axis = i;
            p.has_rotation = true;
            return p;
        }
    }
    return p;
}

num::Vector to_gauge(const num::Vector& x, const GaugePair& p) {
    const std::size_t n = x.size() / 2;
    const double ox = x[2 * p.anchor], oy = x[2 * p.anchor + 1];
    double c = 1.0, s = 0.0;
    if (p.has_rotation) {
        const double ax = x[2 * p.axis] - ox, ay = x[2 * p.axis + 1] - oy;
        const double r = std::hypot(ax, ay);
        c = ax / r;
        s = ay / r;
    }
    num::Vector out(x.size());
    for (std::size_t i = 0; i < n; ++i) {
        const double px = x[2 * i] - ox, py = x[2 * i + 1] - oy;
        out[2 * i] = c * px + s * py;
        out[2 * i + 1] = -s * px + c * py;
    }
    out[2 * p.anchor] = 0.0;
    out[2 * p.anchor + 1] = 0.0;
    if (p.has_rotation) out[2 * p.axis + 1] = 0.0;
    return out;
}

double length_scale(const TargetLengths& d) {
    double s = 1.0;
    for (double v : d.values()) s = std::max(s, std::sqrt(v));
    return s;
}

double leading_real(const num::Spectrum& s) { return s.values.empty() ? 0.0 : s.max_real(); }

void require_two_cycles(const FormationGraph& g, const char* what) {
    if (!g.is_two_cycles()) throw ConfigError(std::string(what) + " is defined for the 2-cycles graph", "unsupported_graph");
}

}  // namespace

std::string_view to_string(EquilibriumKind k) {
    switch (k) {
        case EquilibriumKind::design: return "design";
        case EquilibriumKind::ancillary_aligned: return "ancillary_aligned";
        case EquilibriumKind::ancillary_collinear: return "ancillary_collinear";
        case EquilibriumKind::ancillary_other: return "ancillary_other";
    }
    return "unknown";
}

num::Vector canonical_gauge(const FormationGraph& g, const num::Vector& x) {
    if (x.size() != 2 * g.n()) throw DimensionError("position vector length mismatch");
    return to_gauge(x, gauge_pair(g, x));
}

double gauge_distance(const FormationGraph& g, const num::Vector& a, const num::Vector& b) {
    const num::Vector ca = canonical_gauge(g, a);
    const num::Vector cb = canonical_gauge(g, b);
    double d = 0.0;
    for (std::size_t i = 0; i < ca.size(); ++i) d = std::max(d, std::abs(ca[i] - cb[i]));
    return d;
}

GaugeSlice::GaugeSlice(const FormationGraph& g, const num::Vector& x) : graph(g) {
    if (x.size() != 2 * g.n()) throw DimensionError("position vector length mismatch");
    const GaugePair p = gauge_pair(g, x);
    anchor = p.anchor;
    axis = p.axis;
    has_rotation = p.has_rotation;
    base = to_gauge(x, p);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i / 2 == anchor) continue;
        if (has_rotation && i == 2 * axis + 1) continue;
        free.push_back(i);
    }
}

num::Vector GaugeSlice::coordinates() const {
    num::Vector y(free.size());
    for (std::size_t k = 0; k < free.size(); ++k) y[k] = base[free[k]];
    return y;
}

num::Vector GaugeSlice::embed(const num::Vector& y) const {
    if (y.size() != free.size()) throw DimensionError("slice coordinate length mismatch");
    num::Vector x = base;
    for (std::size_t k = 0; k < free.size(); ++k) x[free[k]] = y[k];
    return x;
}

num::Vector GaugeSlice::project(const num::Vector& x, const num::Vector& v) const {
    const std::size_t n = x.size() / 2;
    const double vax = v[2 * anchor], vay = v[2 * anchor + 1];
    double omega = 0.0;
    if (has_rotation) omega = (v[2 * axis + 1] - vay) / (x[2 * axis] - x[2 * anchor]);
    num::Vector red(x.size());
    for (std::size_t i = 0; i < n; ++i) {
        const double px = x[2 * i] - x[2 * anchor], py = x[2 * i + 1] - x[2 * anchor + 1];
        red[2 * i] = v[2 * i] - vax + omega * py;
        red[2 * i + 1] = v[2 * i + 1] - vay - omega * px;
    }
    num::Vector out(free.size());
    for (std::size_t k = 0; k < free.size(); ++k) out[k] = red[free[k]];
    return out;
}

num::Vector slice_field(const VectorFieldBundle& b, const GaugeSlice& s, const num::Vector& y) {
    const num::Vector x = s.embed(y);
    return s.project(x, b.F_x(x));
}

num::Matrix gauge_jacobian(const VectorFieldBundle& b, const GaugeSlice& s) {
    const num::Matrix j = b.jacobian_x(s.base);
    num::Matrix out(s.dim(), s.dim());
    for (std::size_t c = 0; c < s.dim(); ++c) {
        const num::Vector col = s.project(s.base, j.col(s.free[c]));
        for (std::size_t r = 0; r < s.dim(); ++r) out(r, c) = col[r];
    }
    return out;
}

std::vector<Framework> design_frameworks(const FormationGraph& g, const TargetLengths& d) {
    require_two_cycles(g, "design_frameworks");
    std::vector<Framework> out = realize_two_cycles(d);
    for (const Framework& f : out) {
        const num::Vector e = edge_errors(f, d.with_convention(LengthConvention::squared));
        if (num::norm_inf(e) > 1e-12 * std::max(1.0, num::norm_inf(d.values())))
            throw DomainError("design framework fails its own lengths");
    }
    return out;
}

void require_equilibrium(const VectorFieldBundle& b, const Framework& f, double tol) {
    const double r = num::norm_inf(b.F_x(f.x()));
    if (!(r <= tol))
        throw DomainError("not an equilibrium: |F_x| = " + std::to_string(r) + " exceeds " + std::to_string(tol));
}

num::Spectrum gauge_fixed_spectrum(const VectorFieldBundle& b, const Framework& f) {
    require_equilibrium(b, f);
    return num::eigenvalues(gauge_jacobian(b, GaugeSlice(f.graph(), f.x())));
}

namespace {

bool hyperbolic(const num::Spectrum& s) {
    const double rho = s.spectral_radius();
    if (!(rho > 0.0)) return false;
    return std::all_of(s.values.begin(), s.values.end(),
                       [&](const num::Complex& v) { return std::abs(v.real()) > kTolZero * rho; });
}

int det_sign(const num::Matrix& j) {
    const double d = num::determinant(j);
    return d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
}

}  // namespace

int poincare_index(const VectorFieldBundle& b, const Framework& f) {
    require_equilibrium(b, f);
    const num::Matrix j = gauge_jacobian(b, GaugeSlice(f.graph(), f.x()));
    if (!hyperbolic(num::eigenvalues(j)))
        throw SingularityError("gauge Jacobian has an eigenvalue on the imaginary axis");
    return det_sign(j);
}

EquilibriumKind classify_kind(const VectorFieldBundle& b, const Framework& f) {
    const num::Vector e = edge_errors(f, b.lengths());
    if (num::norm_inf(e) <= 1e-8) return EquilibriumKind::design;

    const std::size_t n = f.graph().n();
    num::Matrix pts(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
        pts(i, 0) = f.x()[2 * i] - f.x()[0];
        pts(i, 1) = f.x()[2 * i + 1] - f.x()[1];
    }
    const num::Vector sv = num::singular_values(pts);
    if (sv[0] == 0.0 || sv[1] <= 1e-8 * sv[0]) return EquilibriumKind::ancillary_collinear;

    if (f.graph().is_two_cycles()) {
        const EdgeVectors ev = edge_vectors(f);
        const double n1 = std::sqrt(dot2(ev.z[0], ev.z[0])), n5 = std::sqrt(dot2(ev.z[4], ev.z[4]));
        const bool rest = std::abs(e[1]) <= 1e-8 && std::abs(e[2]) <= 1e-8 && std::abs(e[3]) <= 1e-8;
        if (rest && std::abs(cross2(ev.z[0], ev.z[4])) <= 1e-8 * n1 * n5) return EquilibriumKind::ancillary_aligned;
    }
    return EquilibriumKind::ancillary_other;
}

EquilibriumRecord classify(const VectorFieldBundle& b, const Framework& f, double residual_tol) {
    const double res = num::norm_inf(b.F_x(f.x()));
    if (!(res <= residual_tol))
        throw DomainError("not an equilibrium: |F_x| = " + std::to_string(res));
    const GaugeSlice slice(f.graph(), f.x());
    Framework canon(f.graph(), slice.base);
    const num::Matrix j = gauge_jacobian(b, slice);

    EquilibriumRecord r{canon, classify_kind(b, canon), num::eigenvalues(j), 0, false, false, 0.0, {}, 0};
    r.residual = num::norm_inf(b.F_x(canon.x()));
    r.errors = edge_errors(canon, b.lengths());
    r.hyperbolic = hyperbolic(r.spectrum_gauge);
    const double tol0 = kTolZero * r.spectrum_gauge.spectral_radius();
    r.stable = r.hyperbolic && r.spectrum_gauge.max_real() < -tol0;
    r.index = r.hyperbolic ? det_sign(j) : 0;

    const num::Spectrum full = num::eigenvalues(b.jacobian_x(canon.x()));
    const double tol_full = kTolZero * full.spectral_radius();
    r.structural_zeros = static_cast<std::size_t>(std::count_if(
        full.values.begin(), full.values.end(), [&](const num::Complex& v) { return std::abs(v) <= tol_full; }));
    return r;
}

// Aligned ancillary equilibria.

namespace {

num::Vector aligned_positions(const num::Vector& r, const std::array<double, 2>& th) {
    const double x3 = r[2];
    return {0.0,
            0.0,
            x3 + r[1] * std::cos(th[0]),
            r[1] * std::sin(th[0]),
            x3,
            0.0,
            x3 + r[3] * std::cos(th[1]),
            r[3] * std::sin(th[1])};
}

}  // namespace

std::array<double, 2> aligned_angles(const Framework& f) {
    require_two_cycles(f.graph(), "aligned_angles");
    const Vec2 x1 = f.point(0), x3 = f.point(2);
    const double phi = std::atan2(x3[1] - x1[1], x3[0] - x1[0]);
    const double c = std::cos(phi), s = std::sin(phi);
    const auto rel = [&](std::size_t i) {
        const Vec2 p = f.point(i);
        const double px = p[0] - x3[0], py = p[1] - x3[1];
        return std::atan2(-s * px + c * py, c * px + s * py);
    };
    return {rel(1), rel(3)};
}

std::optional<AlignedSolution> solve_aligned_from(const VectorFieldBundle& b, std::array<double, 2> angles) {
    require_two_cycles(b.graph(), "solve_aligned_from");
    const num::Vector r = b.lengths().plain_values();
    const double scale2 = length_scale(b.lengths()) * length_scale(b.lengths());
    const auto residual = [&](const num::Vector& th) {
        const num::Vector x = aligned_positions(r, {th[0], th[1]});
        const num::Vector v = b.F_x(x);
        const Vec2 z1{x[2], x[3]}, z5{x[6], x[7]};
        const Vec2& n = dot2(z1, z1) >= dot2(z5, z5) ? z1 : z5;
        const double nn = std::max(std::sqrt(dot2(n, n)), 1e-300);
        return num::Vector{cross2(z1, z5) / scale2, (v[0] * n[0] + v[1] * n[1]) / nn};
    };
    num::NewtonOptions opts;
    opts.max_iter = 50;
    opts.tol = 1e-13;
    num::Vector th{angles[0], angles[1]};
    try {
        th = num::newton_root(residual, th, opts).x;
    } catch (const ConvergenceError& e) {
        if (e.last_iterate().size() != 2) return std::nullopt;
        th = e.last_iterate();
    }
    if (!std::isfinite(th[0]) || !std::isfinite(th[1])) return std::nullopt;
    const num::Vector x = aligned_positions(r, {th[0], th[1]});
    const Vec2 z1{x[2], x[3]}, z5{x[6], x[7]};
    const double tiny = 1e-9 * std::sqrt(scale2);
    if (std::sqrt(dot2(z1, z1)) <= tiny || std::sqrt(dot2(z5, z5)) <= tiny) return std::nullopt;
    if (!(num::norm_inf(b.F_x(x)) <= 1e-9)) return std::nullopt;
    const auto wrap = [](double a) { return std::remainder(a, 2.0 * kPi); };
    AlignedSolution out{classify(b, Framework(b.graph(), x)), {wrap(th[0]), wrap(th[1])}};
    const EdgeVectors ev = edge_vectors(out.record.framework);
    const double c = std::abs(cross2(ev.z[0], ev.z[4]));
    if (c > 1e-8 * std::sqrt(dot2(ev.z[0], ev.z[0]) * dot2(ev.z[4], ev.z[4]))) return std::nullopt;
    return out;
}

namespace {

// Deterministic ordering: kind, leading real part (to 1e-6), then positions.
bool record_less(const EquilibriumRecord& a, const EquilibriumRecord& b) {
    const auto key = [](const EquilibriumRecord& r) {
        return std::make_tuple(static_cast<int>(r.kind), std::llround(leading_real(r.spectrum_gauge) * 1e6));
    };
    if (key(a) != key(b)) return key(a) < key(b);
    return std::lexicographical_compare(a.framework.x().begin(), a.framework.x().end(), b.framework.x().begin(),
                                        b.framework.x().end());
}

}  // namespace

std::vector<EquilibriumRecord> solve_ancillary_aligned(const VectorFieldBundle& b, int grid) {
    require_two_cycles(b.graph(), "solve_ancillary_aligned");
    if (grid < 1) throw ConfigError("aligned seed grid must be positive");
    const double tol = 1e-6 * length_scale(b.lengths());
    std::vector<EquilibriumRecord> out;
    for (int i = 0; i < grid; ++i) {
        for (int j = 0; j < grid; ++j) {
            const double t2 = 2.0 * kPi * (i + 0.5) / grid - kPi;
            const double t4 = 2.0 * kPi * (j + 0.5) / grid - kPi;
            auto sol = solve_aligned_from(b, {t2, t4});
            if (!sol) continue;
            const bool seen = std::any_of(out.begin(), out.end(), [&](const EquilibriumRecord& r) {
                return gauge_distance(b.graph(), r.framework.x(), sol->record.framework.x()) <= tol;
            });
            if (!seen) out.push_back(std::move(sol->record));
        }
    }
    std::sort(out.begin(), out.end(), record_less);
    return out;
}

// Census.

namespace {

struct Seed {
    num::Vector x;
    bool preflow = false;
};

std::optional<num::Vector> polish(const VectorFieldBundle& b, num::Vector x, double tol) {
    num::NewtonOptions opts;
    opts.max_iter = 80;
    opts.tol = 1e-13;
    opts.jacobian = [&b](const num::Vector& v) { return b.jacobian_x(v); };
    const auto f = [&b](const num::Vector& v) { return b.F_x(v); };
    try {
        x = num::newton_root(f, std::move(x), opts).x;
    } catch (const ConvergenceError& e) {
        x = e.last_iterate();
    } catch (const Error&) {
        return std::nullopt;
    }
    if (x.empty() || !std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); }))
        return std::nullopt;
    if (!(num::norm_inf(b.F_x(x)) <= tol)) return std::nullopt;
    return x;
}

std::optional<num::Vector> process_seed(const VectorFieldBundle& b, const Seed& s, const CensusOptions& opts) {
    num::Vector x = s.x;
    if (s.preflow) {
        num::OdeOptions ode;
        ode.step = opts.preflow_step;
        ode.sample_every = std::numeric_limits<std::size_t>::max();
        const auto f = b.field_x();
        std::size_t k = 0;
        ode.stop = [&](double, const num::Vector& v) { return (++k % 64 == 0) && num::norm_inf(f(v)) <= 1e-8; };
        try {
            x = num::integrate_ode(f, x, opts.preflow_time, ode).final_state();
        } catch (const Error&) {
            return std::nullopt;
        }
    }
    return polish(b, std::move(x), opts.residual_tol);
}

std::vector<Seed> make_seeds(const VectorFieldBundle& b, const CensusOptions& opts) {
    std::vector<Seed> seeds;
    const FormationGraph& g = b.graph();
    if (g.is_two_cycles()) {
        try {
            for (const Framework& f : design_frameworks(g, b.lengths())) seeds.push_back({f.x(), false});
        } catch (const InfeasibleError&) {
        }
        for (const EquilibriumRecord& r : solve_ancillary_aligned(b, opts.aligned_grid))
            seeds.push_back({r.framework.x(), false});
    }
    const double half = 2.0 * length_scale(b.lengths());
    const std::size_t dim = 2 * g.n();
    // All agents superposed: an equilibrium for every compatible law.
    seeds.push_back({num::Vector(dim, 0.0), false});
    const auto rng_for = [&](std::uint32_t tag, std::size_t i) {
        std::seed_seq seq{static_cast<std::uint32_t>(opts.seed), static_cast<std::uint32_t>(opts.seed >> 32), tag,
                          static_cast<std::uint32_t>(i)};
        return std::mt19937_64(seq);
    };
    for (std::size_t i = 0; i < opts.n_collinear; ++i) {
        auto rng = rng_for(1, i);
        std::uniform_real_distribution<double> u(-half, half);
        num::Vector x(dim, 0.0);
        for (std::size_t v = 0; v < g.n(); ++v) x[2 * v] = u(rng);
        seeds.push_back({x, false});
        seeds.push_back({x, true});
    }
    for (std::size_t i = 0; i < opts.n_random; ++i) {
        auto rng = rng_for(2, i);
        std::uniform_real_distribution<double> u(-half, half);
        num::Vector x(dim);
        for (double& v : x) v = u(rng);
        seeds.push_back({x, false});
        seeds.push_back({x, true});
    }
    return seeds;
}

CensusReport reduce(const VectorFieldBundle& b, const CensusOptions& opts,
                    const std::vector<std::optional<num::Vector>>& found) {
    CensusReport rep;
    rep.seeds_tried = found.size();
    const double tol = opts.dedupe_tol * length_scale(b.lengths());
    std::vector<num::Vector> reps;
    for (const auto& x : found) {
        if (!x) {
            ++rep.seeds_failed;
            continue;
        }
        const num::Vector c = canonical_gauge(b.graph(), *x);
        const bool seen = std::any_of(reps.begin(), reps.end(), [&](const num::Vector& r) {
            double d = 0.0;
            for (std::size_t i = 0; i < r.size(); ++i) d = std::max(d, std::abs(r[i] - c[i]));
            return d <= tol;
        });
        if (!seen) reps.push_back(c);
    }
    for (const num::Vector& x : reps) rep.records.push_back(classify(b, Framework(b.graph(), x), opts.residual_tol));
    std::sort(rep.records.begin(), rep.records.end(), record_less);
    for (const EquilibriumRecord& r : rep.records) {
        rep.feasible = rep.feasible || r.kind == EquilibriumKind::design;
        rep.index_sum += r.index;
    }
    rep.almost_surely_stable = std::all_of(rep.records.begin(), rep.records.end(), [](const EquilibriumRecord& r) {
        return !r.stable || r.kind == EquilibriumKind::design;
    });
    return rep;
}

}  // namespace

CensusReport census(const VectorFieldBundle& b, const CensusOptions& opts) {
    const std::vector<Seed> seeds = make_seeds(b, opts);
    std::vector<std::optional<num::Vector>> found(seeds.size());
    const auto count = static_cast<std::ptrdiff_t>(seeds.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < count; ++i) found[i] = process_seed(b, seeds[i], opts);
    return reduce(b, opts, found);
}

CensusReport census_serial(const VectorFieldBundle& b, const CensusOptions& opts) {
    const std::vector<Seed> seeds = make_seeds(b, opts);
    std::vector<std::optional<num::Vector>> found(seeds.size());
    for (std::size_t i = 0; i < seeds.size(); ++i) found[i] = process_seed(b, seeds[i], opts);
    return reduce(b, opts, found);
}

// Scalar systems.

ScalarCensus scalar_census(const std::function<double(double)>& f, const std::vector<double>& design, double lo,
                           double hi, int seeds) {
    if (!(hi > lo) || seeds < 1) throw ConfigError("scalar census needs lo < hi and at least one seed");
    const auto fv = [&f](const num::Vector& x) { return num::Vector{f(x[0])}; };
    std::vector<double> roots;
    for (int i = 0; i < seeds; ++i) {
        const double x0 = seeds == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (seeds - 1);
        double x = 0.0;
        try {
            x = num::newton_root(fv, {x0}).x[0];
        } catch (const Error&) {
            continue;
        }
        if (!std::isfinite(x) || std::abs(f(x)) > 1e-12) continue;
        if (std::none_of(roots.begin(), roots.end(), [&](double r) { return std::abs(r - x) <= 1e-8; }))
            roots.push_back(x);
    }
    std::sort(roots.begin(), roots.end());
    ScalarCensus out;
    for (double x : roots) {
        const double h = 1e-6 * std::max(1.0, std::abs(x));
        ScalarEquilibrium e;
        e.x = std::abs(x) < 1e-14 ? 0.0 : x;
        e.slope = (f(x + h) - f(x - h)) / (2.0 * h);
        e.stable = e.slope < 0.0;
        e.index = e.slope > 0.0 ? 1 : (e.slope < 0.0 ? -1 : 0);
        e.design = std::any_of(design.begin(), design.end(), [&](double d) { return std::abs(d - x) <= 1e-8; });
        out.feasible = out.feasible || e.design;
        out.index_sum += e.index;
        out.equilibria.push_back(e);
    }
    out.almost_surely_stable = std::all_of(out.equilibria.begin(), out.equilibria.end(),
                                           [](const ScalarEquilibrium& e) { return !e.stable || e.design; });
    return out;
}

// Convention identification.

std::vector<double> match_spectrum(const num::Spectrum& s, const std::vector<num::Complex>& reference) {
    const std::size_t k = reference.size();
    if (s.size() != k) return {};
    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<double> best;
    double best_max = std::numeric_limits<double>::infinity(), best_sum = best_max;
    do {
        std::vector<double> dev(k);
        double mx = 0.0, sum = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            dev[i] = std::abs(s.values[perm[i]] - reference[i]);
            mx = std::max(mx, dev[i]);
            sum += dev[i];
        }
        if (mx < best_max || (mx == best_max && sum < best_sum)) {
            best_max = mx;
            best_sum = sum;
            best = std::move(dev);
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

ConventionReport identify_convention(const num::Vector& d_plain, const std::vector<ReferenceSpectrum>& reference,
                                     double tolerance) {
    if (d_plain.size() != 5) throw DimensionError("identify_convention needs the five 2-cycles lengths");
    struct Reading {
        const char* law;
        bool raw;
    };
    const Reading readings[] = {{"gradient_squared", false}, {"gradient_squared", true}, {"gradient_plain", false},
                                {"eq1_plain", false}};
    ConventionReport rep;
    rep.tolerance = tolerance;
    const FormationGraph g = FormationGraph::two_cycles();
    for (bool swap : {false, true}) {
        num::Vector dp = d_plain;
        if (swap) std::swap(dp[3], dp[4]);
        for (const Reading& rd : readings) {
            const bool squared = std::string_view(rd.law) == "gradient_squared";
            num::Vector sq = dp;
            if (!rd.raw)
                for (double& v : sq) v *= v;
            TargetLengths lengths = squared ? TargetLengths::squared(sq) : TargetLengths::plain(dp);
            std::string name = std::string(rd.law) + (rd.raw ? ":as_squared" : "") + (swap ? ":swap45" : ":printed");
            ConventionCandidate cand{name, rd.law, swap, lengths, {}, std::numeric_limits<double>::infinity()};

            std::vector<EquilibriumRecord> designs, ancillary;
            try {
                const VectorFieldBundle b(g, ControlLaw::builtin(rd.law), lengths);
                for (const Framework& f : design_frameworks(g, lengths)) designs.push_back(classify(b, f));
                for (EquilibriumRecord& r : solve_ancillary_aligned(b))
                    if (r.kind != EquilibriumKind::design) ancillary.push_back(std::move(r));
            } catch (const InfeasibleError&) {
                rep.candidates.push_back(std::move(cand));
                continue;
            }

            double score = 0.0;
            bool qualitative = true;
            for (const ReferenceSpectrum& p : reference) {
                SpectrumMatch m{p.name, std::nullopt, {}, std::numeric_limits<double>::infinity()};
                for (const EquilibriumRecord& r : p.design ? designs : ancillary) {
                    const std::vector<double> dev = match_spectrum(r.spectrum_gauge, p.values);
                    if (dev.empty()) continue;
                    const double mx = *std::max_element(dev.begin(), dev.end());
                    if (mx < m.max_dev) {
                        m.max_dev = mx;
                        m.deviations = dev;
                        m.record = r;
                    }
                }
                if (m.record) {
                    const auto expected = static_cast<std::size_t>(std::count_if(
                        p.values.begin(), p.values.end(), [](const num::Complex& v) { return v.real() > 0.0; }));
                    const double tol0 = kTolZero * m.record->spectrum_gauge.spectral_radius();
                    m.qualitative =
                        m.record->hyperbolic && m.record->spectrum_gauge.count_positive(tol0) == expected;
                }
                score = std::max(score, m.max_dev);
                qualitative = qualitative && m.qualitative;
                cand.matches.push_back(std::move(m));
            }
            cand.score = score;
            cand.quantitative = score <= tolerance;
            cand.qualitative = qualitative;
            rep.candidates.push_back(std::move(cand));
        }
    }
    for (std::size_t i = 1; i < rep.candidates.size(); ++i)
        if (rep.candidates[i].score < rep.candidates[rep.best].score) rep.best = i;
    return rep;
}

}  // namespace formation
