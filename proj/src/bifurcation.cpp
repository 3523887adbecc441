#include "formation/bifurcation.hpp"

#include "formation/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace formation {

ParamFamily logistic_family() {
    return {[](const num::Vector& y, double mu) { return num::Vector{y[0] * (mu - y[0])}; }, {0.0}, 0.0, {}};
}

ParamFamily saddle_node_family() {
    return {[](const num::Vector& y, double mu) { return num::Vector{mu - y[0] * y[0]}; }, {0.0}, 0.0, {}};
}

ParamFamily formation_family(const VectorFieldBundle& b, const Framework& f, std::size_t edge) {
    if (edge >= b.lengths().size()) throw DimensionError("parameter edge out of range");
    require_equilibrium(b, f);
    const GaugeSlice slice(f.graph(), f.x());
    ParamFamily fam;
    fam.y0 = slice.coordinates();
    fam.mu0 = 0.0;
    fam.field = [b, slice, edge](const num::Vector& y, double mu) {
        if (mu == 0.0) return slice_field(b, slice, y);
        return slice_field(b.with_lengths(b.lengths().shifted(edge, mu)), slice, y);
    };
    fam.jacobian = [b, slice]() { return gauge_jacobian(b, slice); };
    return fam;
}

namespace {

// Unit singular vector for the smallest singular value.
num::Vector smallest_right_vector(const num::Matrix& a) {
    const num::SvdResult s = num::svd(a);
    const auto k = static_cast<std::size_t>(std::min_element(s.sigma.begin(), s.sigma.end()) - s.sigma.begin());
    num::Vector v = s.v.col(k);
    return num::scaled(v, 1.0 / num::norm2(v));
}

void orient(num::Vector& v) {
    std::size_t k = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (std::abs(v[i]) > std::abs(v[k]) + 1e-12) k = i;
    if (v[k] < 0.0) v = num::scaled(v, -1.0);
}

}  // namespace

SotomayorReport sotomayor_check(const ParamFamily& fam, const SotomayorOptions& opts) {
    const num::Vector& y0 = fam.y0;
    const double mu0 = fam.mu0;
    const auto g0 = [&](const num::Vector& y) { return fam.field(y, mu0); };
    const num::Vector f0 = g0(y0);
    if (!(num::norm_inf(f0) <= opts.residual_tol))
        throw DomainError("Sotomayor base point is not an equilibrium (|G| = " + std::to_string(num::norm_inf(f0)) + ")");

    const num::Matrix a = fam.jacobian ? fam.jacobian() : num::fd_jacobian(g0, y0, opts.h_jac);
    SotomayorReport rep;
    rep.spectrum = num::eigenvalues(a);
    const double tol0 = kTolZero * std::max(1.0, rep.spectrum.spectral_radius());
    std::size_t zeros = 0;
    bool others = true;
    for (const num::Complex& l : rep.spectrum.values) {
        if (std::abs(l) <= tol0)
            ++zeros;
        else if (!(l.real() < -tol0))
            others = false;
    }
    rep.zero_eig_unique = zeros == 1;
    rep.degenerate = zeros >= 2;
    rep.others_negative = others;

    rep.v = smallest_right_vector(a);
    rep.w = smallest_right_vector(a.transpose());
    orient(rep.v);
    const double wv = num::dot(rep.w, rep.v);
    if (std::abs(wv) > 1e-12) {
        if (wv < 0.0) rep.w = num::scaled(rep.w, -1.0);
    } else {
        orient(rep.w);
    }

    const double hm = opts.h * std::max(1.0, std::abs(mu0));
    const num::Vector gp = fam.field(y0, mu0 + hm), gm = fam.field(y0, mu0 - hm);
    num::Vector dmu(gp.size());
    for (std::size_t i = 0; i < dmu.size(); ++i) dmu[i] = (gp[i] - gm[i]) / (2.0 * hm);
    rep.dG_dmu_norm = num::norm2(dmu);
    rep.t_mu = num::dot(rep.w, dmu);

    rep.t_quad = num::dot(rep.w, num::fd_second_directional(g0, y0, rep.v, opts.h));

    const double hy = opts.h * std::max(1.0, num::norm_inf(y0));
    const num::Vector yp = num::axpy(hy, rep.v, y0), ym = num::axpy(-hy, rep.v, y0);
    const num::Vector a1 = fam.field(yp, mu0 + hm), a2 = fam.field(ym, mu0 + hm);
    const num::Vector a3 = fam.field(yp, mu0 - hm), a4 = fam.field(ym, mu0 - hm);
    num::Vector mixed(a1.size());
    for (std::size_t i = 0; i < mixed.size(); ++i) mixed[i] = (a1[i] - a2[i] - a3[i] + a4[i]) / (4.0 * hy * hm);
    rep.t_mixed = num::dot(rep.w, mixed);

    rep.verdict = rep.zero_eig_unique && rep.others_negative &&
                  std::abs(rep.t_mu) <= opts.tol_mu_rel * rep.dG_dmu_norm + 1e-12 &&
                  std::abs(rep.t_quad) > opts.tol_nondeg && std::abs(rep.t_mixed) > opts.tol_nondeg;
    return rep;
}

std::string_view to_string(Branch b) { return b == Branch::design ? "design" : "ancillary_aligned"; }

std::string_view to_string(Detection d) {
    switch (d) {
        case Detection::detected: return "detected";
        case Detection::not_detected: return "not detected";
        case Detection::indeterminate: return "indeterminate";
    }
    return "indeterminate";
}

namespace {

double parallel_defect(const Framework& f) {
    const EdgeVectors ev = edge_vectors(f);
    return std::abs(cross2(ev.z[0], ev.z[4])) / std::sqrt(dot2(ev.z[0], ev.z[0]) * dot2(ev.z[4], ev.z[4]));
}

BranchPoint make_point(const VectorFieldBundle& b, double mu, Branch br, const Framework& f) {
    const EquilibriumRecord r = classify(b, f);
    return {mu, br, r.framework, r.spectrum_gauge.max_real(), r.stable, r.errors};
}

}  // namespace

std::vector<BranchPoint> mu_sweep(const VectorFieldBundle& b0, double eps, int samples, const SweepOptions& opts) {
    const FormationGraph& g = b0.graph();
    if (!g.is_two_cycles()) throw ConfigError("mu_sweep is defined for the 2-cycles graph", "unsupported_graph");
    if (!(eps > 0.0) || samples < 1) throw ConfigError("sweep needs eps > 0 and at least one sample");
    if (opts.edge >= b0.lengths().size()) throw DimensionError("parameter edge out of range");

    // Starting frameworks at mu = 0.
    const std::vector<Framework> designs = design_frameworks(g, b0.lengths());
    std::size_t wi = 0;
    for (std::size_t i = 1; i < designs.size(); ++i)
        if (parallel_defect(designs[i]) < parallel_defect(designs[wi])) wi = i;
    const bool singular = parallel_defect(designs[wi]) <= 1e-9;
    if (opts.require_singular && !singular)
        throw ConfigError("sweep lengths are not in the singular set", "not_singular");
    std::optional<std::array<double, 2>> aligned_start;
    if (singular) {
        aligned_start = aligned_angles(designs[wi]);
    } else {
        for (const EquilibriumRecord& r : solve_ancillary_aligned(b0))
            if (r.kind == EquilibriumKind::ancillary_aligned) {
                aligned_start = aligned_angles(r.framework);
                break;
            }
    }

    std::vector<double> mus(static_cast<std::size_t>(samples));
    for (int k = 0; k < samples; ++k) mus[k] = samples == 1 ? 0.0 : -eps + 2.0 * eps * k / (samples - 1);
    const auto bundle_at = [&](double mu) { return b0.with_lengths(b0.lengths().shifted(opts.edge, mu)); };

    std::size_t center = 0;
    for (std::size_t k = 1; k < mus.size(); ++k)
        if (std::abs(mus[k]) < std::abs(mus[center])) center = k;

    std::vector<BranchPoint> design_pts(mus.size()), aligned_pts(mus.size());

    // Continue in both directions from the centre, warm-starting each step.
    for (int dir : {1, -1}) {
        std::optional<Framework> prev_design = designs[wi];
        std::optional<std::array<double, 2>> prev_angles = aligned_start;
        double prev_mu = 0.0;
        for (auto k = static_cast<std::ptrdiff_t>(center); k >= 0 && k < static_cast<std::ptrdiff_t>(mus.size());
             k += dir) {
            const double mu = mus[k];
            if (dir == -1 && static_cast<std::size_t>(k) == center) {
                // The centre was computed on the forward pass; only seed the walk.
                if (design_pts[k].framework) prev_design = design_pts[k].framework;
                if (aligned_pts[k].framework) prev_angles = aligned_angles(*aligned_pts[k].framework);
                prev_mu = mu;
                continue;
            }
            BranchPoint dp{mu, Branch::design, std::nullopt, 0.0, false, {}};
            BranchPoint ap{mu, Branch::ancillary_aligned, std::nullopt, 0.0, false, {}};
            try {
                const VectorFieldBundle b = bundle_at(mu);
                if (prev_design) {
                    const std::vector<Framework> fs = design_frameworks(g, b.lengths());
                    std::size_t best = 0;
                    for (std::size_t i = 1; i < fs.size(); ++i)
                        if (gauge_distance(g, fs[i].x(), prev_design->x()) <
                            gauge_distance(g, fs[best].x(), prev_design->x()))
                            best = i;
                    dp = make_point(b, mu, Branch::design, fs[best]);
                    prev_design = dp.framework;
                }
            } catch (const Error&) {
                prev_design.reset();
            }
            if (prev_angles) {
                // Step halving on branch loss.
                const std::function<std::optional<AlignedSolution>(double, std::array<double, 2>, double, int)> walk =
                    [&](double from, std::array<double, 2> th, double to, int depth) -> std::optional<AlignedSolution> {
                    std::optional<AlignedSolution> s;
                    try {
                        s = solve_aligned_from(bundle_at(to), th);
                    } catch (const Error&) {
                    }
                    if (s || depth >= opts.max_halvings) return s;
                    const double mid = 0.5 * (from + to);
                    const auto half = walk(from, th, mid, depth + 1);
                    if (!half) return std::nullopt;
                    return walk(mid, half->angles, to, depth + 1);
                };
                const auto sol = walk(prev_mu, *prev_angles, mu, 0);
                if (sol) {
                    const EquilibriumRecord& r = sol->record;
                    ap = {mu, Branch::ancillary_aligned, r.framework, r.spectrum_gauge.max_real(), r.stable, r.errors};
                    prev_angles = sol->angles;
                } else {
                    prev_angles.reset();
                }
            }
            design_pts[k] = std::move(dp);
            aligned_pts[k] = std::move(ap);
            prev_mu = mu;
        }
    }

    std::vector<BranchPoint> out = std::move(design_pts);
    for (BranchPoint& p : aligned_pts) out.push_back(std::move(p));
    return out;
}

TranscriticalReport transcritical_detect(const std::vector<BranchPoint>& points) {
    TranscriticalReport rep;
    std::vector<const BranchPoint*> br[2];
    for (const BranchPoint& p : points) br[p.branch == Branch::design ? 0 : 1].push_back(&p);
    for (auto& v : br)
        std::sort(v.begin(), v.end(), [](const BranchPoint* a, const BranchPoint* b) { return a->mu < b->mu; });
    for (const auto& v : br) {
        if (v.size() < 2) {
            rep.reason = "fewer than two samples on a branch";
            return rep;
        }
        for (const BranchPoint* p : v)
            if (!p->framework) {
                rep.reason = "branch has gaps";
                return rep;
            }
    }
    rep.grid_step = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < br[0].size(); ++i) rep.grid_step = std::min(rep.grid_step, br[0][i]->mu - br[0][i - 1]->mu);

    struct Crossing {
        int changes = 0;
        double mu = 0.0;
        int sign_below = 0;
    };
    const auto analyse = [](const std::vector<const BranchPoint*>& v) {
        double scale = 0.0;
        for (const BranchPoint* p : v) scale = std::max(scale, std::abs(p->leading_real));
        const double zero = 1e-7 * std::max(scale, 1e-300);
        Crossing c;
        const BranchPoint* last = nullptr;
        for (const BranchPoint* p : v) {
            if (std::abs(p->leading_real) <= zero) continue;
            if (last && (last->leading_real > 0.0) != (p->leading_real > 0.0)) {
                ++c.changes;
                c.sign_below = last->leading_real > 0.0 ? 1 : -1;
                c.mu = last->mu - last->leading_real * (p->mu - last->mu) / (p->leading_real - last->leading_real);
            }
            last = p;
        }
        return c;
    };
    const Crossing cd = analyse(br[0]), ca = analyse(br[1]);
    rep.crossing_design = cd.mu;
    rep.crossing_aligned = ca.mu;
    if (cd.changes != 1 || ca.changes != 1) {
        rep.status = Detection::not_detected;
        rep.reason = "leading eigenvalue sign changes: design " + std::to_string(cd.changes) + ", aligned " +
                     std::to_string(ca.changes);
        return rep;
    }
    if (cd.sign_below != -ca.sign_below) {
        rep.status = Detection::not_detected;
        rep.reason = "both branches change sign in the same direction";
        return rep;
    }
    const double tol = rep.grid_step * (1.0 + 1e-9);
    if (std::abs(cd.mu) > tol || std::abs(ca.mu) > tol) {
        rep.status = Detection::not_detected;
        rep.reason = "crossing farther than one grid step from mu = 0";
        return rep;
    }
    rep.status = Detection::detected;
    rep.design_stable_below = cd.sign_below < 0;
    rep.reason = rep.design_stable_below ? "design branch stable for mu below the crossing"
                                         : "design branch stable for mu above the crossing";
    return rep;
}

std::string_view to_string(LogisticStability s) {
    switch (s) {
        case LogisticStability::stable: return "stable";
        case LogisticStability::unstable: return "unstable";
        case LogisticStability::degenerate: return "degenerate";
    }
    return "degenerate";
}

std::vector<LogisticRow> logistic_reference(double mu_min, double mu_max, int samples) {
    if (samples < 1 || mu_max < mu_min) throw ConfigError("logistic reference needs mu_min <= mu_max and samples >= 1");
    std::vector<LogisticRow> rows;
    for (int k = 0; k < samples; ++k) {
        double mu = samples == 1 ? mu_min : mu_min + (mu_max - mu_min) * k / (samples - 1);
        if (std::abs(mu) < 1e-14 * std::max(1.0, std::abs(mu_max - mu_min))) mu = 0.0;
        if (mu == 0.0) {
            rows.push_back({0.0, 0.0, LogisticStability::degenerate});
            continue;
        }
        // f'(0) = mu, f'(mu) = -mu.
        const auto label = [](double slope) { return slope < 0.0 ? LogisticStability::stable : LogisticStability::unstable; };
        rows.push_back({mu, 0.0, label(mu)});
        rows.push_back({mu, mu, label(-mu)});
    }
    return rows;
}

}  // namespace formation
