#include "formation/rigidity.hpp"

#include "formation/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace formation {

Framework::Framework(FormationGraph graph, num::Vector x) : graph_(std::move(graph)), x_(std::move(x)) {
    if (x_.size() != 2 * graph_.n())
        throw DimensionError("framework needs " + std::to_string(2 * graph_.n()) + " coordinates, got " +
                             std::to_string(x_.size()));
    if (!std::all_of(x_.begin(), x_.end(), [](double v) { return std::isfinite(v); }))
        throw DomainError("framework coordinates must be finite");
}

num::Matrix block_rows(const std::vector<Vec2>& z) {
    num::Matrix d(z.size(), 2 * z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        d(i, 2 * i) = z[i][0];
        d(i, 2 * i + 1) = z[i][1];
    }
    return d;
}

num::Vector edge_vector_stack(const FormationGraph& g, const num::Vector& x) {
    if (x.size() != 2 * g.n()) throw DimensionError("position vector length mismatch");
    num::Vector z(2 * g.m());
    for (std::size_t i = 0; i < g.m(); ++i) {
        const Edge& e = g.edge(i);
        z[2 * i] = x[2 * e.target] - x[2 * e.origin];
        z[2 * i + 1] = x[2 * e.target + 1] - x[2 * e.origin + 1];
    }
    return z;
}

EdgeVectors edge_vectors(const Framework& f) {
    const num::Vector s = edge_vector_stack(f.graph(), f.x());
    EdgeVectors ev;
    ev.z.resize(f.graph().m());
    for (std::size_t i = 0; i < ev.z.size(); ++i) ev.z[i] = {s[2 * i], s[2 * i + 1]};
    ev.Dz = block_rows(ev.z);
    return ev;
}

std::string_view to_string(LengthConvention c) {
    return c == LengthConvention::squared ? "squared" : "plain";
}

TargetLengths::TargetLengths(num::Vector d, LengthConvention c) : d_(std::move(d)), convention_(c) {
    for (std::size_t i = 0; i < d_.size(); ++i)
        if (!(d_[i] > 0.0) || !std::isfinite(d_[i]))
            throw InfeasibleError("target length " + std::to_string(i + 1) + " must be positive and finite");
}

TargetLengths TargetLengths::squared(num::Vector d_squared) {
    return TargetLengths(std::move(d_squared), LengthConvention::squared);
}

TargetLengths TargetLengths::plain(const num::Vector& lengths) {
    num::Vector sq(lengths.size());
    for (std::size_t i = 0; i < lengths.size(); ++i) {
        if (!(lengths[i] > 0.0))
            throw InfeasibleError("target length " + std::to_string(i + 1) + " must be positive and finite");
        sq[i] = lengths[i] * lengths[i];
    }
    return TargetLengths(std::move(sq), LengthConvention::plain);
}

TargetLengths TargetLengths::with_convention(LengthConvention c) const { return TargetLengths(d_, c); }

num::Vector TargetLengths::plain_values() const {
    num::Vector out(d_.size());
    std::transform(d_.begin(), d_.end(), out.begin(), [](double v) { return std::sqrt(v); });
    return out;
}

TargetLengths TargetLengths::shifted(std::size_t i, double delta) const {
    num::Vector d = d_;
    d.at(i) += delta;
    return TargetLengths(std::move(d), convention_);
}

num::Vector edge_errors(const Framework& f, const TargetLengths& d) {
    if (d.size() != f.graph().m())
        throw DimensionError("expected " + std::to_string(f.graph().m()) + " target lengths, got " +
                             std::to_string(d.size()));
    const EdgeVectors ev = edge_vectors(f);
    num::Vector e(d.size());
    for (std::size_t i = 0; i < e.size(); ++i) {
        const double n2 = dot2(ev.z[i], ev.z[i]);
        e[i] = d.convention() == LengthConvention::squared ? n2 - d[i] : std::sqrt(n2) - std::sqrt(d[i]);
    }
    return e;
}

num::Matrix rigidity_matrix(const Framework& f) {
    const FormationGraph& g = f.graph();
    const EdgeVectors ev = edge_vectors(f);
    num::Matrix r(g.m(), 2 * g.n());
    for (std::size_t i = 0; i < g.m(); ++i) {
        const Edge& e = g.edge(i);
        for (std::size_t c = 0; c < 2; ++c) {
            r(i, 2 * e.origin + c) = -ev.z[i][c];
            r(i, 2 * e.target + c) = ev.z[i][c];
        }
    }
    return r;
}

bool is_infinitesimally_rigid(const Framework& f, double tol) {
    const std::size_t n = f.graph().n();
    if (n < 2) return true;
    return num::rank_tol(rigidity_matrix(f), tol) == 2 * n - 3;
}

bool is_minimally_rigid(const Framework& f, double tol) {
    if (!is_infinitesimally_rigid(f, tol)) return false;
    for (std::size_t i = 0; i < f.graph().m(); ++i)
        if (is_infinitesimally_rigid(Framework(f.graph().without_edge(i), f.x()), tol)) return false;
    return true;
}

Vec2 circle_intersection(const Vec2& c1, double r1, const Vec2& c2, double r2, int side, std::string_view what) {
    const Vec2 du{c2[0] - c1[0], c2[1] - c1[1]};
    const double dist = std::hypot(du[0], du[1]);
    const auto fail = [&]() {
        return InfeasibleError("no strict realisation of triangle " + std::string(what) + " (sides " +
                               std::to_string(dist) + ", " + std::to_string(r1) + ", " + std::to_string(r2) + ")");
    };
    if (dist == 0.0) throw fail();
    const double a = (r1 * r1 - r2 * r2 + dist * dist) / (2.0 * dist);
    const double h2 = r1 * r1 - a * a;
    // Collinear (degenerate) triangles are outside the feasible set.
    if (h2 <= 1e-12 * r1 * r1) throw fail();
    const double h = std::sqrt(h2);
    const Vec2 u{du[0] / dist, du[1] / dist};
    const double s = side >= 0 ? 1.0 : -1.0;
    return {c1[0] + a * u[0] - s * h * u[1], c1[1] + a * u[1] + s * h * u[0]};
}

namespace {

void require_two_cycles(std::size_t m) {
    if (m != 5) throw DimensionError("2-cycles lengths need 5 entries, got " + std::to_string(m));
}

}  // namespace

std::vector<Framework> realize_two_cycles(const TargetLengths& d) {
    require_two_cycles(d.size());
    const num::Vector r = d.plain_values();
    const Vec2 x1{0.0, 0.0};
    const Vec2 x2{r[0], 0.0};
    std::vector<Framework> out;
    for (const auto& [s3, s4] : {std::pair{1, 1}, {1, -1}, {-1, -1}, {-1, 1}}) {
        const Vec2 x3 = circle_intersection(x1, r[2], x2, r[1], s3, "(d1, d2, d3)");
        const Vec2 x4 = circle_intersection(x1, r[4], x3, r[3], s4, "(d3, d4, d5)");
        out.emplace_back(FormationGraph::two_cycles(), num::Vector{x1[0], x1[1], x2[0], x2[1], x3[0], x3[1], x4[0], x4[1]});
    }
    return out;
}

SingularLengths make_singular_lengths(double d1, double d2, double d3, double s5, int side) {
    if (!(d1 > 0.0 && d2 > 0.0 && d3 > 0.0)) throw InfeasibleError("triangle lengths must be positive");
    if (s5 == 0.0 || !std::isfinite(s5)) throw InfeasibleError("signed z5 length must be nonzero");
    const Vec2 x1{0.0, 0.0};
    const Vec2 x2{std::sqrt(d1), 0.0};
    const Vec2 x3 = circle_intersection(x1, std::sqrt(d3), x2, std::sqrt(d2), side, "(d1, d2, d3)");
    const Vec2 x4{s5, 0.0};
    const double d4 = (x3[0] - x4[0]) * (x3[0] - x4[0]) + (x3[1] - x4[1]) * (x3[1] - x4[1]);
    const bool superposed = std::abs(x4[0] - x2[0]) <= 1e-12 * std::max(1.0, std::abs(x2[0]));
    Framework w(FormationGraph::two_cycles(), {x1[0], x1[1], x2[0], x2[1], x3[0], x3[1], x4[0], x4[1]});
    return {TargetLengths::squared({d1, d2, d3, d4, s5 * s5}), std::move(w), superposed};
}

bool in_singular_set(const TargetLengths& d, double tol) {
    for (const Framework& f : realize_two_cycles(d)) {
        const EdgeVectors ev = edge_vectors(f);
        const double c = std::abs(cross2(ev.z[0], ev.z[4]));
        if (c <= tol * std::sqrt(dot2(ev.z[0], ev.z[0]) * dot2(ev.z[4], ev.z[4]))) return true;
    }
    return false;
}

}  // namespace formation
