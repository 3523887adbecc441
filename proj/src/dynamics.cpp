#include "formation/dynamics.hpp"

#include "formation/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace formation {
namespace {

constexpr double kDomainTol = 1e-7;

double fd_step(double v) { return 1e-5 * std::max(1.0, std::abs(v)); }

// Plain-length laws: derivatives in n2 = |z|^2 blow up at z = 0 but always
// multiply z z^T there, so they are reported as zero at the origin.
SingleEval plain_single(double g, double d, double n2) {
    const double r = std::sqrt(n2);
    SingleEval s;
    s.u = g * (r - std::sqrt(d));
    s.ux = r > 0.0 ? g / (2.0 * r) : 0.0;
    s.uxx = r > 0.0 ? -g / (4.0 * n2 * r) : 0.0;
    s.ud = -g / (2.0 * std::sqrt(d));
    return s;
}

}  // namespace

std::optional<LawName> parse_law_name(std::string_view name) {
    if (name == "gradient_squared") return LawName::gradient_squared;
    if (name == "gradient_plain") return LawName::gradient_plain;
    if (name == "eq1_plain") return LawName::eq1_plain;
    return std::nullopt;
}

std::string_view to_string(LawName name) {
    switch (name) {
        case LawName::gradient_squared: return "gradient_squared";
        case LawName::gradient_plain: return "gradient_plain";
        case LawName::eq1_plain: return "eq1_plain";
    }
    return "unknown";
}

ControlLaw ControlLaw::builtin(LawName name, double gain, bool toggle_sign) {
    if (!(gain > 0.0) || !std::isfinite(gain)) throw ConfigError("law gain must be positive", "invalid_gain");
    ControlLaw law;
    law.builtin_ = name;
    law.name_ = std::string(to_string(name));
    law.gain_ = gain;
    law.sign_ = (name == LawName::eq1_plain && !toggle_sign) ? -1.0 : 1.0;
    law.convention_ = name == LawName::gradient_squared ? LengthConvention::squared : LengthConvention::plain;
    return law;
}

ControlLaw ControlLaw::builtin(std::string_view name, double gain, bool toggle_sign) {
    const auto parsed = parse_law_name(name);
    if (!parsed) throw ConfigError("unknown law '" + std::string(name) + "'", "unknown_law");
    return builtin(*parsed, gain, toggle_sign);
}

ControlLaw ControlLaw::custom(SingleFn single, PairFn pair, LengthConvention convention, std::string name) {
    if (!single || !pair) throw ConfigError("custom law needs both single and pair functions");
    ControlLaw law;
    law.name_ = std::move(name);
    law.convention_ = convention;
    law.single_fn_ = std::move(single);
    law.pair_fn_ = std::move(pair);
    return law;
}

SingleEval ControlLaw::single(double d, double n2) const {
    if (builtin_) {
        const double g = sign_ * gain_;
        if (*builtin_ == LawName::gradient_squared) return {g * (n2 - d), g, 0.0, -g};
        return plain_single(g, d, n2);
    }
    const auto& f = single_fn_;
    const double hx = fd_step(n2), hd = fd_step(d);
    SingleEval s;
    s.u = f(d, n2);
    s.ux = (f(d, n2 + hx) - f(d, n2 - hx)) / (2.0 * hx);
    s.uxx = (f(d, n2 + hx) - 2.0 * s.u + f(d, n2 - hx)) / (hx * hx);
    s.ud = (f(d + hd, n2) - f(d - hd, n2)) / (2.0 * hd);
    return s;
}

PairEval ControlLaw::pair(double dj, double dk, double n2j, double n2k, double s) const {
    PairEval p;
    if (builtin_) {
        const SingleEval a = single(dj, n2j);
        const SingleEval b = single(dk, n2k);
        p.u1 = a.u;
        p.u1x = a.ux;
        p.u1dj = a.ud;
        p.u2 = b.u;
        p.u2y = b.ux;
        p.u2dk = b.ud;
        return p;
    }
    std::array<double, 5> args{dj, dk, n2j, n2k, s};
    const auto eval = [&](const std::array<double, 5>& a) { return pair_fn_(a[0], a[1], a[2], a[3], a[4]); };
    const auto partial = [&](std::size_t i) {
        std::array<double, 5> a = args;
        const double h = fd_step(args[i]);
        a[i] = args[i] + h;
        const auto up = eval(a);
        a[i] = args[i] - h;
        const auto dn = eval(a);
        return std::array<double, 2>{(up[0] - dn[0]) / (2.0 * h), (up[1] - dn[1]) / (2.0 * h)};
    };
    const auto u = eval(args);
    p.u1 = u[0];
    p.u2 = u[1];
    const auto ddj = partial(0), ddk = partial(1), dx = partial(2), dy = partial(3), dz = partial(4);
    p.u1dj = ddj[0];
    p.u2dj = ddj[1];
    p.u1dk = ddk[0];
    p.u2dk = ddk[1];
    p.u1x = dx[0];
    p.u2x = dx[1];
    p.u1y = dy[0];
    p.u2y = dy[1];
    p.u1z = dz[0];
    p.u2z = dz[1];
    return p;
}

bool satisfies_compatibility(const ControlLaw& law, double dj, double dk, double tol) {
    // Zero error means |z|^2 = d (squared) or |z| = sqrt(d) (plain); both
    // are n2 = d since lengths are stored squared.
    if (std::abs(law.single(dj, dj).u) > tol) return false;
    for (double s : {-2.0, -0.5, 0.0, 0.3, 1.7}) {
        const double sc = s * std::sqrt(dj * dk);
        const PairEval p = law.pair(dj, dk, dj, dk, sc);
        if (std::abs(p.u1) > tol || std::abs(p.u2) > tol) return false;
    }
    return true;
}

// Per-edge coefficient and its derivatives, in the frame of that edge: "self"
// is the edge itself, "other" its partner when the origin has two co-leaders.
struct VectorFieldBundle::EdgeTerms {
    double U = 0.0;
    double a_self = 0.0;   // dU/d|z_self|^2
    double a_other = 0.0;  // dU/d|z_other|^2
    double a_s = 0.0;      // dU/d(z_self^T z_other)
    double d_self = 0.0;   // dU/dd_self
    double d_other = 0.0;  // dU/dd_other
};

VectorFieldBundle::VectorFieldBundle(FormationGraph graph, ControlLaw law, TargetLengths lengths)
    : graph_(std::move(graph)), law_(std::move(law)), lengths_(std::move(lengths)) {
    if (lengths_.size() != graph_.m())
        throw DimensionError("expected " + std::to_string(graph_.m()) + " target lengths, got " +
                             std::to_string(lengths_.size()));
    if (law_.convention() != lengths_.convention())
        throw ConfigError("law " + law_.name() + " expects " + std::string(to_string(law_.convention())) +
                              " lengths, got " + std::string(to_string(lengths_.convention())),
                          "convention_mismatch");
    adj_ = adjacency_bundle(graph_);
    cokernel_ = num::left_nullspace(adj_.mixed, 1e-9);
    partner_.resize(graph_.m());
    first_.resize(graph_.m());
    for (std::size_t i = 0; i < graph_.m(); ++i) {
        partner_[i] = graph_.partner(i);
        first_[i] = !partner_[i] || i < *partner_[i];
    }
}

VectorFieldBundle VectorFieldBundle::with_lengths(TargetLengths d) const {
    return VectorFieldBundle(graph_, law_, std::move(d));
}

std::vector<VectorFieldBundle::EdgeTerms> VectorFieldBundle::edge_terms(const num::Vector& z) const {
    if (z.size() != 2 * graph_.m()) throw DimensionError("edge-vector stack length mismatch");
    const auto zv = [&](std::size_t i) { return Vec2{z[2 * i], z[2 * i + 1]}; };
    std::vector<EdgeTerms> t(graph_.m());
    for (std::size_t i = 0; i < graph_.m(); ++i) {
        const Vec2 zi = zv(i);
        if (!partner_[i]) {
            const SingleEval s = law_.single(lengths_[i], dot2(zi, zi));
            t[i] = {s.u, s.ux, 0.0, 0.0, s.ud, 0.0};
            continue;
        }
        if (!first_[i]) continue;  // filled together with its first edge
        const std::size_t k = *partner_[i];
        const Vec2 zk = zv(k);
        const PairEval p = law_.pair(lengths_[i], lengths_[k], dot2(zi, zi), dot2(zk, zk), dot2(zi, zk));
        t[i] = {p.u1, p.u1x, p.u1y, p.u1z, p.u1dj, p.u1dk};
        t[k] = {p.u2, p.u2y, p.u2x, p.u2z, p.u2dk, p.u2dj};
    }
    return t;
}

num::Vector VectorFieldBundle::coefficients(const num::Vector& z) const {
    const auto t = edge_terms(z);
    num::Vector u(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) u[i] = t[i].U;
    return u;
}

num::Vector VectorFieldBundle::F_x(const num::Vector& x) const {
    const num::Vector z = edge_vector_stack(graph_, x);
    const num::Vector u = coefficients(z);
    num::Vector v(x.size(), 0.0);
    for (std::size_t k = 0; k < graph_.m(); ++k) {
        const std::size_t o = graph_.edge(k).origin;
        v[2 * o] += u[k] * z[2 * k];
        v[2 * o + 1] += u[k] * z[2 * k + 1];
    }
    return v;
}

double VectorFieldBundle::cycle_violation(const num::Vector& z) const {
    double worst = 0.0;
    for (const num::Vector& w : cokernel_)
        for (std::size_t c = 0; c < 2; ++c) {
            double s = 0.0;
            for (std::size_t i = 0; i < graph_.m(); ++i) s += w[i] * z[2 * i + c];
            worst = std::max(worst, std::abs(s));
        }
    return worst;
}

num::Vector VectorFieldBundle::F_z(const num::Vector& z) const {
    if (z.size() != 2 * graph_.m()) throw DimensionError("edge-vector stack length mismatch");
    const double viol = cycle_violation(z);
    if (viol > 1e-6 * std::max(1.0, num::norm_inf(z)))
        throw InconsistentStateError("edge vectors violate the cycle constraints by " + std::to_string(viol));
    return F_z_unchecked(z);
}

num::Vector VectorFieldBundle::F_z_unchecked(const num::Vector& z) const {
    const num::Vector u = coefficients(z);
    num::Vector w(z.size());
    for (std::size_t k = 0; k < graph_.m(); ++k) {
        w[2 * k] = u[k] * z[2 * k];
        w[2 * k + 1] = u[k] * z[2 * k + 1];
    }
    num::Vector out(z.size(), 0.0);
    const num::Matrix& ae = adj_.edge_adj;
    for (std::size_t i = 0; i < graph_.m(); ++i)
        for (std::size_t k = 0; k < graph_.m(); ++k) {
            if (ae(i, k) == 0.0) continue;
            out[2 * i] += ae(i, k) * w[2 * k];
            out[2 * i + 1] += ae(i, k) * w[2 * k + 1];
        }
    return out;
}

// d(U_k z_k)/dz_l as a 2m x 2m block matrix, exact at every state.
num::Matrix VectorFieldBundle::edge_block_jacobian(const num::Vector& z) const {
    const auto t = edge_terms(z);
    const std::size_t m = graph_.m();
    num::Matrix blk(2 * m, 2 * m);
    for (std::size_t k = 0; k < m; ++k) {
        const Vec2 zk{z[2 * k], z[2 * k + 1]};
        const EdgeTerms& e = t[k];
        Vec2 zp{0.0, 0.0};
        if (partner_[k]) zp = {z[2 * *partner_[k]], z[2 * *partner_[k] + 1]};
        // Self block: U I + z_k (2 a_self z_k + a_s z_p)^T.
        for (std::size_t r = 0; r < 2; ++r)
            for (std::size_t c = 0; c < 2; ++c)
                blk(2 * k + r, 2 * k + c) = (r == c ? e.U : 0.0) + zk[r] * (2.0 * e.a_self * zk[c] + e.a_s * zp[c]);
        if (!partner_[k]) continue;
        const std::size_t p = *partner_[k];
        // Partner block: z_k (2 a_other z_p + a_s z_k)^T.
        for (std::size_t r = 0; r < 2; ++r)
            for (std::size_t c = 0; c < 2; ++c)
                blk(2 * k + r, 2 * p + c) = zk[r] * (2.0 * e.a_other * zp[c] + e.a_s * zk[c]);
    }
    return blk;
}

num::Matrix VectorFieldBundle::jacobian_x(const num::Vector& x) const {
    const num::Vector z = edge_vector_stack(graph_, x);
    const num::Matrix blk = edge_block_jacobian(z);
    const std::size_t n = graph_.n(), m = graph_.m();
    num::Matrix j(2 * n, 2 * n);
    for (std::size_t k = 0; k < m; ++k) {
        const std::size_t o = graph_.edge(k).origin;
        for (std::size_t l = 0; l < m; ++l) {
            const Edge& el = graph_.edge(l);
            for (std::size_t r = 0; r < 2; ++r)
                for (std::size_t c = 0; c < 2; ++c) {
                    const double b = blk(2 * k + r, 2 * l + c);
                    if (b == 0.0) continue;
                    j(2 * o + r, 2 * el.target + c) += b;
                    j(2 * o + r, 2 * el.origin + c) -= b;
                }
        }
    }
    return j;
}

num::Matrix VectorFieldBundle::jacobian_x_d(const num::Vector& x) const {
    const num::Vector z = edge_vector_stack(graph_, x);
    const auto t = edge_terms(z);
    num::Matrix j(2 * graph_.n(), graph_.m());
    for (std::size_t k = 0; k < graph_.m(); ++k) {
        const std::size_t o = graph_.edge(k).origin;
        for (std::size_t c = 0; c < 2; ++c) {
            j(2 * o + c, k) += t[k].d_self * z[2 * k + c];
            if (partner_[k]) j(2 * o + c, *partner_[k]) += t[k].d_other * z[2 * k + c];
        }
    }
    return j;
}

num::VectorMap VectorFieldBundle::field_x() const {
    return [b = *this](const num::Vector& x) { return b.F_x(x); };
}

num::VectorMap VectorFieldBundle::field_z() const {
    return [b = *this](const num::Vector& z) { return b.F_z_unchecked(z); };
}

num::Vector eval_F_x(const VectorFieldBundle& b, const num::Vector& x) { return b.F_x(x); }
num::Vector eval_F_z(const VectorFieldBundle& b, const num::Vector& z) { return b.F_z(z); }

double design_defect(const VectorFieldBundle& b, const num::Vector& z) {
    const std::size_t m = b.graph().m();
    if (z.size() != 2 * m) throw DimensionError("edge-vector stack length mismatch");
    // Coefficients and u_z terms must vanish, measured against u_x |z|^2.
    const num::Vector u = b.coefficients(z);
    const auto zp = zprime_vectors(b, z);
    const auto norm = [&](std::size_t i) { return std::hypot(z[2 * i], z[2 * i + 1]); };
    double worst = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double scale = std::max(1.0, 0.5 * std::hypot(zp[i][0], zp[i][1]) * norm(i));
        worst = std::max(worst, std::abs(u[i]) / scale);
        if (!b.partner(i) || !b.is_first(i)) continue;
        const std::size_t k = *b.partner(i);
        const Vec2 za{z[2 * i], z[2 * i + 1]}, zb{z[2 * k], z[2 * k + 1]};
        const PairEval p = b.law().pair(b.lengths()[i], b.lengths()[k], dot2(za, za), dot2(zb, zb), dot2(za, zb));
        const double cross = norm(i) * norm(k);
        worst = std::max({worst, std::abs(p.u1z) * cross / scale, std::abs(p.u2z) * cross / scale});
    }
    return worst;
}

std::vector<Vec2> zprime_vectors(const VectorFieldBundle& b, const num::Vector& z) {
    const std::size_t m = b.graph().m();
    if (z.size() != 2 * m) throw DimensionError("edge-vector stack length mismatch");
    std::vector<Vec2> out(m);
    for (std::size_t l = 0; l < m; ++l) {
        const double n2 = z[2 * l] * z[2 * l] + z[2 * l + 1] * z[2 * l + 1];
        if (!b.partner(l)) {
            const double ux = b.law().single(b.lengths()[l], n2).ux;
            out[l] = {2.0 * ux * z[2 * l], 2.0 * ux * z[2 * l + 1]};
            continue;
        }
        const std::size_t k = *b.partner(l);
        const std::size_t j1 = b.is_first(l) ? l : k;
        const std::size_t j2 = b.is_first(l) ? k : l;
        const Vec2 za{z[2 * j1], z[2 * j1 + 1]}, zb{z[2 * j2], z[2 * j2 + 1]};
        const PairEval p =
            b.law().pair(b.lengths()[j1], b.lengths()[j2], dot2(za, za), dot2(zb, zb), dot2(za, zb));
        // Derivatives with respect to |z_l|^2 of the pair's coefficients.
        const double c1 = b.is_first(l) ? p.u1x : p.u1y;
        const double c2 = b.is_first(l) ? p.u2x : p.u2y;
        out[l] = {2.0 * (c1 * za[0] + c2 * zb[0]), 2.0 * (c1 * za[1] + c2 * zb[1])};
    }
    return out;
}

std::vector<Vec2> zdprime_vectors(const VectorFieldBundle& b, const num::Vector& z) {
    const std::size_t m = b.graph().m();
    if (z.size() != 2 * m) throw DimensionError("edge-vector stack length mismatch");
    std::vector<Vec2> out(m);
    for (std::size_t l = 0; l < m; ++l) {
        const double n2 = z[2 * l] * z[2 * l] + z[2 * l + 1] * z[2 * l + 1];
        if (!b.partner(l)) {
            const double ud = b.law().single(b.lengths()[l], n2).ud;
            out[l] = {ud * z[2 * l], ud * z[2 * l + 1]};
            continue;
        }
        const std::size_t k = *b.partner(l);
        const std::size_t j1 = b.is_first(l) ? l : k;
        const std::size_t j2 = b.is_first(l) ? k : l;
        const Vec2 za{z[2 * j1], z[2 * j1 + 1]}, zb{z[2 * j2], z[2 * j2 + 1]};
        const PairEval p =
            b.law().pair(b.lengths()[j1], b.lengths()[j2], dot2(za, za), dot2(zb, zb), dot2(za, zb));
        const double c1 = b.is_first(l) ? p.u1dj : p.u1dk;
        const double c2 = b.is_first(l) ? p.u2dj : p.u2dk;
        out[l] = {c1 * za[0] + c2 * zb[0], c1 * za[1] + c2 * zb[1]};
    }
    return out;
}

namespace {

void require_design(const VectorFieldBundle& b, const num::Vector& z, const char* what) {
    const double defect = design_defect(b, z);
    if (defect > kDomainTol)
        throw DomainError(std::string(what) + " is only valid at design equilibria (coefficient defect " +
                          std::to_string(defect) + ")");
}

num::Matrix transpose_blocks(const std::vector<Vec2>& v) { return block_rows(v).transpose(); }

}  // namespace

num::Matrix jacobian_z(const VectorFieldBundle& b, const num::Vector& z) {
    require_design(b, z, "dF/dz factorisation");
    std::vector<Vec2> zz(b.graph().m());
    for (std::size_t i = 0; i < zz.size(); ++i) zz[i] = {z[2 * i], z[2 * i + 1]};
    const num::Matrix ae2 = num::kron_I2(b.adjacency().edge_adj);
    return ae2 * transpose_blocks(zprime_vectors(b, z)) * block_rows(zz);
}

num::Matrix jacobian_d(const VectorFieldBundle& b, const num::Vector& z) {
    require_design(b, z, "dF/dd factorisation");
    const num::Matrix ae2 = num::kron_I2(b.adjacency().edge_adj);
    return ae2 * transpose_blocks(zdprime_vectors(b, z));
}

num::Matrix reduced_J(const VectorFieldBundle& b, const num::Vector& z) {
    require_design(b, z, "reduced Jacobian");
    std::vector<Vec2> zz(b.graph().m());
    for (std::size_t i = 0; i < zz.size(); ++i) zz[i] = {z[2 * i], z[2 * i + 1]};
    return block_rows(zz) * num::kron_I2(b.adjacency().edge_adj) * transpose_blocks(zprime_vectors(b, z));
}

JacobianBundle jacobian_bundle(const VectorFieldBundle& b, const num::Vector& z) {
    return {zprime_vectors(b, z), zdprime_vectors(b, z), jacobian_z(b, z), jacobian_d(b, z), reduced_J(b, z)};
}

}  // namespace formation
