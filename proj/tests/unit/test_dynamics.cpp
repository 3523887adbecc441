#include "formation/dynamics.hpp"
#include "formation/errors.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace formation;
using num::Matrix;
using num::Vector;

namespace {

const FormationGraph kG = FormationGraph::two_cycles();

VectorFieldBundle squared_bundle(const Vector& d, double gain = 1.0) {
    return VectorFieldBundle(kG, ControlLaw::builtin(LawName::gradient_squared, gain), TargetLengths::squared(d));
}

// Random feasible squared lengths, sampled from a random framework.
Vector random_lengths(std::mt19937_64& rng) {
    while (true) {
        const Vector x = oracle::random_positions(rng, 4, 1.5);
        Vector d(5);
        const auto& e = kG.edges();
        for (std::size_t k = 0; k < 5; ++k) {
            const double dx = x[2 * e[k].target] - x[2 * e[k].origin];
            const double dy = x[2 * e[k].target + 1] - x[2 * e[k].origin + 1];
            d[k] = dx * dx + dy * dy;
        }
        if (*std::min_element(d.begin(), d.end()) < 0.1) continue;
        // Avoid nearly flat triangles, whose realisations are ill-conditioned.
        try {
            for (const auto& f : realize_two_cycles(TargetLengths::squared(d))) {
                const auto z = edge_vectors(f).z;
                if (std::abs(cross2(z[0], z[2])) < 0.05 || std::abs(cross2(z[2], z[3])) < 0.05) throw 0;
            }
        } catch (...) {
            continue;
        }
        return d;
    }
}

// The symmetric example exactly as printed, with plain lengths l.
Vector printed_field(const Vector& x, const Vector& l) {
    const auto term = [&](std::size_t i, std::size_t j, double len, Vector& out) {
        const double dx = x[2 * i] - x[2 * j], dy = x[2 * i + 1] - x[2 * j + 1];
        const double r = std::sqrt(dx * dx + dy * dy);
        out[2 * i] += (r - len) * dx;
        out[2 * i + 1] += (r - len) * dy;
    };
    Vector v(8, 0.0);
    term(0, 1, l[0], v);
    term(0, 3, l[4], v);
    term(1, 2, l[1], v);
    term(2, 0, l[2], v);
    term(3, 2, l[3], v);
    return v;
}

// A coupled two co-leader law: u1 depends on both errors and on s, but
// u, u_z vanish when both errors vanish.
ControlLaw coupled_law() {
    return ControlLaw::custom(
        [](double d, double n2) { return 1.5 * (n2 - d); },
        [](double dj, double dk, double n2j, double n2k, double s) {
            const double ej = n2j - dj, ek = n2k - dk;
            return std::array<double, 2>{ej + 0.3 * ek + 0.2 * ek * s, ek - 0.25 * ej};
        },
        LengthConvention::squared, "coupled");
}

double rel_diff(const Matrix& a, const Matrix& b) {
    return oracle::max_abs_diff(a, b) / std::max(1.0, b.max_abs());
}

}  // namespace

TEST_CASE("builtin laws: values, derivatives and compatibility") {
    const ControlLaw sq = ControlLaw::builtin(LawName::gradient_squared, 2.5);
    const SingleEval s = sq.single(1.7, 1.7);
    CHECK(s.u == 0.0);
    CHECK(s.ux == 2.5);
    CHECK(s.ud == -2.5);
    for (const char* name : {"gradient_squared", "gradient_plain", "eq1_plain"}) {
        const ControlLaw law = ControlLaw::builtin(name, 1.3);
        CHECK(satisfies_compatibility(law, 1.2, 3.4));
        const PairEval p = law.pair(1.2, 3.4, 1.2, 3.4, -0.77);
        CHECK(p.u1 == 0.0);
        CHECK(p.u2 == 0.0);
    }
    CHECK(satisfies_compatibility(coupled_law(), 0.8, 2.0, 1e-12));
    CHECK(ControlLaw::builtin("eq1_plain").sign() == -1.0);
    CHECK(ControlLaw::builtin("eq1_plain", 1.0, true).sign() == 1.0);
    try {
        ControlLaw::builtin("bogus");
        FAIL("expected a configuration error");
    } catch (const ConfigError& e) {
        CHECK(e.code() == "unknown_law");
    }
    CHECK_THROWS_AS(ControlLaw::builtin(LawName::gradient_plain, 0.0), ConfigError);
}

TEST_CASE("plain law derivatives match finite differences") {
    const ControlLaw law = ControlLaw::builtin(LawName::gradient_plain, 1.7);
    const double d = 2.3, n2 = 3.1, h = 1e-5;
    const SingleEval s = law.single(d, n2);
    const auto u = [&](double dd, double nn) { return 1.7 * (std::sqrt(nn) - std::sqrt(dd)); };
    CHECK(s.u == doctest::Approx(u(d, n2)));
    CHECK(s.ux == doctest::Approx((u(d, n2 + h) - u(d, n2 - h)) / (2 * h)).epsilon(1e-8));
    CHECK(s.uxx == doctest::Approx((u(d, n2 + h) - 2 * u(d, n2) + u(d, n2 - h)) / (h * h)).epsilon(1e-4));
    CHECK(s.ud == doctest::Approx((u(d + h, n2) - u(d - h, n2)) / (2 * h)).epsilon(1e-8));
}

TEST_CASE("convention mismatch is a configuration error") {
    try {
        VectorFieldBundle(kG, ControlLaw::builtin(LawName::gradient_squared), TargetLengths::plain({1, 1, 1, 1, 1}));
        FAIL("expected a configuration error");
    } catch (const ConfigError& e) {
        CHECK(e.code() == "convention_mismatch");
    }
    CHECK_THROWS_AS(VectorFieldBundle(kG, ControlLaw::builtin(LawName::gradient_squared), TargetLengths::squared({1, 1})),
                    DimensionError);
}

TEST_CASE("eq1_plain with the printed sign is the symmetric example verbatim") {
    const Vector l{2.0, 2.6, 2.0, 1.4, 3.3};
    const VectorFieldBundle b(kG, ControlLaw::builtin("eq1_plain"), TargetLengths::plain(l));
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const Vector x = oracle::random_positions(rng, 4, 3.0);
        CHECK(oracle::max_abs_diff(b.F_x(x), printed_field(x, l)) < 1e-12);
    }
}

TEST_CASE("F_x vanishes at design frameworks and at superposed agents") {
    std::mt19937_64 rng(32);
    for (int trial = 0; trial < 10; ++trial) {
        const Vector d = random_lengths(rng);
        const auto b = squared_bundle(d, 1.3);
        for (const Framework& f : realize_two_cycles(b.lengths())) CHECK(num::norm_inf(eval_F_x(b, f.x())) < 1e-12);
        CHECK(num::norm_inf(eval_F_x(b, Vector(8, 0.7))) == 0.0);
    }
}

TEST_CASE("collinear frameworks move along their line") {
    const auto b = squared_bundle({1.0, 2.0, 1.5, 0.7, 2.2});
    // Line through (1, 2) with direction (3, 1)/sqrt(10).
    const double t[4] = {0.0, 1.4, -0.6, 2.1};
    Vector x(8);
    for (std::size_t i = 0; i < 4; ++i) {
        x[2 * i] = 1.0 + 3.0 * t[i];
        x[2 * i + 1] = 2.0 + 1.0 * t[i];
    }
    const Vector v = b.F_x(x);
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(v[2 * i] * 1.0 - v[2 * i + 1] * 3.0) < 1e-12);
}

TEST_CASE("F_z is the pushforward of F_x and rejects inconsistent edge vectors") {
    std::mt19937_64 rng(33);
    const auto b = squared_bundle({1.0, 2.0, 1.5, 0.7, 2.2}, 0.8);
    const Matrix am2 = num::kron_I2(mixed_adjacency(kG));
    for (int trial = 0; trial < 50; ++trial) {
        const Vector x = oracle::random_positions(rng, 4);
        const Vector z = edge_vector_stack(kG, x);
        const Vector fz = eval_F_z(b, z);
        const Vector push = am2 * b.F_x(x);
        CHECK(oracle::max_abs_diff(fz, push) <= 1e-12 * std::max(1.0, num::norm_inf(push)));
    }
    Vector z = edge_vector_stack(kG, oracle::random_positions(rng, 4));
    z[0] += 1e-3;
    try {
        eval_F_z(b, z);
        FAIL("expected an inconsistent-state error");
    } catch (const InconsistentStateError& e) {
        CHECK(e.code() == "inconsistent_state");
    }
    // Design edge vectors give a zero field.
    const auto f = realize_two_cycles(b.lengths())[1];
    CHECK(num::norm_inf(eval_F_z(b, edge_vector_stack(kG, f.x()))) < 1e-12);
}

TEST_CASE("analytic x-Jacobians match finite differences for every law") {
    std::mt19937_64 rng(34);
    const Vector l{2.0, 2.6, 2.0, 1.4, 3.3};
    const std::vector<VectorFieldBundle> bundles{
        squared_bundle({1.0, 2.0, 1.5, 0.7, 2.2}, 1.1),
        VectorFieldBundle(kG, ControlLaw::builtin("gradient_plain", 0.9), TargetLengths::plain(l)),
        VectorFieldBundle(kG, ControlLaw::builtin("eq1_plain"), TargetLengths::plain(l)),
        VectorFieldBundle(kG, coupled_law(), TargetLengths::squared({1.0, 2.0, 1.5, 0.7, 2.2})),
    };
    for (const auto& b : bundles)
        for (int trial = 0; trial < 10; ++trial) {
            const Vector x = oracle::random_positions(rng, 4, 2.0);
            const Matrix fd = num::fd_jacobian(b.field_x(), x);
            CHECK(rel_diff(b.jacobian_x(x), fd) < 1e-6);
            const Matrix fdd = num::fd_jacobian(
                [&](const Vector& d) { return b.with_lengths(TargetLengths::squared(d).with_convention(
                                                                b.lengths().convention()))
                                           .F_x(x); },
                b.lengths().values());
            CHECK(rel_diff(b.jacobian_x_d(x), fdd) < 1e-6);
        }
}

TEST_CASE("z-prime examples") {
    const auto b = squared_bundle({1.0, 1.0, 1.0, 1.0, 1.0});
    const auto f = realize_two_cycles(b.lengths())[1];
    const Vector z = edge_vector_stack(kG, f.x());
    const auto zp = zprime_vectors(b, z);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(zp[i][0] == doctest::Approx(2.0 * z[2 * i]));
        CHECK(zp[i][1] == doctest::Approx(2.0 * z[2 * i + 1]));
    }
    // Zero law: z' vanishes and the reduced matrix is zero.
    const ControlLaw zero = ControlLaw::custom([](double, double) { return 0.0; },
                                               [](double, double, double, double, double) {
                                                   return std::array<double, 2>{0.0, 0.0};
                                               },
                                               LengthConvention::squared, "zero");
    const VectorFieldBundle bz(kG, zero, b.lengths());
    for (const Vec2& v : zprime_vectors(bz, z)) CHECK(std::hypot(v[0], v[1]) == 0.0);
    CHECK(reduced_J(bz, z).max_abs() == 0.0);

    // Coupled law: z'_1 = 2(u1x z1 + u2x z5), z'_5 = 2(u1y z1 + u2y z5).
    const VectorFieldBundle bc(kG, coupled_law(), b.lengths());
    const auto zc = zprime_vectors(bc, z);
    const double s = z[0] * z[8] + z[1] * z[9];
    for (std::size_t c = 0; c < 2; ++c) {
        CHECK(zc[0][c] == doctest::Approx(2.0 * (1.0 * z[c] - 0.25 * z[8 + c])).epsilon(1e-8));
        CHECK(zc[4][c] == doctest::Approx(2.0 * ((0.3 + 0.2 * s) * z[c] + 1.0 * z[8 + c])).epsilon(1e-8));
    }
}

TEST_CASE("Jacobian factorisations at design equilibria") {
    std::mt19937_64 rng(35);
    for (int trial = 0; trial < 8; ++trial) {
        const Vector d = random_lengths(rng);
        for (const auto& b : {squared_bundle(d, 1.0), VectorFieldBundle(kG, coupled_law(), TargetLengths::squared(d))}) {
            for (const Framework& f : realize_two_cycles(b.lengths())) {
                const Vector z = edge_vector_stack(kG, f.x());
                const auto jb = jacobian_bundle(b, z);
                CHECK(rel_diff(jb.dFdz, num::fd_jacobian(b.field_z(), z)) < 1e-5);
                const Matrix fdd = num::fd_jacobian(
                    [&](const Vector& dd) { return b.with_lengths(TargetLengths::squared(dd)).F_z_unchecked(z); }, d);
                CHECK(rel_diff(jb.dFdd, fdd) < 1e-5);

                const auto full = num::eigenvalues(jb.dFdz);
                const auto red = num::eigenvalues(jb.J_reduced);
                const double scale = full.spectral_radius();
                std::size_t zeros = 0;
                for (const auto& v : full.values) zeros += std::abs(v) <= 1e-8 * scale;
                CHECK(zeros == 5);
                // Nonzero part of the 10x10 spectrum equals the 5x5 spectrum.
                std::vector<num::Complex> nz;
                for (const auto& v : full.values)
                    if (std::abs(v) > 1e-8 * scale) nz.push_back(v);
                REQUIRE(nz.size() == red.size());
                for (const auto& v : red.values) {
                    double best = 1e300;
                    for (const auto& w : nz) best = std::min(best, std::abs(v - w));
                    CHECK(best < 1e-6 * std::max(1.0, scale));
                }
            }
        }
    }
}

TEST_CASE("z-double-prime: gradient law gives -gain z") {
    const auto b = squared_bundle({1.0, 2.0, 1.5, 0.7, 2.2}, 1.7);
    const Vector z = edge_vector_stack(kG, realize_two_cycles(b.lengths())[0].x());
    const auto zd = zdprime_vectors(b, z);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t c = 0; c < 2; ++c) CHECK(zd[i][c] == doctest::Approx(-1.7 * z[2 * i + c]));
}

TEST_CASE("factorisations refuse non-equilibrium input") {
    const auto b = squared_bundle({1.0, 2.0, 1.5, 0.7, 2.2});
    const Vector z = edge_vector_stack(kG, {0, 0, 1, 0.2, 0.3, 1.1, -0.9, 0.4});
    CHECK_THROWS_AS(jacobian_z(b, z), DomainError);
    CHECK_THROWS_AS(jacobian_d(b, z), DomainError);
    CHECK_THROWS_AS(reduced_J(b, z), DomainError);
}

TEST_CASE("reduced J: corank at the singular witness, full rank generically") {
    const auto s = make_singular_lengths(1.0, 5.0, 4.0, -2.0);
    const auto b = squared_bundle(s.d.values());
    const Vector zw = edge_vector_stack(kG, s.witness.x());
    const Matrix j = reduced_J(b, zw);
    CHECK(num::rank_tol(j, 1e-8) == 4);

    const auto g = squared_bundle({1.0, 2.0, 1.5, 0.7, 2.2});
    const Vector zg = edge_vector_stack(kG, realize_two_cycles(g.lengths())[0].x());
    const Matrix jg = reduced_J(g, zg);
    CHECK(num::rank_tol(jg, 1e-8) == 5);
    for (const auto& v : num::eigenvalues(jg).values) CHECK(std::abs(v.real()) > 1e-6);

    // With z1 parallel to z5 and additionally z2 = 0 the product loses more rank.
    std::vector<Vec2> zz{{1, 0}, {0, 0}, {-1, 0.5}, {1, 1}, {-2, 0}};
    std::vector<Vec2> zp;
    for (const Vec2& v : zz) zp.push_back({2 * v[0], 2 * v[1]});
    const Matrix raw = block_rows(zz) * num::kron_I2(edge_adjacency(kG)) * block_rows(zp).transpose();
    CHECK(5 - num::rank_tol(raw, 1e-8) > 1);
}

TEST_CASE("left-kernel equivalence at a singular witness") {
    const auto s = make_singular_lengths(1.0, 5.0, 4.0, -2.0);
    const auto b = squared_bundle(s.d.values());
    const Vector z = edge_vector_stack(kG, s.witness.x());
    const Matrix dz = jacobian_z(b, z), dd = jacobian_d(b, z);
    const auto wz = num::left_nullspace(dz, 1e-9);
    const auto wd = num::left_nullspace(dd, 1e-9);
    CHECK(wz.size() == 6);
    for (const Vector& w : wz) CHECK(num::norm_inf(dd.transpose() * w) < 1e-8);
    for (const Vector& w : wd) CHECK(num::norm_inf(dz.transpose() * w) < 1e-8);
}

TEST_CASE("SE(2) equivariance of the vector field") {
    std::mt19937_64 rng(36);
    std::uniform_real_distribution<double> ang(-3.14159, 3.14159);
    const auto b = squared_bundle({1.0, 2.0, 1.5, 0.7, 2.2});
    for (int trial = 0; trial < 100; ++trial) {
        const Vector x = oracle::random_positions(rng, 4);
        const double th = ang(rng);
        const double c = std::cos(th), sn = std::sin(th);
        const Vector t = oracle::random_vector(rng, 2, -5.0, 5.0);
        Vector y(8);
        for (std::size_t i = 0; i < 4; ++i) {
            y[2 * i] = c * x[2 * i] - sn * x[2 * i + 1] + t[0];
            y[2 * i + 1] = sn * x[2 * i] + c * x[2 * i + 1] + t[1];
        }
        const Vector fx = b.F_x(x), fy = b.F_x(y);
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(std::abs(fy[2 * i] - (c * fx[2 * i] - sn * fx[2 * i + 1])) <= 1e-12 * std::max(1.0, num::norm_inf(fx)));
            CHECK(std::abs(fy[2 * i + 1] - (sn * fx[2 * i] + c * fx[2 * i + 1])) <=
                  1e-12 * std::max(1.0, num::norm_inf(fx)));
        }
    }
}

TEST_CASE("decentralisation: unobserved agents do not affect a velocity") {
    std::mt19937_64 rng(37);
    const auto b = squared_bundle({1.0, 2.0, 1.5, 0.7, 2.2});
    for (int trial = 0; trial < 20; ++trial) {
        const Vector x = oracle::random_positions(rng, 4);
        const Vector v = b.F_x(x);
        for (std::size_t i = 0; i < 4; ++i) {
            std::vector<bool> seen(4, false);
            seen[i] = true;
            for (std::size_t k : kG.outgoing(i)) seen[kG.edge(k).target] = true;
            Vector y = x;
            for (std::size_t j = 0; j < 4; ++j)
                if (!seen[j]) y[2 * j] = y[2 * j + 1] = 0.0;
            const Vector w = b.F_x(y);
            CHECK(w[2 * i] == v[2 * i]);
            CHECK(w[2 * i + 1] == v[2 * i + 1]);
        }
    }
}

TEST_CASE("cycle sums are conserved along z-trajectories") {
    const auto b = squared_bundle({1.0, 2.0, 1.5, 0.7, 2.2});
    const Vector z0 = edge_vector_stack(kG, {0.1, -0.2, 1.2, 0.3, 0.2, 1.4, -0.8, 0.5});
    num::OdeOptions opts;
    opts.step = 1e-3;
    opts.sample_every = 100;
    const auto traj = num::integrate_ode(b.field_z(), z0, 2.0, opts);
    for (const Vector& z : traj.states) {
        for (std::size_t c = 0; c < 2; ++c) {
            CHECK(std::abs(z[c] + z[2 + c] + z[4 + c]) < 1e-8);
            CHECK(std::abs(z[4 + c] + z[6 + c] + z[8 + c]) < 1e-8);
        }
    }
}

TEST_CASE("gradient flow from a perturbed design framework converges to a design") {
    const auto b = squared_bundle({1.0, 2.0, 1.5, 0.7, 2.2});
    Vector x = realize_two_cycles(b.lengths())[0].x();
    x[4] += 0.05;
    x[7] -= 0.04;
    num::OdeOptions opts;
    opts.step = 1e-2;
    opts.sample_every = 1000;
    const auto traj = num::integrate_ode(b.field_x(), x, 80.0, opts);
    const Vector e = edge_errors(Framework(kG, traj.final_state()), b.lengths());
    CHECK(num::norm_inf(e) < 1e-8);
}
