#include "formation/errors.hpp"
#include "formation/rigidity.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace formation;
using num::Matrix;
using num::Vector;

namespace {

Framework two_cycles_at(Vector x) { return Framework(FormationGraph::two_cycles(), std::move(x)); }

// Squared distance between stacked points i and j, computed by hand.
double sqdist(const Vector& x, std::size_t i, std::size_t j) {
    const double dx = x[2 * i] - x[2 * j], dy = x[2 * i + 1] - x[2 * j + 1];
    return dx * dx + dy * dy;
}

}  // namespace

TEST_CASE("edge_vectors: direct subtraction") {
    const auto ev = edge_vectors(two_cycles_at({0, 0, 1, 0, 0, 1, -1, 0}));
    const std::vector<Vec2> expected{{1, 0}, {-1, 1}, {0, -1}, {1, 1}, {-1, 0}};
    REQUIRE(ev.z.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) CHECK(ev.z[i] == expected[i]);
    CHECK(ev.Dz.rows() == 5);
    CHECK(ev.Dz.cols() == 10);
    CHECK(ev.Dz(3, 6) == 1.0);
    CHECK(ev.Dz(3, 7) == 1.0);
    CHECK(ev.Dz(3, 5) == 0.0);

    const auto zero = edge_vectors(two_cycles_at(Vector(8, 2.5)));
    for (const Vec2& z : zero.z) CHECK(z == Vec2{0, 0});

    std::mt19937_64 rng(1);
    const Vector x = oracle::random_positions(rng, 4);
    Vector xt = x;
    for (std::size_t i = 0; i < 4; ++i) {
        xt[2 * i] += 5.0;
        xt[2 * i + 1] += 7.0;
    }
    const auto a = edge_vectors(two_cycles_at(x)), b = edge_vectors(two_cycles_at(xt));
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(std::abs(a.z[i][0] - b.z[i][0]) < 1e-12);
        CHECK(std::abs(a.z[i][1] - b.z[i][1]) < 1e-12);
    }
}

TEST_CASE("edge_vectors agree with the Kronecker incidence product") {
    std::mt19937_64 rng(2);
    const Matrix am2 = num::kron_I2(mixed_adjacency(FormationGraph::two_cycles()));
    for (int trial = 0; trial < 50; ++trial) {
        const Vector x = oracle::random_positions(rng, 4);
        const auto ev = edge_vectors(two_cycles_at(x));
        const Vector z = am2 * x;
        for (std::size_t i = 0; i < 5; ++i) {
            CHECK(std::abs(ev.z[i][0] - z[2 * i]) <= 1e-14);
            CHECK(std::abs(ev.z[i][1] - z[2 * i + 1]) <= 1e-14);
        }
    }
}

TEST_CASE("edge_errors") {
    const auto tri = FormationGraph::from_one_indexed(2, {{1, 2}});
    CHECK(edge_errors(Framework(tri, {0, 0, 1, 0}), TargetLengths::squared({1.0}))[0] == 0.0);
    CHECK(edge_errors(Framework(tri, {0, 0, 2, 0}), TargetLengths::squared({1.0}))[0] == doctest::Approx(3.0));
    // Plain convention: |z| - sqrt(d).
    CHECK(edge_errors(Framework(tri, {0, 0, 2, 0}), TargetLengths::plain({1.0}))[0] == doctest::Approx(1.0));
    CHECK_THROWS_AS(edge_errors(Framework(tri, {0, 0, 2, 0}), TargetLengths::squared({1.0, 2.0})), DimensionError);
    CHECK_THROWS_AS(TargetLengths::squared({1.0, -2.0}), InfeasibleError);
}

TEST_CASE("rigidity matrix equals D(z) A_m^(2) and the reference layout up to sign") {
    std::mt19937_64 rng(3);
    const auto g = FormationGraph::two_cycles();
    const Matrix am2 = num::kron_I2(mixed_adjacency(g));
    for (int trial = 0; trial < 100; ++trial) {
        const Framework f = two_cycles_at(oracle::random_positions(rng, 4));
        const Matrix r = rigidity_matrix(f);
        const Matrix dz = edge_vectors(f).Dz;
        CHECK(oracle::max_abs_diff(r, oracle::matmul(dz, am2)) <= 1e-12);
    }
    // Published row pattern: z_i^T at the origin block, -z_i^T at the target
    // block; our R is its negative.
    const Framework f = two_cycles_at({0.1, 0.2, 1.3, -0.4, 0.5, 1.6, -0.7, 0.8});
    const auto z = edge_vectors(f).z;
    const std::vector<std::pair<std::size_t, std::size_t>> ot{{0, 1}, {1, 2}, {2, 0}, {3, 2}, {0, 3}};
    const Matrix r = rigidity_matrix(f);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t c = 0; c < 2; ++c) {
            CHECK(-r(i, 2 * ot[i].first + c) == z[i][c]);
            CHECK(-r(i, 2 * ot[i].second + c) == -z[i][c]);
        }
}

TEST_CASE("infinitesimal and minimal rigidity") {
    const Framework generic = two_cycles_at({0.0, 0.0, 1.3, 0.1, 0.4, 1.1, -0.8, 0.6});
    CHECK(num::rank_tol(rigidity_matrix(generic)) == 5);
    CHECK(is_infinitesimally_rigid(generic));
    CHECK(is_minimally_rigid(generic));

    // z1 parallel to z5, the rest generic.
    const Framework parallel = two_cycles_at({0, 0, -1, 0, 0, -2, 2, 0});
    CHECK(is_infinitesimally_rigid(parallel));

    const Framework line = two_cycles_at({0, 0, 1, 0, 2.5, 0, -1, 0});
    CHECK(num::rank_tol(rigidity_matrix(line)) < 5);
    CHECK(!is_infinitesimally_rigid(line));

    // Extra edge 2 -> 4 keeps the graph valid and rigid after any single removal of it.
    const auto six = FormationGraph::from_one_indexed(4, {{1, 2}, {2, 3}, {3, 1}, {4, 3}, {1, 4}, {2, 4}});
    const Framework redundant(six, generic.x());
    CHECK(is_infinitesimally_rigid(redundant));
    CHECK(!is_minimally_rigid(redundant));

    const Framework tri(FormationGraph::triangle(), {0, 0, 1, 0, 0.3, 0.9});
    CHECK(is_minimally_rigid(tri));
}

TEST_CASE("rigidity rank is invariant under rigid motions") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> ang(-3.14, 3.14);
    for (int trial = 0; trial < 30; ++trial) {
        const Vector x = oracle::random_positions(rng, 4);
        const double th = ang(rng);
        Vector y(8);
        for (std::size_t i = 0; i < 4; ++i) {
            y[2 * i] = std::cos(th) * x[2 * i] - std::sin(th) * x[2 * i + 1] + 3.0;
            y[2 * i + 1] = std::sin(th) * x[2 * i] + std::cos(th) * x[2 * i + 1] - 1.0;
        }
        CHECK(num::rank_tol(rigidity_matrix(two_cycles_at(x))) == num::rank_tol(rigidity_matrix(two_cycles_at(y))));
    }
}

TEST_CASE("D(z) has full row rank iff no edge vector vanishes") {
    const auto ev = edge_vectors(two_cycles_at({0.0, 0.0, 1.3, 0.1, 0.4, 1.1, -0.8, 0.6}));
    CHECK(num::rank_tol(ev.Dz) == 5);
    // x4 on top of x3 makes z4 = 0.
    const auto ev0 = edge_vectors(two_cycles_at({0.0, 0.0, 1.3, 0.1, 0.4, 1.1, 0.4, 1.1}));
    CHECK(num::rank_tol(ev0.Dz) == 4);
}

TEST_CASE("realisations of 2-cycles lengths") {
    std::mt19937_64 rng(5);
    int checked = 0;
    while (checked < 20) {
        const Vector x = oracle::random_positions(rng, 4);
        Vector d{sqdist(x, 0, 1), sqdist(x, 1, 2), sqdist(x, 2, 0), sqdist(x, 3, 2), sqdist(x, 0, 3)};
        if (*std::min_element(d.begin(), d.end()) < 0.05) continue;
        const auto frames = realize_two_cycles(TargetLengths::squared(d));
        REQUIRE(frames.size() == 4);
        for (const Framework& f : frames) {
            const Vector e = edge_errors(f, TargetLengths::squared(d));
            CHECK(num::norm_inf(e) <= 1e-10 * std::max(1.0, num::norm_inf(d)));
            CHECK(f.x()[0] == 0.0);
            CHECK(f.x()[1] == 0.0);
            CHECK(f.x()[3] == 0.0);
            CHECK(f.x()[2] > 0.0);
        }
        // Mirror pairs (0, 2) and (1, 3): reflections through the x axis.
        for (auto [a, b] : {std::pair{0, 2}, {1, 3}})
            for (std::size_t k = 0; k < 4; ++k) {
                CHECK(std::abs(frames[a].x()[2 * k] - frames[b].x()[2 * k]) < 1e-12);
                CHECK(std::abs(frames[a].x()[2 * k + 1] + frames[b].x()[2 * k + 1]) < 1e-12);
            }
        ++checked;
    }
    // Unit lengths: one realisation folds x4 onto x2.
    const auto unit = realize_two_cycles(TargetLengths::squared({1, 1, 1, 1, 1}));
    bool folded = false;
    for (const Framework& f : unit) folded |= sqdist(f.x(), 1, 3) < 1e-20;
    CHECK(folded);
    CHECK_THROWS_AS(realize_two_cycles(TargetLengths::squared({1, 4, 9, 1, 1})), InfeasibleError);
    CHECK_THROWS_AS(realize_two_cycles(TargetLengths::squared({1, 1, 1, 100, 1})), InfeasibleError);
}

TEST_CASE("make_singular_lengths and in_singular_set") {
    const auto s = make_singular_lengths(1.0, 5.0, 4.0, -2.0);
    const Vector expected{1, 5, 4, 8, 4};
    CHECK(oracle::max_abs_diff(s.d.values(), expected) < 1e-12);
    CHECK(!s.superposed);
    const auto z = edge_vectors(s.witness).z;
    CHECK(std::abs(cross2(z[0], z[4])) < 1e-12);
    CHECK(in_singular_set(s.d));

    // The reference witness is the canonical one rotated by pi.
    const Vector reference{0, 0, -1, 0, 0, -2, 2, 0};
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = i + 1; j < 4; ++j)
            CHECK(std::abs(sqdist(reference, i, j) - sqdist(s.witness.x(), i, j)) < 1e-12);

    // A positive z5 length equal to |z1| puts x4 on x2.
    const auto sup = make_singular_lengths(1.0, 5.0, 4.0, 1.0);
    CHECK(sup.superposed);
    CHECK(in_singular_set(sup.d));

    CHECK_THROWS_AS(make_singular_lengths(1.0, 4.0, 9.0, 1.0), InfeasibleError);
    CHECK_THROWS_AS(make_singular_lengths(1.0, 5.0, 4.0, 0.0), InfeasibleError);

    CHECK(!in_singular_set(TargetLengths::plain({2.0, 2.6, 2.0, 1.4, 3.3}), 1e-6));
    // Unit lengths fold x4 onto x2 in one realisation, so z5 = z1 there.
    CHECK(in_singular_set(TargetLengths::squared({1, 1, 1, 1, 1}), 1e-6));
    CHECK(!in_singular_set(TargetLengths::squared({1, 1, 1, 1.2, 0.9}), 1e-6));
}
