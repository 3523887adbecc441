#pragma once

#include "formation/graph.hpp"
#include "formation/numkernel.hpp"

#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

namespace formation {

using Vec2 = std::array<double, 2>;

inline double dot2(const Vec2& a, const Vec2& b) { return a[0] * b[0] + a[1] * b[1]; }
inline double cross2(const Vec2& a, const Vec2& b) { return a[0] * b[1] - a[1] * b[0]; }

/// Positions of the n agents, stacked as (x_1, y_1, x_2, y_2, ...).
class Framework {
public:
    Framework(FormationGraph graph, num::Vector x);

    const FormationGraph& graph() const noexcept { return graph_; }
    const num::Vector& x() const noexcept { return x_; }
    Vec2 point(std::size_t i) const { return {x_.at(2 * i), x_.at(2 * i + 1)}; }

private:
    FormationGraph graph_;
    num::Vector x_;
};

struct EdgeVectors {
    std::vector<Vec2> z;  // z_i = x(target) - x(origin)
    num::Matrix Dz;       // m x 2m, block diagonal with z_i^T
};

/// Block-diagonal m x 2m matrix with row i equal to z_i^T in columns 2i, 2i+1.
num::Matrix block_rows(const std::vector<Vec2>& z);

/// Stacked edge vectors (length 2m) computed directly from positions.
num::Vector edge_vector_stack(const FormationGraph& g, const num::Vector& x);

EdgeVectors edge_vectors(const Framework& f);

enum class LengthConvention { squared, plain };

std::string_view to_string(LengthConvention c);

/// Target lengths, stored squared. The convention records how edge errors
/// are formed: squared -> |z|^2 - d, plain -> |z| - sqrt(d).
class TargetLengths {
public:
    static TargetLengths squared(num::Vector d_squared);
    static TargetLengths plain(const num::Vector& lengths);

    TargetLengths with_convention(LengthConvention c) const;

    std::size_t size() const noexcept { return d_.size(); }
    const num::Vector& values() const noexcept { return d_; }
    double operator[](std::size_t i) const { return d_.at(i); }
    num::Vector plain_values() const;
    LengthConvention convention() const noexcept { return convention_; }

    /// Copy with d_i shifted by `delta` (squared units).
    TargetLengths shifted(std::size_t i, double delta) const;

private:
    TargetLengths(num::Vector d, LengthConvention c);
    num::Vector d_;
    LengthConvention convention_ = LengthConvention::squared;
};

num::Vector edge_errors(const Framework& f, const TargetLengths& d);

/// R = D(z) A_m^(2), the Jacobian of the squared-length map up to a factor 2.
num::Matrix rigidity_matrix(const Framework& f);

bool is_infinitesimally_rigid(const Framework& f, double tol = 1e-9);

/// Rigid, and dropping any single edge destroys infinitesimal rigidity.
bool is_minimally_rigid(const Framework& f, double tol = 1e-9);

/// The four realisations of 2-cycles lengths in canonical gauge: x_1 at the
/// origin, z_1 along +x, x_3 and x_4 from two-circle intersections with sign
/// pairs (+,+), (+,-), (-,-), (-,+). Mirror pairs are (0, 2) and (1, 3).
/// Throws InfeasibleError naming the violated triangle.
std::vector<Framework> realize_two_cycles(const TargetLengths& d);

/// Intersection of the circles |p - c1| = r1 and |p - c2| = r2 on the side
/// chosen by `side` (+1 left of c1->c2, -1 right).
Vec2 circle_intersection(const Vec2& c1, double r1, const Vec2& c2, double r2, int side,
                         std::string_view what);

struct SingularLengths {
    TargetLengths d;
    Framework witness;     // z_1 parallel to z_5
    bool superposed = false;  // x_4 coincides with x_2
};

/// A point of the singular set: realise the triangle (d1, d2, d3) with x_1 at
/// the origin and x_2 on +x, then place x_4 = x_1 + s5 * z_1/|z_1|, so a
/// positive s5 makes z_5 point along z_1. `side` picks the half-plane of x_3.
SingularLengths make_singular_lengths(double d1, double d2, double d3, double s5, int side = 1);

/// True iff some realisation of d has |z_1 x z_5| <= tol |z_1||z_5|.
bool in_singular_set(const TargetLengths& d, double tol = 1e-9);

}  // namespace formation
