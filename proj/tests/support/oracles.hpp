#pragma once

// Independent reference computations shared by the test binaries. Nothing
// here calls into the library's numerical kernels.

#include "formation/numkernel.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace oracle {

using formation::num::Matrix;
using formation::num::Vector;

inline Matrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Matrix m(r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) m(i, j) = u(rng);
    return m;
}

inline Vector random_vector(std::mt19937_64& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Vector v(n);
    for (double& x : v) x = u(rng);
    return v;
}

// Plain triple loop, no library call.
inline Matrix matmul(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
            c(i, j) = s;
        }
    return c;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    double w = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) w = std::max(w, std::abs(a(i, j) - b(i, j)));
    return w;
}

inline double max_abs_diff(const Vector& a, const Vector& b) {
    double w = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) w = std::max(w, std::abs(a[i] - b[i]));
    return w;
}

// Random rotation by Gram-Schmidt on a random matrix.
inline Matrix random_orthogonal(std::mt19937_64& rng, std::size_t n) {
    Matrix q = random_matrix(rng, n, n);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < j; ++k) {
            double d = 0.0;
            for (std::size_t i = 0; i < n; ++i) d += q(i, j) * q(i, k);
            for (std::size_t i = 0; i < n; ++i) q(i, j) -= d * q(i, k);
        }
        double nrm = 0.0;
        for (std::size_t i = 0; i < n; ++i) nrm += q(i, j) * q(i, j);
        nrm = std::sqrt(nrm);
        for (std::size_t i = 0; i < n; ++i) q(i, j) /= nrm;
    }
    return q;
}

// Companion matrix of the monic polynomial with the given real roots.
inline Matrix companion_from_roots(const std::vector<double>& roots) {
    std::vector<double> c{1.0};  // coefficients, highest degree first
    for (double r : roots) {
        std::vector<double> next(c.size() + 1, 0.0);
        for (std::size_t i = 0; i < c.size(); ++i) {
            next[i] += c[i];
            next[i + 1] -= r * c[i];
        }
        c = next;
    }
    const std::size_t n = roots.size();
    Matrix m(n, n);
    for (std::size_t j = 0; j < n; ++j) m(0, j) = -c[j + 1];
    for (std::size_t i = 1; i < n; ++i) m(i, i - 1) = 1.0;
    return m;
}

// 2-cycles framework positions stacked (x1, y1, ..., x4, y4).
inline Vector random_positions(std::mt19937_64& rng, std::size_t n, double half = 2.0) {
    return random_vector(rng, 2 * n, -half, half);
}

}  // namespace oracle
