#include "formation/errors.hpp"
#include "formation/numkernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace formation::num {
namespace {

constexpr int kMaxSweeps = 80;

std::vector<Vector> null_columns(const SvdResult& s, double tol) {
    const double smax = s.sigma.empty() ? 0.0 : *std::max_element(s.sigma.begin(), s.sigma.end());
    std::vector<Vector> basis;
    for (std::size_t j = 0; j < s.sigma.size(); ++j)
        if (smax == 0.0 || s.sigma[j] <= tol * smax) basis.push_back(s.v.col(j));
    return basis;
}

}  // namespace

SvdResult svd(const Matrix& m) {
    if (!m.all_finite()) throw DomainError("svd of a matrix with non-finite entries");
    const std::size_t p = m.rows();
    const std::size_t q = m.cols();
    Matrix u = m;
    Matrix v = Matrix::identity(q);
    const double eps = std::numeric_limits<double>::epsilon();
    // Columns below this squared norm are numerically zero; rotating them
    // against each other only stirs rounding noise.
    const double tiny = m.frobenius() * m.frobenius() * (16.0 * eps) * (16.0 * eps);

    bool rotated = true;
    int sweep = 0;
    while (rotated) {
        if (++sweep > kMaxSweeps) throw ConvergenceError("one-sided Jacobi SVD did not converge");
        rotated = false;
        for (std::size_t i = 0; i + 1 < q; ++i) {
            for (std::size_t j = i + 1; j < q; ++j) {
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                for (std::size_t k = 0; k < p; ++k) {
                    alpha += u(k, i) * u(k, i);
                    beta += u(k, j) * u(k, j);
                    gamma += u(k, i) * u(k, j);
                }
                if (gamma == 0.0 || alpha <= tiny || beta <= tiny || std::abs(gamma) <= eps * std::sqrt(alpha * beta))
                    continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t k = 0; k < p; ++k) {
                    const double a = u(k, i), b = u(k, j);
                    u(k, i) = c * a - s * b;
                    u(k, j) = s * a + c * b;
                }
                for (std::size_t k = 0; k < q; ++k) {
                    const double a = v(k, i), b = v(k, j);
                    v(k, i) = c * a - s * b;
                    v(k, j) = s * a + c * b;
                }
            }
        }
    }

    SvdResult out;
    out.sigma.resize(q);
    for (std::size_t j = 0; j < q; ++j) {
        double nrm = 0.0;
        for (std::size_t k = 0; k < p; ++k) nrm += u(k, j) * u(k, j);
        nrm = std::sqrt(nrm);
        out.sigma[j] = nrm;
        if (nrm > 0.0)
            for (std::size_t k = 0; k < p; ++k) u(k, j) /= nrm;
    }
    out.u = std::move(u);
    out.v = std::move(v);
    return out;
}

Vector singular_values(const Matrix& m) {
    // Tall orientation, so no surplus zero columns are reported.
    Vector s = m.rows() >= m.cols() ? svd(m).sigma : svd(m.transpose()).sigma;
    std::sort(s.begin(), s.end(), std::greater<>());
    s.resize(std::min(m.rows(), m.cols()));
    return s;
}

std::size_t rank_tol(const Matrix& m, double tol) {
    if (tol <= 0.0) throw DomainError("rank tolerance must be positive");
    if (m.rows() == 0 || m.cols() == 0) return 0;
    const Vector s = singular_values(m);
    if (s.empty() || s.front() == 0.0) return 0;
    return static_cast<std::size_t>(
        std::count_if(s.begin(), s.end(), [&](double x) { return x > tol * s.front(); }));
}

std::vector<Vector> nullspace(const Matrix& m, double tol) {
    if (tol <= 0.0) throw DomainError("nullspace tolerance must be positive");
    if (m.cols() == 0) return {};
    if (m.rows() == 0) {
        std::vector<Vector> basis;
        for (std::size_t j = 0; j < m.cols(); ++j) {
            Vector e(m.cols(), 0.0);
            e[j] = 1.0;
            basis.push_back(e);
        }
        return basis;
    }
    return null_columns(svd(m), tol);
}

std::vector<Vector> left_nullspace(const Matrix& m, double tol) { return nullspace(m.transpose(), tol); }

Vector lstsq(const Matrix& m, const Vector& b, double rcond) {
    if (b.size() != m.rows()) throw DimensionError("lstsq right-hand side length mismatch");
    const SvdResult s = svd(m);
    const double smax = s.sigma.empty() ? 0.0 : *std::max_element(s.sigma.begin(), s.sigma.end());
    Vector x(m.cols(), 0.0);
    if (smax == 0.0) return x;
    for (std::size_t j = 0; j < s.sigma.size(); ++j) {
        if (s.sigma[j] <= rcond * smax) continue;
        double c = 0.0;
        for (std::size_t k = 0; k < m.rows(); ++k) c += s.u(k, j) * b[k];
        c /= s.sigma[j];
        for (std::size_t k = 0; k < m.cols(); ++k) x[k] += c * s.v(k, j);
    }
    return x;
}

}  // namespace formation::num
