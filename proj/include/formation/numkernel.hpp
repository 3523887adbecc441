#pragma once

// Dense linear algebra and small numerical-analysis kernel. Sized for the
// matrices this project manipulates (a few dozen rows at most), so every
// routine favours robustness over asymptotic speed.

#include <complex>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

namespace formation::num {

using Vector = std::vector<double>;
using Complex = std::complex<double>;
using VectorMap = std::function<Vector(const Vector&)>;

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);
    static Matrix from_columns(const std::vector<Vector>& cols);
    static Matrix from_rows(const std::vector<Vector>& rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool square() const noexcept { return rows_ == cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<const double> data() const noexcept { return data_; }
    Vector row(std::size_t r) const;
    Vector col(std::size_t c) const;

    Matrix transpose() const;
    double frobenius() const;
    double max_abs() const;
    bool all_finite() const;

    Matrix& operator+=(const Matrix& o);
    Matrix& operator-=(const Matrix& o);
    Matrix& operator*=(double s);

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);
Matrix operator*(const Matrix& a, const Matrix& b);
Vector operator*(const Matrix& a, const Vector& x);

// Vector helpers.
double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm_inf(std::span<const double> a);
Vector axpy(double alpha, const Vector& x, Vector y);  // alpha*x + y
Vector scaled(Vector x, double s);
Vector subtract(const Vector& a, const Vector& b);

/// Eigenvalues with algebraic multiplicity, sorted descending by real part,
/// then by imaginary part.
struct Spectrum {
    std::vector<Complex> values;

    std::size_t size() const noexcept { return values.size(); }
    double max_real() const;
    double spectral_radius() const;
    /// Number of eigenvalues with real part above `tol` (strictly unstable).
    std::size_t count_positive(double tol = 0.0) const;
    bool conjugate_paired(double tol = 1e-9) const;
};

/// All eigenvalues of a square matrix (n <= 64): balancing, Householder
/// Hessenberg reduction and Francis double-shift QR to real Schur form.
Spectrum eigenvalues(const Matrix& m);

struct SvdResult {
    Matrix u;                 // rows x k, orthonormal columns where sigma > 0
    Vector sigma;             // k = cols entries, unsorted column order
    Matrix v;                 // cols x cols orthogonal
};

/// One-sided Jacobi SVD. Singular values are returned per column of `v`
/// (not sorted); when rows < cols the surplus values are zero.
SvdResult svd(const Matrix& m);

/// Singular values sorted descending, min(rows, cols) of them.
Vector singular_values(const Matrix& m);

/// Number of singular values above tol * (largest singular value).
std::size_t rank_tol(const Matrix& m, double tol = 1e-9);

/// Orthonormal basis of {v : m v = 0} using a relative cutoff.
std::vector<Vector> nullspace(const Matrix& m, double tol = 1e-9);

/// Orthonormal basis of {w : w^T m = 0}.
std::vector<Vector> left_nullspace(const Matrix& m, double tol = 1e-9);

/// Kronecker product with the 2x2 identity.
Matrix kron_I2(const Matrix& m);

double determinant(const Matrix& m);

/// Minimum-norm least-squares solution of m x = b with a relative cutoff on
/// singular values.
Vector lstsq(const Matrix& m, const Vector& b, double rcond = 1e-12);

// Finite differences. Steps scale with max(1, |x_j|).
Matrix fd_jacobian(const VectorMap& f, const Vector& x, double h = 1e-6);
Vector fd_second_directional(const VectorMap& f, const Vector& x, const Vector& v,
                             double h = 1e-4);

struct NewtonOptions {
    int max_iter = 60;
    double tol = 1e-12;
    std::function<Matrix(const Vector&)> jacobian;  // central FD when empty
    bool line_search = true;
};

struct NewtonResult {
    Vector x;
    int iterations = 0;
    double residual = 0.0;
};

/// Newton iteration with a least-squares step, so rectangular and
/// rank-deficient systems (continuous symmetries) are handled. Throws
/// ConvergenceError carrying the last iterate.
NewtonResult newton_root(const VectorMap& f, Vector x0, const NewtonOptions& opts = {});

enum class OdeMethod { rk4, euler };

struct OdeOptions {
    double step = 1e-3;
    OdeMethod method = OdeMethod::rk4;
    std::size_t sample_every = 1;
    /// Optional early exit, checked after every step.
    std::function<bool(double, const Vector&)> stop;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<Vector> states;
    double final_field_norm = 0.0;
    bool stopped_early = false;

    const Vector& final_state() const { return states.back(); }
};

Trajectory integrate_ode(const VectorMap& f, Vector x0, double t_end, const OdeOptions& opts = {});

Vector rk4_step(const VectorMap& f, const Vector& x, double h);

}  // namespace formation::num
