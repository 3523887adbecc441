#include "formation/errors.hpp"
#include "formation/numkernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace formation::num {

Matrix fd_jacobian(const VectorMap& f, const Vector& x, double h) {
    if (h <= 0.0) throw DomainError("finite-difference step must be positive");
    const Vector f0 = f(x);
    Matrix jac(f0.size(), x.size());
    Vector xp = x;
    for (std::size_t j = 0; j < x.size(); ++j) {
        // Round the step to a representable increment so x + step - x == step.
        volatile double probe = x[j] + h * std::max(1.0, std::abs(x[j]));
        const double step = probe - x[j];
        xp[j] = x[j] + step;
        const Vector fp = f(xp);
        xp[j] = x[j] - step;
        const Vector fm = f(xp);
        xp[j] = x[j];
        if (fp.size() != f0.size() || fm.size() != f0.size())
            throw DimensionError("vector map changed output length");
        for (std::size_t i = 0; i < f0.size(); ++i) jac(i, j) = (fp[i] - fm[i]) / (2.0 * step);
    }
    return jac;
}

Vector fd_second_directional(const VectorMap& f, const Vector& x, const Vector& v, double h) {
    if (h <= 0.0) throw DomainError("finite-difference step must be positive");
    if (v.size() != x.size()) throw DimensionError("direction length mismatch");
    const double step = h * std::max(1.0, norm_inf(x));
    const Vector fp = f(axpy(step, v, x));
    const Vector fm = f(axpy(-step, v, x));
    const Vector f0 = f(x);
    Vector out(f0.size());
    for (std::size_t i = 0; i < f0.size(); ++i) out[i] = (fp[i] - 2.0 * f0[i] + fm[i]) / (step * step);
    return out;
}

NewtonResult newton_root(const VectorMap& f, Vector x0, const NewtonOptions& opts) {
    Vector x = std::move(x0);
    Vector fx = f(x);
    double res = norm_inf(fx);
    for (int it = 0; it <= opts.max_iter; ++it) {
        if (!std::isfinite(res)) throw ConvergenceError("Newton iterate became non-finite", x);
        if (res <= opts.tol) return {x, it, res};
        if (it == opts.max_iter) break;
        const Matrix jac = opts.jacobian ? opts.jacobian(x) : fd_jacobian(f, x);
        const Vector step = lstsq(jac, scaled(fx, -1.0));
        double lambda = 1.0;
        Vector trial = axpy(lambda, step, x);
        Vector ft = f(trial);
        if (opts.line_search) {
            // Backtrack on the residual norm; accept the last try regardless.
            for (int k = 0; k < 12 && !(norm2(ft) < norm2(fx)); ++k) {
                lambda *= 0.5;
                trial = axpy(lambda, step, x);
                ft = f(trial);
            }
        }
        x = std::move(trial);
        fx = std::move(ft);
        res = norm_inf(fx);
    }
    std::ostringstream msg;
    msg << "Newton did not reach tolerance " << opts.tol << " in " << opts.max_iter
        << " iterations (residual " << res << ")";
    throw ConvergenceError(msg.str(), x);
}

Vector rk4_step(const VectorMap& f, const Vector& x, double h) {
    const Vector k1 = f(x);
    const Vector k2 = f(axpy(0.5 * h, k1, x));
    const Vector k3 = f(axpy(0.5 * h, k2, x));
    const Vector k4 = f(axpy(h, k3, x));
    Vector out = x;
    for (std::size_t i = 0; i < x.size(); ++i) out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

Trajectory integrate_ode(const VectorMap& f, Vector x0, double t_end, const OdeOptions& opts) {
    if (opts.step <= 0.0) throw DomainError("ODE step must be positive");
    if (t_end < 0.0) throw DomainError("ODE end time must be non-negative");
    const std::size_t every = std::max<std::size_t>(1, opts.sample_every);
    Trajectory traj;
    traj.times.push_back(0.0);
    traj.states.push_back(x0);

    Vector x = std::move(x0);
    const auto n_steps = static_cast<std::size_t>(std::ceil(t_end / opts.step - 1e-12));
    double t = 0.0;
    for (std::size_t k = 1; k <= n_steps; ++k) {
        const double h = std::min(opts.step, t_end - t);
        x = opts.method == OdeMethod::rk4 ? rk4_step(f, x, h) : axpy(h, f(x), x);
        t = (k == n_steps) ? t_end : t + h;
        if (!std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); }))
            throw BlowUpError("state became non-finite at t=" + std::to_string(t), t);
        const bool stop = opts.stop && opts.stop(t, x);
        if (k % every == 0 || k == n_steps || stop) {
            traj.times.push_back(t);
            traj.states.push_back(x);
        }
        if (stop) {
            traj.stopped_early = true;
            break;
        }
    }
    traj.final_field_norm = norm2(f(traj.states.back()));
    return traj;
}

}  // namespace formation::num
