#include "genprior/optim.hpp"

#include <cmath>
#include <limits>

#include "genprior/errors.hpp"

namespace genprior {

std::string to_string(BfgsStatus s) {
    switch (s) {
        case BfgsStatus::converged: return "converged";
        case BfgsStatus::max_iterations: return "max_iterations";
        case BfgsStatus::stalled: return "stalled";
    }
    return "unknown";
}

BfgsResult minimize_bfgs(const Objective& f, const Vector& x0, const BfgsOptions& opts) {
    if (!x0.allFinite()) throw InvalidArgument("minimize_bfgs: non-finite starting point");
    const Eigen::Index n = x0.size();

    BfgsResult res;
    res.x = x0;
    res.grad = Vector::Zero(n);
    res.value = f(res.x, res.grad);
    res.evaluations = 1;
    if (!std::isfinite(res.value)) throw InvalidArgument("minimize_bfgs: objective not finite at start");

    Matrix h_inv = Matrix::Identity(n, n);
    bool scaled = false;
    Vector trial_grad(n);

    for (res.iterations = 0; res.iterations < opts.max_iter; ++res.iterations) {
        res.grad_inf_norm = res.grad.cwiseAbs().maxCoeff();
        if (n == 0 || res.grad_inf_norm < opts.grad_tol) {
            res.status = BfgsStatus::converged;
            return res;
        }

        Vector dir = -h_inv * res.grad;
        double slope = res.grad.dot(dir);
        if (!(slope < 0.0)) {
            h_inv.setIdentity();
            dir = -res.grad;
            slope = -res.grad.squaredNorm();
        }

        double step = scaled ? 1.0 : std::min(1.0, 1.0 / dir.norm());
        bool accepted = false;
        Vector trial;
        double trial_value = 0.0;
        for (int k = 0; k < opts.max_backtracks; ++k) {
            trial = res.x + step * dir;
            trial_value = f(trial, trial_grad);
            ++res.evaluations;
            if (std::isfinite(trial_value) &&
                trial_value <= res.value + opts.armijo_c1 * step * slope && trial_value < res.value) {
                accepted = true;
                break;
            }
            const double trial_slope = trial_grad.dot(dir);
            if (std::isfinite(trial_value) &&
                trial_value <= res.value + opts.flat_rel_tol * std::abs(res.value) &&
                trial_slope >= opts.wolfe_c2 * slope && trial_slope <= -opts.wolfe_c2 * slope) {
                accepted = true;
                break;
            }
            step *= opts.backtrack;
        }
        if (!accepted) {
            res.grad_inf_norm = res.grad.cwiseAbs().maxCoeff();
            res.status = BfgsStatus::stalled;
            return res;
        }

        const Vector s = trial - res.x;
        const Vector y = trial_grad - res.grad;
        res.x = trial;
        res.value = trial_value;
        res.grad = trial_grad;

        const double sy = s.dot(y);
        if (sy > 1e-300 * s.squaredNorm() && std::isfinite(sy) && sy > 0.0) {
            if (!scaled) {
                h_inv *= sy / y.squaredNorm();
                scaled = true;
            }
            const double rho = 1.0 / sy;
            const Vector hy = h_inv * y;
            const double yhy = y.dot(hy);
            // H⁺ = (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ, expanded.
            h_inv.noalias() += (rho * rho * yhy + rho) * (s * s.transpose()) -
                               rho * (hy * s.transpose() + s * hy.transpose());
        }
    }
    res.grad_inf_norm = res.grad.cwiseAbs().maxCoeff();
    res.status = res.grad_inf_norm < opts.grad_tol ? BfgsStatus::converged
                                                   : BfgsStatus::max_iterations;
    return res;
}

Vector finite_difference_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                                  double h) {
    Vector g(x.size());
    Vector xp = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double xi = x[i];
        xp[i] = xi + h;
        const double fp = f(xp);
        xp[i] = xi - h;
        const double fm = f(xp);
        xp[i] = xi;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

}  // namespace genprior
