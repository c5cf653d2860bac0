#pragma once

#include <functional>
#include <string>

#include "genprior/linalg.hpp"

namespace genprior {

/// Objective for minimization: returns f(x) and writes ∇f(x) into `grad`.
using Objective = std::function<double(const Vector& x, Vector& grad)>;

struct BfgsOptions {
    double grad_tol = 1e-8;  ///< stop when ‖∇f‖∞ < grad_tol
    int max_iter = 500;
    double armijo_c1 = 1e-4;
    double backtrack = 0.5;
    int max_backtracks = 60;
    /// A step that fails the sufficient-decrease test is still taken when f
    /// changes by at most flat_rel_tol·|f| and the directional derivative
    /// shrinks to within wolfe_c2 of its initial magnitude (approximate Wolfe).
    double flat_rel_tol = 1e-12;
    double wolfe_c2 = 0.9;
};

enum class BfgsStatus { converged, max_iterations, stalled };

struct BfgsResult {
    Vector x;
    double value = 0.0;
    Vector grad;
    int iterations = 0;
    int evaluations = 0;
    double grad_inf_norm = 0.0;
    BfgsStatus status = BfgsStatus::max_iterations;

    bool converged() const { return status == BfgsStatus::converged; }
};

std::string to_string(BfgsStatus s);

/// Dense BFGS on the inverse Hessian with a backtracking Armijo line search.
/// The inverse Hessian starts at the identity and is rescaled by sᵀy/yᵀy after
/// the first accepted step; updates with sᵀy ≤ 0 are skipped. Close to the
/// minimum, where f no longer resolves the decrease, steps are accepted on the
/// approximate Wolfe test. When no step passes either test the best point so
/// far is returned with status `stalled`.
BfgsResult minimize_bfgs(const Objective& f, const Vector& x0, const BfgsOptions& opts = {});

/// Central finite-difference gradient of a scalar function.
Vector finite_difference_gradient(const std::function<double(const Vector&)>& f,
                                  const Vector& x, double h);

}  // namespace genprior
