#pragma once

#include <cstdint>
#include <vector>

#include "genprior/forward_model.hpp"
#include "genprior/generator.hpp"
#include "genprior/laplace_inference.hpp"
#include "genprior/latent_inference.hpp"

namespace genprior {

/// argmin ‖A x − y‖² + λ‖x‖², from (AᵀA + λI) x = Aᵀy by Cholesky.
/// λ = 0 requires A to have full column rank.
Vector l2_solve(const Matrix& a, const Vector& y, double lambda);

/// logspace(lo, hi, count), endpoints included.
std::vector<double> log_grid(double lo, double hi, int count);

/// 61 values from 1e-8 to 1e2.
std::vector<double> default_lambda_grid();

struct L2OracleResult {
    Vector x;
    double lambda = 0.0;
    double error = 0.0;           ///< ‖x − x_true‖₂ at the chosen λ
    std::vector<double> errors;   ///< error for every grid value, in grid order
};

/// Grid value of λ whose solution is closest to x_true (first one on ties).
L2OracleResult l2_oracle(const Matrix& a, const Vector& y, const Vector& x_true,
                         const std::vector<double>& lambda_grid = default_lambda_grid());

enum class Method { l2, latent, laplace, guide };

std::string to_string(Method m);
/// Throws InvalidArgument for unknown names.
Method method_from_string(const std::string& name);

struct GuideOptions {
    ExpansionOptions expansion{};
    LatentEstimateOptions latent{};
    /// Score each method on the other's virtual ground truth instead of its own.
    bool cross = false;
    /// Virtual data without fresh noise: y_m = A x_m.
    bool noiseless = false;
};

struct GuideVerdict {
    Method chosen = Method::laplace;  ///< laplace or latent
    double err_laplace = 0.0;
    double err_latent = 0.0;
    std::uint64_t virtual_seed = 0;
    Vector x_laplace;
    Vector x_latent;

    const Vector& chosen_estimate() const { return chosen == Method::latent ? x_latent : x_laplace; }
};

/// Method-selection heuristic: treat each method's estimate x_m as ground
/// truth, synthesize y_m = A x_m + σ ε (ε seeded from `seed`), re-invert with
/// the same method and compare ‖x_m^m − x_m‖². The smaller error wins; ties go
/// to the Laplace method.
GuideVerdict guide(const LinearModel& model, const Vector& y, const GeneratorNet& net,
                   const GuideOptions& opts, std::uint64_t seed);

/// guide() with the two estimates on the observed data already computed.
GuideVerdict guide_from_estimates(const LinearModel& model, const GeneratorNet& net, const Vector& x_laplace,
                                  const Vector& x_latent, const GuideOptions& opts, std::uint64_t seed);

}  // namespace genprior
