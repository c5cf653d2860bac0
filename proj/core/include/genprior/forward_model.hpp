#pragma once

#include <cstdint>

#include "genprior/linalg.hpp"

namespace genprior {

/// The sampling model y | x ~ N(A x, σ² I) with A of size n×d, n ≥ d, full
/// column rank. Rank is verified at construction with a column-pivoted QR.
class LinearModel {
public:
    LinearModel(Matrix a, double sigma2);

    const Matrix& A() const { return a_; }
    double sigma2() const { return sigma2_; }
    double sigma() const;
    Eigen::Index n() const { return a_.rows(); }
    Eigen::Index d() const { return a_.cols(); }
    /// |R₀₀| / |R_dd| of the pivoted QR, a cheap condition estimate.
    double condition_estimate() const { return condition_; }

    /// Same operator, different noise variance.
    LinearModel with_sigma2(double sigma2) const;

private:
    LinearModel(Matrix a, double sigma2, double condition);

    Matrix a_;
    double sigma2_;
    double condition_;
};

struct BlurOperator {
    double eta = 0.0;
    int radius = 0;
    int height = 0;
    int width = 0;
    /// d×d row-stochastic matrix, d = height·width, pixels in row-major order.
    Matrix matrix;
};

/// Gaussian blur with weights w(u,v) ∝ exp(−η(u²+v²)/2) on |u|,|v| ≤ radius.
/// Near the border only in-image taps are kept and each output pixel's weights
/// are renormalized to sum to one.
BlurOperator build_blur(double eta, int height, int width, int radius = 4);

/// A x + σ ε with ε ~ N(0, I) from CounterRng(seed). σ = 0 returns A x exactly.
Vector observe(const Matrix& a, const Vector& x, double sigma, std::uint64_t seed);
Vector observe(const LinearModel& model, const Vector& x, std::uint64_t seed);

/// 20 log₁₀ L − 10 log₁₀(‖x − x̂‖²/d); +infinity when x̂ = x.
double psnr(const Vector& x, const Vector& xhat, double peak = 1.0);

}  // namespace genprior
