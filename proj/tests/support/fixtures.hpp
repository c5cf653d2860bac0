#pragma once

#include <cstdint>
#include <filesystem>

#include "genprior/forward_model.hpp"
#include "genprior/generator.hpp"
#include "genprior/laplace_inference.hpp"
#include "genprior/linalg.hpp"
#include "genprior/rng.hpp"

namespace fixtures {

using genprior::CovKind;
using genprior::GeneratorNet;
using genprior::Matrix;
using genprior::Vector;

double inverse_softplus(double v);

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, genprior::CounterRng& rng, double scale = 1.0);

/// Raw bias that makes a zero-weight head produce the constant variance `var`.
double raw_for_variance(double var, double eps_gamma);

/// Head with zero weights producing the constant covariance var·I.
genprior::CovHead constant_head(CovKind kind, Eigen::Index p, Eigen::Index d, double var,
                                double eps_gamma = 1e-4);

/// g(z) = W z + b with constant isotropic/diagonal Γ = var·I.
GeneratorNet affine_net(const Matrix& w, const Vector& b, double var, CovKind kind = CovKind::diagonal,
                        bool with_encoder = false);

/// Seeded affine net with W, b standard normal (scaled), Γ = var·I.
GeneratorNet random_affine_net(Eigen::Index p, Eigen::Index d, std::uint64_t seed, double var = 0.05,
                               bool with_encoder = false);

/// g ≡ m, Γ ≡ var·I.
GeneratorNet constant_net(const Vector& m, Eigen::Index p, double var);

/// Random two-hidden-layer net mixing tanh, sigmoid and softplus, with a
/// z-dependent head of the requested kind.
GeneratorNet random_smooth_net(Eigen::Index p, Eigen::Index d, std::uint64_t seed, CovKind kind);

/// Dense conjugate posterior of y = A x + N(0, σ²I) under x ~ N(m, C), by explicit
/// LU inverses.
struct Conjugate {
    Vector mean;
    Matrix cov;
};
Conjugate conjugate_posterior(const Matrix& a, const Vector& y, double sigma2, const Vector& m, const Matrix& c);

double rel_err(const Matrix& got, const Matrix& want);

/// Small curved generator on a 4×4 image used for the consistency split:
/// g(z) = b₂ + W₂ tanh(W₁ z + b₁), p = 2, diagonal constant Γ.
GeneratorNet curved_net_4x4();
/// Off-manifold truth for curved_net_4x4.
Vector curved_off_manifold_truth();
/// On-manifold truth g(z†) for curved_net_4x4.
Vector curved_on_manifold_truth();

/// min over a z-grid on [−lim, lim]² (step h) of ‖x − g(z)‖, refined by BFGS from the best grid node.
struct ManifoldDistance {
    double delta = 0.0;
    Vector z;
    double grid_min = 0.0;
};
ManifoldDistance distance_to_manifold(const GeneratorNet& net, const Vector& x, double lim = 6.0, double h = 0.01);

/// argmin_z ‖A x − A g(z)‖ for a 2-d latent space by the same grid + refinement.
Vector projected_latent(const GeneratorNet& net, const Matrix& a, const Vector& x, double lim = 6.0,
                        double h = 0.01);

/// 2-latent / 3-output tanh generator used against the Monte-Carlo oracle.
GeneratorNet tanh_net_2x3();

/// Temporary directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag);
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace fixtures
