#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "genprior/gaussian.hpp"
#include "genprior/linalg.hpp"

namespace genprior {

enum class Activation { tanh, sigmoid, softplus };

std::string to_string(Activation a);
/// Throws ParseError for names other than tanh, sigmoid, softplus.
Activation activation_from_string(const std::string& name);

/// softplus(x) = log(1 + eˣ), evaluated without overflow.
double softplus(double x);
double sigmoid(double x);

/// Affine map x ↦ W x + b; W is rows×cols.
struct DenseLayer {
    Matrix W;
    Vector b;
};

struct ActivationLayer {
    Activation kind;
};

using Layer = std::variant<DenseLayer, ActivationLayer>;

/// A feed-forward chain of dense and pointwise layers with fixed input width.
/// Construction checks that the shapes compose and reports the first offending
/// layer index.
class LayerStack {
public:
    LayerStack() = default;
    LayerStack(std::vector<Layer> layers, Eigen::Index input_dim);

    Eigen::Index input_dim() const { return input_dim_; }
    Eigen::Index output_dim() const { return output_dim_; }
    const std::vector<Layer>& layers() const { return layers_; }

    Vector forward(const Vector& x) const;
    /// Forward pass carrying the Jacobian of the output w.r.t. the input.
    Vector forward(const Vector& x, Matrix& jac) const;

private:
    std::vector<Layer> layers_;
    Eigen::Index input_dim_ = 0;
    Eigen::Index output_dim_ = 0;
};

/// Head producing Γ(z). The layer stack maps z to raw parameters:
/// isotropic → 1 value, Γ = (softplus(r) + ε) I;
/// diagonal  → d values, Γ = diag(softplus(rᵢ) + ε);
/// full      → d(d+1)/2 values filling L row by row (L₀₀, L₁₀, L₁₁, L₂₀, …),
///             Γ = L Lᵀ + ε I.
struct CovHead {
    CovKind variant = CovKind::diagonal;
    double eps_gamma = 1e-4;
    LayerStack layers;
};

Eigen::Index cov_head_raw_size(CovKind variant, Eigen::Index d);

/// Probabilistic generator x | z ~ N(g(z), Γ(z)) with latent prior z ~ N(0, I).
class GeneratorNet {
public:
    GeneratorNet(Eigen::Index latent_dim, Eigen::Index output_dim, LayerStack mean,
                 CovHead cov, std::optional<LayerStack> encoder = std::nullopt);

    Eigen::Index latent_dim() const { return p_; }
    Eigen::Index output_dim() const { return d_; }
    const LayerStack& mean_layers() const { return mean_; }
    const CovHead& cov_head() const { return cov_; }
    const std::optional<LayerStack>& encoder_layers() const { return encoder_; }
    bool has_encoder() const { return encoder_.has_value(); }

    /// g(z)
    Vector mean(const Vector& z) const;
    /// g(z) and J_z = ∂g/∂z (d×p) in one forward-mode pass.
    Vector mean(const Vector& z, Matrix& jac) const;
    Matrix jacobian(const Vector& z) const;
    /// Γ(z), smallest eigenvalue ≥ eps_gamma.
    Covariance gamma(const Vector& z) const;
    /// For isotropic and diagonal heads: the d variances of Γ(z) and their
    /// Jacobian (d×p). Throws UnsupportedOperation for the full head.
    Vector gamma_variances(const Vector& z, Matrix* jac) const;
    /// f(x), the encoder mean. Throws UnsupportedOperation without an encoder.
    Vector encoder_mean(const Vector& x) const;

    /// z ~ N(0, I), x ~ N(g(z), Γ(z)), all from CounterRng(seed).
    Vector sample_prior_draw(std::uint64_t seed) const;

private:
    void check_latent(const Vector& z) const;

    Eigen::Index p_;
    Eigen::Index d_;
    LayerStack mean_;
    CovHead cov_;
    std::optional<LayerStack> encoder_;
};

inline constexpr int kWeightsFormatVersion = 1;

/// Reads the JSON weights document. Missing or mistyped fields raise
/// ParseError naming the field; shapes that do not compose raise
/// ValidationError naming the section and layer index.
GeneratorNet load_weights(const std::filesystem::path& path);
GeneratorNet parse_weights(const std::string& text);
void save_weights(const GeneratorNet& net, const std::filesystem::path& path);
std::string serialize_weights(const GeneratorNet& net);

}  // namespace genprior
