#include <cmath>

#include <Eigen/QR>

#include "genprior/errors.hpp"
#include "genprior/experiments.hpp"
#include "genprior/rng.hpp"

namespace genprior {

namespace {

// softplus⁻¹(v) for v > 0.
double inverse_softplus(double v) { return v > 30.0 ? v : std::log(std::expm1(v)); }

}  // namespace

GeneratorNet make_synthetic_generator(const SyntheticSpec& spec) {
    if (spec.height <= 0 || spec.width <= 0 || spec.latent_dim <= 0 || spec.hidden <= 0) {
        throw InvalidArgument("make_synthetic_generator: dimensions must be positive");
    }
    if (!(spec.gamma_std * spec.gamma_std > spec.eps_gamma)) {
        throw InvalidArgument("make_synthetic_generator: gamma_std² must exceed eps_gamma");
    }
    const Eigen::Index p = spec.latent_dim;
    const Eigen::Index h = spec.hidden;
    const Eigen::Index d = static_cast<Eigen::Index>(spec.height) * spec.width;
    CounterRng rng(spec.seed);

    DenseLayer in;
    in.W = Matrix(h, p);
    for (Eigen::Index i = 0; i < h; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) in.W(i, j) = 1.2 * rng.normal() / std::sqrt(static_cast<double>(p));
    }
    in.b = 0.3 * rng.normal_vector(h);

    DenseLayer out;
    out.W = Matrix(d, h);
    for (Eigen::Index k = 0; k < h; ++k) {
        const double cr = rng.uniform() * (spec.height - 1);
        const double cc = rng.uniform() * (spec.width - 1);
        const double width = 0.8 + 1.2 * rng.uniform();
        const double amp = 0.35 * (rng.uniform() < 0.5 ? -1.0 : 1.0) * (0.5 + rng.uniform());
        for (int r = 0; r < spec.height; ++r) {
            for (int c = 0; c < spec.width; ++c) {
                const double dist2 = (r - cr) * (r - cr) + (c - cc) * (c - cc);
                out.W(static_cast<Eigen::Index>(r) * spec.width + c, k) =
                    amp * std::exp(-0.5 * dist2 / (width * width));
            }
        }
    }
    out.b = Vector::Constant(d, 0.4);

    LayerStack mean({in, ActivationLayer{Activation::tanh}, out}, p);

    CovHead cov;
    cov.variant = CovKind::diagonal;
    cov.eps_gamma = spec.eps_gamma;
    DenseLayer head;
    head.W = 0.05 * Matrix::NullaryExpr(d, p, [&rng]() { return rng.normal(); });
    head.b = Vector::Constant(d, inverse_softplus(spec.gamma_std * spec.gamma_std - spec.eps_gamma));
    cov.layers = LayerStack({head}, p);

    std::optional<LayerStack> encoder;
    if (spec.with_encoder) {
        // Linear encoder: least-squares inverse of the linearization at the origin.
        Matrix j0;
        const Vector g0 = mean.forward(Vector::Zero(p), j0);
        DenseLayer enc;
        enc.W = j0.completeOrthogonalDecomposition().pseudoInverse();
        enc.b = -enc.W * g0;
        encoder = LayerStack({enc}, d);
    }
    return GeneratorNet(p, d, std::move(mean), std::move(cov), std::move(encoder));
}

SyntheticTruth make_synthetic_truth(const GeneratorNet& net, double offset_std, std::uint64_t seed) {
    if (!(offset_std >= 0.0)) throw InvalidArgument("make_synthetic_truth: offset_std must be >= 0");
    CounterRng rng(seed);
    SyntheticTruth t;
    t.z = rng.normal_vector(net.latent_dim());
    t.x = net.mean(t.z);
    if (offset_std > 0.0) t.x += offset_std * rng.normal_vector(net.output_dim());
    return t;
}

}  // namespace genprior
