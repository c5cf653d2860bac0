#include "genprior/generator.hpp"

#include <cmath>
#include <string>

#include "genprior/errors.hpp"
#include "genprior/rng.hpp"

namespace genprior {

std::string to_string(Activation a) {
    switch (a) {
        case Activation::tanh: return "tanh";
        case Activation::sigmoid: return "sigmoid";
        case Activation::softplus: return "softplus";
    }
    return "unknown";
}

Activation activation_from_string(const std::string& name) {
    if (name == "tanh") return Activation::tanh;
    if (name == "sigmoid") return Activation::sigmoid;
    if (name == "softplus") return Activation::softplus;
    throw ParseError("unknown activation '" + name + "'");
}

double softplus(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

namespace {

double apply(Activation a, double x) {
    switch (a) {
        case Activation::tanh: return std::tanh(x);
        case Activation::sigmoid: return sigmoid(x);
        case Activation::softplus: return softplus(x);
    }
    return x;
}

// Derivative expressed through the pre-activation x and output y.
double derivative(Activation a, double x, double y) {
    switch (a) {
        case Activation::tanh: return 1.0 - y * y;
        case Activation::sigmoid: return y * (1.0 - y);
        case Activation::softplus: return sigmoid(x);
    }
    return 1.0;
}

}  // namespace

LayerStack::LayerStack(std::vector<Layer> layers, Eigen::Index input_dim)
    : layers_(std::move(layers)), input_dim_(input_dim) {
    if (input_dim_ <= 0) throw ValidationError("layer stack input dimension must be positive");
    Eigen::Index width = input_dim_;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        if (const auto* dense = std::get_if<DenseLayer>(&layers_[i])) {
            if (dense->W.cols() != width) {
                throw ValidationError("layer " + std::to_string(i) + ": W has " +
                                      std::to_string(dense->W.cols()) + " columns, expected " +
                                      std::to_string(width));
            }
            if (dense->b.size() != dense->W.rows()) {
                throw ValidationError("layer " + std::to_string(i) + ": b has " +
                                      std::to_string(dense->b.size()) + " entries, expected " +
                                      std::to_string(dense->W.rows()));
            }
            if (!dense->W.allFinite() || !dense->b.allFinite()) {
                throw ValidationError("layer " + std::to_string(i) + ": non-finite weights");
            }
            width = dense->W.rows();
        }
    }
    output_dim_ = width;
}

Vector LayerStack::forward(const Vector& x) const {
    if (x.size() != input_dim_) throw InvalidArgument("LayerStack::forward: input size mismatch");
    Vector v = x;
    for (const Layer& layer : layers_) {
        if (const auto* dense = std::get_if<DenseLayer>(&layer)) {
            v = dense->W * v + dense->b;
        } else {
            const Activation a = std::get<ActivationLayer>(layer).kind;
            v = v.unaryExpr([a](double t) { return apply(a, t); });
        }
    }
    return v;
}

Vector LayerStack::forward(const Vector& x, Matrix& jac) const {
    if (x.size() != input_dim_) throw InvalidArgument("LayerStack::forward: input size mismatch");
    Vector v = x;
    jac = Matrix::Identity(input_dim_, input_dim_);
    for (const Layer& layer : layers_) {
        if (const auto* dense = std::get_if<DenseLayer>(&layer)) {
            v = dense->W * v + dense->b;
            jac = dense->W * jac;
        } else {
            const Activation a = std::get<ActivationLayer>(layer).kind;
            Vector out(v.size());
            for (Eigen::Index i = 0; i < v.size(); ++i) {
                out[i] = apply(a, v[i]);
                jac.row(i) *= derivative(a, v[i], out[i]);
            }
            v = std::move(out);
        }
    }
    return v;
}

Eigen::Index cov_head_raw_size(CovKind variant, Eigen::Index d) {
    switch (variant) {
        case CovKind::isotropic: return 1;
        case CovKind::diagonal: return d;
        case CovKind::full: return d * (d + 1) / 2;
    }
    return 0;
}

GeneratorNet::GeneratorNet(Eigen::Index latent_dim, Eigen::Index output_dim, LayerStack mean,
                           CovHead cov, std::optional<LayerStack> encoder)
    : p_(latent_dim), d_(output_dim), mean_(std::move(mean)), cov_(std::move(cov)),
      encoder_(std::move(encoder)) {
    if (p_ <= 0 || d_ <= 0) throw ValidationError("latent_dim and output_dim must be positive");
    if (mean_.input_dim() != p_ || mean_.output_dim() != d_) {
        throw ValidationError("mean_layers map " + std::to_string(mean_.input_dim()) + " -> " +
                              std::to_string(mean_.output_dim()) + ", expected " +
                              std::to_string(p_) + " -> " + std::to_string(d_));
    }
    if (!(cov_.eps_gamma > 0.0)) throw ValidationError("cov_head.eps_gamma must be positive");
    const Eigen::Index raw = cov_head_raw_size(cov_.variant, d_);
    if (cov_.layers.input_dim() != p_ || cov_.layers.output_dim() != raw) {
        throw ValidationError("cov_head layers map " + std::to_string(cov_.layers.input_dim()) +
                              " -> " + std::to_string(cov_.layers.output_dim()) + ", expected " +
                              std::to_string(p_) + " -> " + std::to_string(raw));
    }
    if (encoder_ && (encoder_->input_dim() != d_ || encoder_->output_dim() != p_)) {
        throw ValidationError("encoder maps " + std::to_string(encoder_->input_dim()) + " -> " +
                              std::to_string(encoder_->output_dim()) + ", expected " +
                              std::to_string(d_) + " -> " + std::to_string(p_));
    }
}

void GeneratorNet::check_latent(const Vector& z) const {
    if (z.size() != p_) {
        throw InvalidArgument("latent vector has size " + std::to_string(z.size()) + ", expected " +
                              std::to_string(p_));
    }
}

Vector GeneratorNet::mean(const Vector& z) const {
    check_latent(z);
    return mean_.forward(z);
}

Vector GeneratorNet::mean(const Vector& z, Matrix& jac) const {
    check_latent(z);
    return mean_.forward(z, jac);
}

Matrix GeneratorNet::jacobian(const Vector& z) const {
    Matrix jac;
    mean(z, jac);
    return jac;
}

Covariance GeneratorNet::gamma(const Vector& z) const {
    check_latent(z);
    const Vector raw = cov_.layers.forward(z);
    const double eps = cov_.eps_gamma;
    switch (cov_.variant) {
        case CovKind::isotropic: return Covariance::isotropic(d_, softplus(raw[0]) + eps);
        case CovKind::diagonal:
            return Covariance::diagonal(raw.unaryExpr([eps](double r) { return softplus(r) + eps; }));
        case CovKind::full: {
            Matrix l = Matrix::Zero(d_, d_);
            Eigen::Index k = 0;
            for (Eigen::Index i = 0; i < d_; ++i) {
                for (Eigen::Index j = 0; j <= i; ++j) l(i, j) = raw[k++];
            }
            Matrix g = l * l.transpose();
            g.diagonal().array() += eps;
            return Covariance::full(g);
        }
    }
    throw ValidationError("unknown covariance variant");
}

Vector GeneratorNet::gamma_variances(const Vector& z, Matrix* jac) const {
    check_latent(z);
    if (cov_.variant == CovKind::full) {
        throw UnsupportedOperation("gamma_variances: not available for the full covariance head");
    }
    Matrix raw_jac;
    const Vector raw = jac ? cov_.layers.forward(z, raw_jac) : cov_.layers.forward(z);
    Vector var(d_);
    if (jac) jac->resize(d_, p_);
    for (Eigen::Index i = 0; i < d_; ++i) {
        const Eigen::Index k = cov_.variant == CovKind::isotropic ? 0 : i;
        var[i] = softplus(raw[k]) + cov_.eps_gamma;
        if (jac) jac->row(i) = sigmoid(raw[k]) * raw_jac.row(k);
    }
    return var;
}

Vector GeneratorNet::encoder_mean(const Vector& x) const {
    if (!encoder_) throw UnsupportedOperation("generator has no encoder");
    if (x.size() != d_) throw InvalidArgument("encoder_mean: input size mismatch");
    return encoder_->forward(x);
}

Vector GeneratorNet::sample_prior_draw(std::uint64_t seed) const {
    CounterRng rng(seed);
    const Vector z = rng.normal_vector(p_);
    const Vector eps = rng.normal_vector(d_);
    return mean(z) + gamma(z).transform_standard(eps);
}

}  // namespace genprior
