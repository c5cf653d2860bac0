#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/LU>
#include <Eigen/QR>

#include "genprior/optim.hpp"

namespace fixtures {

using genprior::ActivationLayer;
using genprior::Activation;
using genprior::CovHead;
using genprior::CounterRng;
using genprior::DenseLayer;
using genprior::Layer;
using genprior::LayerStack;

double inverse_softplus(double v) { return v > 30.0 ? v : std::log(std::expm1(v)); }

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, CounterRng& rng, double scale) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = scale * rng.normal();
    }
    return m;
}

double raw_for_variance(double var, double eps_gamma) { return inverse_softplus(var - eps_gamma); }

CovHead constant_head(CovKind kind, Eigen::Index p, Eigen::Index d, double var, double eps_gamma) {
    const Eigen::Index raw = genprior::cov_head_raw_size(kind, d);
    Vector bias;
    if (kind == CovKind::full) {
        // L = sqrt(var − eps) I packed row by row.
        bias = Vector::Zero(raw);
        Eigen::Index k = 0;
        for (Eigen::Index i = 0; i < d; ++i) {
            k += i;
            bias[k] = std::sqrt(var - eps_gamma);
            ++k;
        }
    } else {
        bias = Vector::Constant(raw, raw_for_variance(var, eps_gamma));
    }
    CovHead head;
    head.variant = kind;
    head.eps_gamma = eps_gamma;
    head.layers = LayerStack({DenseLayer{Matrix::Zero(raw, p), bias}}, p);
    return head;
}

GeneratorNet affine_net(const Matrix& w, const Vector& b, double var, CovKind kind, bool with_encoder) {
    const Eigen::Index d = w.rows();
    const Eigen::Index p = w.cols();
    LayerStack mean({DenseLayer{w, b}}, p);
    std::optional<LayerStack> encoder;
    if (with_encoder) {
        const Matrix pinv = w.completeOrthogonalDecomposition().pseudoInverse();
        encoder = LayerStack({DenseLayer{pinv, -pinv * b}}, d);
    }
    return GeneratorNet(p, d, std::move(mean), constant_head(kind, p, d, var, std::min(1e-4, 0.5 * var)),
                        std::move(encoder));
}

GeneratorNet random_affine_net(Eigen::Index p, Eigen::Index d, std::uint64_t seed, double var, bool with_encoder) {
    CounterRng rng(seed);
    const Matrix w = random_matrix(d, p, rng, 0.5);
    const Vector b = random_matrix(d, 1, rng, 0.5);
    return affine_net(w, b, var, CovKind::diagonal, with_encoder);
}

GeneratorNet constant_net(const Vector& m, Eigen::Index p, double var) {
    return affine_net(Matrix::Zero(m.size(), p), m, var, CovKind::diagonal);
}

GeneratorNet random_smooth_net(Eigen::Index p, Eigen::Index d, std::uint64_t seed, CovKind kind) {
    CounterRng rng(seed);
    const Eigen::Index h1 = 5 + static_cast<Eigen::Index>(rng.next_u64() % 4);
    const Eigen::Index h2 = 4 + static_cast<Eigen::Index>(rng.next_u64() % 4);
    std::vector<Layer> layers;
    layers.push_back(DenseLayer{random_matrix(h1, p, rng, 0.8), random_matrix(h1, 1, rng, 0.3)});
    layers.push_back(ActivationLayer{Activation::tanh});
    layers.push_back(DenseLayer{random_matrix(h2, h1, rng, 0.6), random_matrix(h2, 1, rng, 0.3)});
    layers.push_back(ActivationLayer{Activation::sigmoid});
    layers.push_back(DenseLayer{random_matrix(d, h2, rng, 0.7), random_matrix(d, 1, rng, 0.2)});
    layers.push_back(ActivationLayer{Activation::softplus});
    LayerStack mean(std::move(layers), p);

    const Eigen::Index raw = genprior::cov_head_raw_size(kind, d);
    CovHead head;
    head.variant = kind;
    head.eps_gamma = 1e-4;
    head.layers = LayerStack({DenseLayer{random_matrix(3, p, rng, 0.5), random_matrix(3, 1, rng, 0.2)},
                              ActivationLayer{Activation::tanh},
                              DenseLayer{random_matrix(raw, 3, rng, 0.3), Vector::Constant(raw, -2.0)}},
                             p);
    return GeneratorNet(p, d, std::move(mean), std::move(head));
}

Conjugate conjugate_posterior(const Matrix& a, const Vector& y, double sigma2, const Vector& m, const Matrix& c) {
    const Matrix c_inv = c.fullPivLu().inverse();
    const Matrix precision = a.transpose() * a / sigma2 + c_inv;
    Conjugate out;
    out.cov = precision.fullPivLu().inverse();
    out.mean = out.cov * (a.transpose() * y / sigma2 + c_inv * m);
    return out;
}

double rel_err(const Matrix& got, const Matrix& want) {
    const double denom = want.norm();
    return denom > 0.0 ? (got - want).norm() / denom : (got - want).norm();
}

GeneratorNet curved_net_4x4() {
    CounterRng rng(0xC0FFEE);
    const Eigen::Index p = 2, h = 6, d = 16;
    std::vector<Layer> layers;
    layers.push_back(DenseLayer{random_matrix(h, p, rng, 1.0), random_matrix(h, 1, rng, 0.3)});
    layers.push_back(ActivationLayer{Activation::tanh});
    layers.push_back(DenseLayer{random_matrix(d, h, rng, 0.25), Vector::Constant(d, 0.5)});
    return GeneratorNet(p, d, LayerStack(std::move(layers), p), constant_head(CovKind::diagonal, p, d, 0.02 * 0.02));
}

Vector curved_on_manifold_truth() {
    Vector z(2);
    z << 0.4, -0.7;
    return curved_net_4x4().mean(z);
}

Vector curved_off_manifold_truth() {
    CounterRng rng(0xBEEF);
    return curved_on_manifold_truth() + 0.05 * rng.normal_vector(16);
}

namespace {

template <typename Residual>
ManifoldDistance grid_refine(const GeneratorNet& net, const Residual& residual, double lim, double h) {
    ManifoldDistance best;
    best.grid_min = std::numeric_limits<double>::infinity();
    Vector z(2);
    const int steps = static_cast<int>(std::lround(2.0 * lim / h));
    for (int i = 0; i <= steps; ++i) {
        for (int j = 0; j <= steps; ++j) {
            z << -lim + i * h, -lim + j * h;
            const double v = residual(z).norm();
            if (v < best.grid_min) {
                best.grid_min = v;
                best.z = z;
            }
        }
    }
    // Refine ½‖r‖² with BFGS and central-difference gradients.
    const auto f = [&](const Vector& zz) { return 0.5 * residual(zz).squaredNorm(); };
    genprior::BfgsOptions opts;
    opts.grad_tol = 1e-12;
    const auto res = genprior::minimize_bfgs(
        [&](const Vector& zz, Vector& g) {
            g = genprior::finite_difference_gradient(f, zz, 1e-6);
            return f(zz);
        },
        best.z, opts);
    best.delta = best.grid_min;
    if (residual(res.x).norm() < best.delta) {
        best.delta = residual(res.x).norm();
        best.z = res.x;
    }
    (void)net;
    return best;
}

}  // namespace

ManifoldDistance distance_to_manifold(const GeneratorNet& net, const Vector& x, double lim, double h) {
    return grid_refine(net, [&](const Vector& z) { return Vector(x - net.mean(z)); }, lim, h);
}

Vector projected_latent(const GeneratorNet& net, const Matrix& a, const Vector& x, double lim, double h) {
    return grid_refine(net, [&](const Vector& z) { return Vector(a * (x - net.mean(z))); }, lim, h).z;
}

GeneratorNet tanh_net_2x3() {
    Matrix w1(3, 2);
    w1 << 0.8, -0.3, 0.2, 0.9, -0.5, 0.4;
    Vector b1(3);
    b1 << 0.1, -0.2, 0.05;
    Matrix w2(3, 3);
    w2 << 0.6, 0.1, -0.2, -0.1, 0.5, 0.3, 0.2, -0.3, 0.55;
    Vector b2(3);
    b2 << 0.3, 0.5, 0.4;
    LayerStack mean({DenseLayer{w1, b1}, ActivationLayer{Activation::tanh}, DenseLayer{w2, b2}}, 2);
    return GeneratorNet(2, 3, std::move(mean), constant_head(CovKind::diagonal, 2, 3, 0.1 * 0.1));
}

TempDir::TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("genprior_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

}  // namespace fixtures
