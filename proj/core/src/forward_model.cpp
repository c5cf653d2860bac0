#include "genprior/forward_model.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/QR>

#include "genprior/errors.hpp"
#include "genprior/rng.hpp"

namespace genprior {

namespace {

double qr_condition(const Matrix& a) {
    if (a.rows() < a.cols()) {
        throw InvalidArgument("LinearModel: need n >= d, got n=" + std::to_string(a.rows()) +
                              " d=" + std::to_string(a.cols()));
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(a);
    if (qr.rank() < a.cols()) {
        throw InvalidArgument("LinearModel: operator is rank deficient (rank " +
                              std::to_string(qr.rank()) + " < d=" + std::to_string(a.cols()) + ")");
    }
    const auto r = qr.matrixR().diagonal().cwiseAbs();
    return r.maxCoeff() / r.minCoeff();
}

}  // namespace

LinearModel::LinearModel(Matrix a, double sigma2)
    : LinearModel(std::move(a), sigma2, 0.0) {
    condition_ = qr_condition(a_);
}

LinearModel::LinearModel(Matrix a, double sigma2, double condition)
    : a_(std::move(a)), sigma2_(sigma2), condition_(condition) {
    if (a_.size() == 0) throw InvalidArgument("LinearModel: empty operator");
    if (!(sigma2_ > 0.0) || !std::isfinite(sigma2_)) {
        throw InvalidArgument("LinearModel: sigma2 must be positive and finite");
    }
}

double LinearModel::sigma() const { return std::sqrt(sigma2_); }

LinearModel LinearModel::with_sigma2(double sigma2) const { return LinearModel(a_, sigma2, condition_); }

BlurOperator build_blur(double eta, int height, int width, int radius) {
    if (!(eta > 0.0) || !std::isfinite(eta)) throw InvalidArgument("build_blur: eta must be positive");
    if (height <= 0 || width <= 0) throw InvalidArgument("build_blur: image dimensions must be positive");
    if (radius < 1) throw InvalidArgument("build_blur: radius must be >= 1");

    BlurOperator op;
    op.eta = eta;
    op.radius = radius;
    op.height = height;
    op.width = width;
    const Eigen::Index d = static_cast<Eigen::Index>(height) * width;
    op.matrix = Matrix::Zero(d, d);

    for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) {
            const Eigen::Index row = static_cast<Eigen::Index>(r) * width + c;
            double total = 0.0;
            for (int u = -radius; u <= radius; ++u) {
                const int rr = r + u;
                if (rr < 0 || rr >= height) continue;
                for (int v = -radius; v <= radius; ++v) {
                    const int cc = c + v;
                    if (cc < 0 || cc >= width) continue;
                    const double w = std::exp(-0.5 * eta * static_cast<double>(u * u + v * v));
                    op.matrix(row, static_cast<Eigen::Index>(rr) * width + cc) = w;
                    total += w;
                }
            }
            op.matrix.row(row) /= total;
        }
    }
    return op;
}

Vector observe(const Matrix& a, const Vector& x, double sigma, std::uint64_t seed) {
    if (a.cols() != x.size()) throw InvalidArgument("observe: shape mismatch between A and x");
    if (!(sigma >= 0.0)) throw InvalidArgument("observe: sigma must be non-negative");
    if (!x.allFinite()) throw InvalidArgument("observe: x must be finite");
    Vector y = a * x;
    if (sigma == 0.0) return y;
    CounterRng rng(seed);
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += sigma * rng.normal();
    return y;
}

Vector observe(const LinearModel& model, const Vector& x, std::uint64_t seed) {
    return observe(model.A(), x, model.sigma(), seed);
}

double psnr(const Vector& x, const Vector& xhat, double peak) {
    if (x.size() != xhat.size() || x.size() == 0) throw InvalidArgument("psnr: length mismatch");
    const double sq = (x - xhat).squaredNorm();
    if (sq == 0.0) return std::numeric_limits<double>::infinity();
    return 20.0 * std::log10(peak) - 10.0 * std::log10(sq / static_cast<double>(x.size()));
}

}  // namespace genprior
