#include "genprior/unknown_variance.hpp"

#include <cmath>

#include "genprior/errors.hpp"
#include "genprior/gaussian.hpp"

namespace genprior {

IGPrior::IGPrior(double a, double b) : alpha(a), beta(b) {
    if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
        throw InvalidArgument("IGPrior: alpha and beta must be positive and finite");
    }
}

IGPrior IGPrior::concentrated_at(double sigma2, double alpha) {
    if (!(sigma2 > 0.0)) throw InvalidArgument("IGPrior::concentrated_at: sigma2 must be positive");
    return IGPrior(alpha, 2.0 * alpha * sigma2);
}

namespace {

double bracket_exponent(Eigen::Index n, const IGPrior& ig) {
    return 0.5 * (static_cast<double>(n) + 2.0 * ig.alpha);
}

}  // namespace

double marginal_latent_log_density(const GeneratorNet& net, const Matrix& a, const Vector& y,
                                   const IGPrior& ig, const Vector& z) {
    if (a.rows() != y.size() || a.cols() != net.output_dim()) {
        throw InvalidArgument("marginal_latent_log_density: shape mismatch");
    }
    const double r2 = (a * net.mean(z) - y).squaredNorm();
    return -bracket_exponent(y.size(), ig) * std::log(r2 + ig.beta) - 0.5 * z.squaredNorm();
}

double marginal_variable_log_density(const Matrix& a, const Vector& y, const IGPrior& ig,
                                     const LaplacePrior& prior, const Vector& x) {
    return VariableMarginal(a, y, ig, prior).log_density(x);
}

VariableMarginal::VariableMarginal(const Matrix& a, const Vector& y, const IGPrior& ig,
                                   const LaplacePrior& prior)
    : a_(&a), y_(y), ig_(ig), prior_mean_(prior.mean), prior_factor_(prior.cov) {
    if (a.rows() != y.size() || a.cols() != prior.mean.size()) {
        throw InvalidArgument("VariableMarginal: shape mismatch");
    }
}

double VariableMarginal::log_density(const Vector& x) const {
    const double r2 = (*a_ * x - y_).squaredNorm();
    return -bracket_exponent(y_.size(), ig_) * std::log(r2 + ig_.beta) +
           gaussian_log_pdf(x, prior_mean_, prior_factor_);
}

double VariableMarginal::log_density(const Vector& x, Vector& grad) const {
    const Vector r = *a_ * x - y_;
    const double r2 = r.squaredNorm();
    const double k = bracket_exponent(y_.size(), ig_);
    grad = -(2.0 * k / (r2 + ig_.beta)) * (a_->transpose() * r) - prior_factor_.solve(Vector(x - prior_mean_));
    return -k * std::log(r2 + ig_.beta) + gaussian_log_pdf(x, prior_mean_, prior_factor_);
}

MarginalMapResult marginal_variable_map(const Matrix& a, const Vector& y, const IGPrior& ig,
                                        const LaplacePrior& prior, const Vector& x_init,
                                        const BfgsOptions& opts) {
    const VariableMarginal target(a, y, ig, prior);
    const Objective neg = [&](const Vector& x, Vector& grad) {
        const double v = target.log_density(x, grad);
        grad = -grad;
        return -v;
    };
    const BfgsResult r = minimize_bfgs(neg, x_init, opts);
    MarginalMapResult out;
    out.x = r.x;
    out.log_density = -r.value;
    out.iterations = r.iterations;
    out.grad_inf_norm = r.grad_inf_norm;
    out.status = r.status;
    out.converged = r.converged();
    return out;
}

}  // namespace genprior
