#include "genprior/prior_oracle.hpp"

#include <cmath>
#include <limits>

#include "genprior/errors.hpp"
#include "genprior/gaussian.hpp"
#include "genprior/rng.hpp"

namespace genprior {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112;
}

double log_sum_exp(const Vector& v) {
    if (v.size() == 0) return -std::numeric_limits<double>::infinity();
    const double m = v.maxCoeff();
    if (!std::isfinite(m)) return m;
    return m + std::log((v.array() - m).exp().sum());
}

PriorEstimate mc_log_prior(const GeneratorNet& net, const Vector& x, int n_samples, std::uint64_t seed) {
    if (n_samples < 100) throw InvalidArgument("mc_log_prior: n_samples must be >= 100");
    if (x.size() != net.output_dim()) throw InvalidArgument("mc_log_prior: x has wrong size");
    const Eigen::Index p = net.latent_dim();
    const double d = static_cast<double>(net.output_dim());

    CounterRng rng(seed);
    Vector log_terms(n_samples);
    for (int i = 0; i < n_samples; ++i) {
        const Vector z = rng.normal_vector(p);
        const Covariance gamma = net.gamma(z);
        const Vector r = x - net.mean(z);
        log_terms[i] = -0.5 * (d * kLog2Pi + gamma.log_det() + gamma.quad_form(r));
    }

    PriorEstimate est;
    est.n_samples = n_samples;
    const double n = static_cast<double>(n_samples);
    est.log_value = log_sum_exp(log_terms) - std::log(n);

    const double m = log_terms.maxCoeff();
    const Eigen::ArrayXd w = (log_terms.array() - m).exp();
    const double w_mean = w.mean();
    const double w_var = (w - w_mean).square().sum() / (n - 1.0);
    est.std_error = std::sqrt(w_var / n) / w_mean;
    return est;
}

PosteriorMoments mc_posterior_moments(const LinearModel& model, const Vector& y,
                                      const GeneratorNet& net, int n_samples, std::uint64_t seed,
                                      const PosteriorOracleOptions& opts) {
    if (n_samples < 2) throw InvalidArgument("mc_posterior_moments: n_samples must be >= 2");
    if (opts.inner_samples < 100) throw InvalidArgument("mc_posterior_moments: inner_samples must be >= 100");
    const Eigen::Index d = model.d();

    const LaplaceEstimate proposal = laplace_estimate(model, y, net, opts.expansion);
    const SpdFactor q_factor(proposal.posterior.cov);
    const Matrix q_lower = q_factor.lower();

    CounterRng rng(seed);
    Matrix xs(n_samples, d);
    Vector log_w(n_samples);
    for (int i = 0; i < n_samples; ++i) {
        const Vector x = proposal.posterior.mean + q_lower * rng.normal_vector(d);
        xs.row(i) = x.transpose();
        const double log_lik = -0.5 * (model.A() * x - y).squaredNorm() / model.sigma2();
        const double log_prior =
            mc_log_prior(net, x, opts.inner_samples, hash_words({seed, static_cast<std::uint64_t>(i)})).log_value;
        const double log_q = gaussian_log_pdf(x, proposal.posterior.mean, q_factor);
        log_w[i] = log_lik + log_prior - log_q;
    }

    const double lse = log_sum_exp(log_w);
    const Vector w = (log_w.array() - lse).exp().matrix();  // normalized

    PosteriorMoments out;
    out.n_samples = n_samples;
    out.mean = xs.transpose() * w;
    const Matrix centered = xs.rowwise() - out.mean.transpose();
    out.cov = symmetrized(centered.transpose() * w.asDiagonal() * centered);
    out.std_error = (centered.array().square().colwise() * w.array().square()).colwise().sum().sqrt().transpose();
    out.ess = 1.0 / w.squaredNorm();
    out.low_ess = out.ess < 50.0;
    return out;
}

}  // namespace genprior
