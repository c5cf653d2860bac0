#include "genprior/latent_inference.hpp"

#include <cmath>
#include <string>

#include "genprior/errors.hpp"
#include "genprior/laplace_inference.hpp"
#include "genprior/rng.hpp"

namespace genprior {

LatentPosterior::LatentPosterior(const LinearModel& model, const GeneratorNet& net)
    : model_(&model), net_(&net) {
    if (model.d() != net.output_dim()) {
        throw InvalidArgument("LatentPosterior: operator has " + std::to_string(model.d()) +
                              " columns but generator outputs " + std::to_string(net.output_dim()));
    }
}

double LatentPosterior::log_density(const Vector& z, const Vector& y) const {
    if (y.size() != model_->n()) throw InvalidArgument("latent log density: y has wrong size");
    const Vector r = model_->A() * net_->mean(z) - y;
    return -0.5 * r.squaredNorm() / model_->sigma2() - 0.5 * z.squaredNorm();
}

double LatentPosterior::log_density(const Vector& z, const Vector& y, Vector& grad) const {
    if (y.size() != model_->n()) throw InvalidArgument("latent log density: y has wrong size");
    Matrix jac;
    const Vector g = net_->mean(z, jac);
    const Vector r = model_->A() * g - y;
    grad = -(jac.transpose() * (model_->A().transpose() * r)) / model_->sigma2() - z;
    return -0.5 * r.squaredNorm() / model_->sigma2() - 0.5 * z.squaredNorm();
}

Vector LatentPosterior::log_density_grad(const Vector& z, const Vector& y) const {
    Vector grad;
    log_density(z, y, grad);
    return grad;
}

LatentMapResult latent_map(const LatentPosterior& lp, const Vector& y, const Vector& z_init,
                           const BfgsOptions& opts) {
    if (!z_init.allFinite()) throw InvalidArgument("latent_map: z_init must be finite");
    const Objective neg = [&](const Vector& z, Vector& grad) {
        const double v = lp.log_density(z, y, grad);
        grad = -grad;
        return -v;
    };
    const BfgsResult r = minimize_bfgs(neg, z_init, opts);
    LatentMapResult out;
    out.z = r.x;
    out.log_density = -r.value;
    out.iterations = r.iterations;
    out.grad_inf_norm = r.grad_inf_norm;
    out.status = r.status;
    out.converged = r.converged();
    return out;
}

LatentEstimate latent_estimate(const LatentPosterior& lp, const Vector& y,
                               const LatentEstimateOptions& opts) {
    const GeneratorNet& net = lp.net();
    LatentEstimate est;
    if (opts.init == LatentInit::origin) {
        est.z_init = Vector::Zero(net.latent_dim());
    } else {
        const Vector x0 = least_squares_init(lp.model(), y, net);
        if (net.has_encoder()) {
            est.z_init = net.encoder_mean(x0);
        } else {
            LatentSearchOptions search;
            search.restarts = opts.search_restarts;
            search.seed = opts.restart_seed;
            est.z_init = latent_search(net, x0, search);
        }
    }
    est.map = latent_map(lp, y, est.z_init, opts.bfgs);
    est.x = net.mean(est.map.z);
    return est;
}

LatentSamples sample_latent_posterior(const LatentPosterior& lp, const Vector& y, int n_samples,
                                      std::uint64_t seed) {
    if (n_samples < 1) throw InvalidArgument("sample_latent_posterior: n_samples must be >= 1");
    const GeneratorNet& net = lp.net();
    const Eigen::Index p = net.latent_dim();

    const LatentMapResult start = latent_map(lp, y, Vector::Zero(p));
    Vector z = start.z;
    double logp = lp.log_density(z, y);

    const Matrix aj = lp.model().A() * net.jacobian(z);
    Matrix h = aj.transpose() * aj / lp.model().sigma2();
    h.diagonal().array() += 1.0;
    const SpdFactor h_factor(h);
    // ε ↦ L⁻ᵀ ε has covariance H⁻¹.
    const Matrix h_lower_t = h_factor.lower().transpose();

    CounterRng rng(seed);
    const int burn_in = n_samples / 5;
    double log_scale = std::log(2.38 / std::sqrt(static_cast<double>(p)));

    LatentSamples out;
    out.z.resize(n_samples, p);
    int accepted_kept = 0;
    for (int t = 0; t < burn_in + n_samples; ++t) {
        const Vector eps = rng.normal_vector(p);
        const Vector step = h_lower_t.triangularView<Eigen::Upper>().solve(eps);
        const Vector prop = z + std::exp(log_scale) * step;
        const double logp_prop = lp.log_density(prop, y);
        const double log_u = std::log(rng.uniform());
        const double log_alpha = std::min(0.0, logp_prop - logp);
        const bool accept = std::isfinite(logp_prop) && log_u < log_alpha;
        if (accept) {
            z = prop;
            logp = logp_prop;
        }
        if (t < burn_in) {
            const double rate = 1.0 / std::pow(static_cast<double>(t + 1), 0.6);
            log_scale += rate * (std::exp(log_alpha) - 0.25);
        } else {
            out.z.row(t - burn_in) = z.transpose();
            if (accept) ++accepted_kept;
        }
    }
    out.acceptance_rate = static_cast<double>(accepted_kept) / n_samples;
    out.proposal_scale = std::exp(log_scale);
    return out;
}

LatentPosteriorMean latent_posterior_mean(const LatentPosterior& lp, const Vector& y, int n_samples,
                                          std::uint64_t seed) {
    const LatentSamples samples = sample_latent_posterior(lp, y, n_samples, seed);
    const GeneratorNet& net = lp.net();
    const Eigen::Index d = net.output_dim();

    Matrix g(n_samples, d);
    for (int i = 0; i < n_samples; ++i) g.row(i) = net.mean(samples.z.row(i).transpose()).transpose();

    LatentPosteriorMean out;
    out.mean = g.colwise().mean().transpose();
    out.std_error = Vector::Zero(d);
    out.acceptance_rate = samples.acceptance_rate;

    constexpr int kBatches = 20;
    if (n_samples >= kBatches) {
        const int batch = n_samples / kBatches;
        Matrix batch_means(kBatches, d);
        for (int b = 0; b < kBatches; ++b) {
            batch_means.row(b) = g.middleRows(static_cast<Eigen::Index>(b) * batch, batch).colwise().mean();
        }
        const Eigen::RowVectorXd bm = batch_means.colwise().mean();
        const Matrix centered = batch_means.rowwise() - bm;
        const Vector var = centered.colwise().squaredNorm().transpose() / (kBatches - 1);
        out.std_error = (var / kBatches).cwiseSqrt();
    }
    return out;
}

Matrix latent_asymptotic_cov(const GeneratorNet& net, const Matrix& a, double sigma2,
                             const Vector& z_star) {
    if (!(sigma2 > 0.0)) throw InvalidArgument("latent_asymptotic_cov: sigma2 must be positive");
    const Matrix jac = net.jacobian(z_star);
    if (a.cols() != jac.rows()) throw InvalidArgument("latent_asymptotic_cov: operator shape mismatch");
    const Matrix aj = a * jac;
    const Matrix fisher = symmetrized(aj.transpose() * aj) / sigma2;
    const Vector ev = symmetric_eigenvalues(fisher);
    if (!(ev[0] > 1e-13 * std::max(ev[ev.size() - 1], 0.0))) {
        throw NumericalError("latent_asymptotic_cov: Fisher information is singular at z*");
    }
    const Eigen::LLT<Matrix> llt(fisher);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("latent_asymptotic_cov: Fisher information is singular at z*");
    }
    return symmetrized(jac * llt.solve(jac.transpose()));
}

}  // namespace genprior
