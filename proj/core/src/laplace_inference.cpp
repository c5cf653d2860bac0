#include "genprior/laplace_inference.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/QR>

#include "genprior/errors.hpp"
#include "genprior/linalg.hpp"
#include "genprior/rng.hpp"

namespace genprior {

Vector least_squares_init(const LinearModel& model, const Vector& y, const GeneratorNet& net) {
    if (y.size() != model.n()) throw InvalidArgument("least_squares_init: y has wrong size");
    if (model.d() != net.output_dim()) throw InvalidArgument("least_squares_init: generator/operator mismatch");
    const Eigen::Index p = net.latent_dim();
    const Vector z = Vector::Zero(p);
    const Covariance gamma0 = net.gamma(z);
    const Vector g0 = net.mean(z);
    const Matrix& a = model.A();
    const double s2 = model.sigma2();

    Matrix lhs = a.transpose() * a;
    lhs += s2 * gamma0.solve(Matrix(Matrix::Identity(model.d(), model.d())));
    const Vector rhs = a.transpose() * y + s2 * gamma0.solve(g0);
    return SpdFactor(lhs).solve(rhs);
}

double expansion_log_integrand(const GeneratorNet& net, const Vector& x, const Vector& z) {
    const Vector r = x - net.mean(z);
    const Covariance gamma = net.gamma(z);
    return -0.5 * (gamma.log_det() + z.squaredNorm() + gamma.quad_form(r));
}

double expansion_log_integrand(const GeneratorNet& net, const Vector& x, const Vector& z,
                               Vector& grad) {
    if (net.cov_head().variant == CovKind::full) {
        const auto f = [&](const Vector& zz) { return expansion_log_integrand(net, x, zz); };
        grad = finite_difference_gradient(f, z, 1e-6);
        return f(z);
    }
    Matrix jac;
    const Vector r = x - net.mean(z, jac);
    Matrix var_jac;
    const Vector var = net.gamma_variances(z, &var_jac);
    const Vector w = r.cwiseQuotient(var);
    // ∂/∂vᵢ of −½(log vᵢ + rᵢ²/vᵢ) is −½(1/vᵢ − rᵢ²/vᵢ²).
    const Vector dv = -0.5 * (var.cwiseInverse() - w.cwiseProduct(w));
    grad = -z + jac.transpose() * w + var_jac.transpose() * dv;
    return -0.5 * (var.array().log().sum() + z.squaredNorm() + r.dot(w));
}

Vector latent_search(const GeneratorNet& net, const Vector& x, const LatentSearchOptions& opts) {
    const Eigen::Index p = net.latent_dim();
    const Objective neg = [&](const Vector& z, Vector& grad) {
        const double v = expansion_log_integrand(net, x, z, grad);
        grad = -grad;
        return -v;
    };
    BfgsResult best = minimize_bfgs(neg, Vector::Zero(p), opts.bfgs);
    CounterRng rng(opts.seed);
    for (int k = 0; k < opts.restarts; ++k) {
        const BfgsResult r = minimize_bfgs(neg, rng.normal_vector(p), opts.bfgs);
        if (r.value < best.value) best = r;
    }
    return best.x;
}

namespace {

struct UpdateSystem {
    Matrix lhs;  // I + JᵀΓ⁻¹J
    Vector rhs;  // JᵀΓ⁻¹(x − g(z) + J z)
};

UpdateSystem update_system(const GeneratorNet& net, const Vector& x, const Vector& z) {
    Matrix jac;
    const Vector g = net.mean(z, jac);
    const Covariance gamma = net.gamma(z);
    const Matrix gi_j = gamma.solve(jac);
    UpdateSystem sys;
    sys.lhs = symmetrized(jac.transpose() * gi_j);
    sys.lhs.diagonal().array() += 1.0;
    sys.rhs = gi_j.transpose() * (x - g + jac * z);
    return sys;
}

}  // namespace

double expansion_log_integrand_gain(const GeneratorNet& net, const Vector& x, const Vector& z0, const Vector& z1) {
    const Vector g0 = net.mean(z0);
    const Vector g1 = net.mean(z1);
    const Vector r0 = x - g0;
    const Vector r1 = x - g1;
    const Vector dr = g0 - g1;  // r1 − r0
    const double dz = (z1 - z0).dot(z1 + z0);
    const Covariance c0 = net.gamma(z0);
    const Covariance c1 = net.gamma(z1);
    double dquad = 0.0;
    double dlogdet = 0.0;
    if (c0.kind() == CovKind::full) {
        // r1ᵀΓ1⁻¹r1 − r0ᵀΓ0⁻¹r0 = drᵀΓ1⁻¹(r1 + r0) + r0ᵀΓ1⁻¹(Γ0 − Γ1)Γ0⁻¹r0
        const Matrix dgamma = c0.dense() - c1.dense();
        dquad = dr.dot(c1.solve(Vector(r1 + r0))) + c1.solve(r0).dot(dgamma * c0.solve(r0));
        dlogdet = c1.log_det() - c0.log_det();
    } else {
        const Vector v0 = c0.diagonal_entries();
        const Vector v1 = c1.diagonal_entries();
        for (Eigen::Index i = 0; i < v0.size(); ++i) {
            const double dv = v1[i] - v0[i];
            dquad += dr[i] * (r1[i] + r0[i]) / v1[i] - r0[i] * r0[i] * dv / (v0[i] * v1[i]);
            dlogdet += std::log1p(dv / v0[i]);
        }
    }
    return -0.5 * (dlogdet + dz + dquad);
}

double expansion_update_residual(const GeneratorNet& net, const Vector& x, const Vector& z) {
    const UpdateSystem sys = update_system(net, x, z);
    return (sys.lhs * z - sys.rhs).norm();
}

ExpansionResult select_expansion_point(const LinearModel& model, const Vector& y,
                                       const GeneratorNet& net, const ExpansionOptions& opts) {
    ExpansionResult res;
    res.x0 = least_squares_init(model, y, net);
    if (net.has_encoder()) {
        res.z_initial = net.encoder_mean(res.x0);
        res.used_encoder = true;
    } else {
        res.z_initial = latent_search(net, res.x0, opts.search);
    }

    Vector z = res.z_initial;
    double value = expansion_log_integrand(net, res.x0, z);
    res.trace.push_back(value);
    for (int it = 0; it < opts.max_iter; ++it) {
        const UpdateSystem sys = update_system(net, res.x0, z);
        const Vector candidate = SpdFactor(sys.lhs).solve(sys.rhs);
        if (!candidate.allFinite()) break;
        const double gain = expansion_log_integrand_gain(net, res.x0, z, candidate);
        if (!(gain > 0.0)) break;
        z = candidate;
        value += gain;
        res.trace.push_back(value);
        res.gains.push_back(gain);
        ++res.iterations;
        if (gain < opts.tol) break;
    }
    res.z0 = z;
    res.residual = expansion_update_residual(net, res.x0, z);
    return res;
}

LaplacePrior laplace_prior(const GeneratorNet& net, const Vector& z0) {
    Matrix jac;
    const Vector g = net.mean(z0, jac);
    LaplacePrior prior;
    prior.z0 = z0;
    prior.mean = g - jac * z0;
    prior.cov = symmetrized(net.gamma(z0).dense() + jac * jac.transpose());
    return prior;
}

LaplacePosterior laplace_posterior(const LinearModel& model, const Vector& y, LaplacePrior prior) {
    const Matrix& a = model.A();
    if (y.size() != model.n()) throw InvalidArgument("laplace_posterior: y has wrong size");
    if (prior.mean.size() != model.d() || prior.cov.rows() != model.d()) {
        throw InvalidArgument("laplace_posterior: prior dimension does not match the operator");
    }
    const double s2 = model.sigma2();
    const Matrix prior_precision = SpdFactor(prior.cov).inverse();

    Matrix scaled_precision = a.transpose() * a;
    scaled_precision += s2 * prior_precision;
    const SpdFactor factor(scaled_precision);

    LaplacePosterior post;
    post.mean = factor.solve(Vector(a.transpose() * y + s2 * (prior_precision * prior.mean)));
    post.cov = s2 * factor.inverse();
    post.prior = std::move(prior);
    return post;
}

Vector marginal_pixel_std(const LaplacePosterior& post) { return post.cov.diagonal().cwiseSqrt(); }

Matrix laplace_asymptotic_cov(const LinearModel& model) {
    const Matrix& a = model.A();
    Eigen::ColPivHouseholderQR<Matrix> qr(a);
    const Eigen::Index d = a.cols();
    if (qr.rank() < d) {
        throw NumericalError("laplace_asymptotic_cov: operator is rank deficient (rank " +
                             std::to_string(qr.rank()) + " < " + std::to_string(d) + ")");
    }
    const Matrix r = qr.matrixR().topLeftCorner(d, d).triangularView<Eigen::Upper>();
    const Matrix r_inv = r.triangularView<Eigen::Upper>().solve(Matrix::Identity(d, d));
    const Matrix inner = r_inv * r_inv.transpose();
    const auto& perm = qr.colsPermutation();
    return symmetrized(model.sigma2() * (perm * inner * perm.transpose()));
}

LaplaceEstimate laplace_estimate(const LinearModel& model, const Vector& y, const GeneratorNet& net,
                                 const ExpansionOptions& opts) {
    LaplaceEstimate est;
    est.expansion = select_expansion_point(model, y, net, opts);
    est.posterior = laplace_posterior(model, y, laplace_prior(net, est.expansion.z0));
    return est;
}

}  // namespace genprior
