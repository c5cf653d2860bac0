#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/LU>

#include "fixtures.hpp"
#include "genprior/errors.hpp"
#include "genprior/prior_oracle.hpp"

using namespace genprior;

namespace {

// log N(x | m, C) by an explicit LU inverse and determinant.
double dense_log_normal(const Vector& x, const Vector& m, const Matrix& c) {
    const Eigen::FullPivLU<Matrix> lu(c);
    const Vector r = x - m;
    const double d = static_cast<double>(x.size());
    return -0.5 * (d * std::log(2.0 * std::numbers::pi) + std::log(lu.determinant()) +
                   r.dot(lu.inverse() * r));
}

}  // namespace

TEST_CASE("log-sum-exp") {
    CHECK(std::isinf(log_sum_exp(Vector())));
    Vector v(3);
    v << 1000.0, 1000.0, -1e300;
    CHECK(log_sum_exp(v) == doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-14));
    v << 0.1, 0.2, 0.3;
    CHECK(log_sum_exp(v) == doctest::Approx(std::log(std::exp(0.1) + std::exp(0.2) + std::exp(0.3))));
}

TEST_CASE("prior estimate for an affine generator") {
    CounterRng rng(31);
    const Matrix w = fixtures::random_matrix(4, 2, rng, 0.3);
    const Vector b = rng.normal_vector(4) * 0.2;
    const double var = 0.05;
    const GeneratorNet net = fixtures::affine_net(w, b, var);
    const Matrix marg = var * Matrix::Identity(4, 4) + w * w.transpose();
    for (int k = 0; k < 3; ++k) {
        const Vector x = b + w * rng.normal_vector(2) + std::sqrt(var) * rng.normal_vector(4);
        const PriorEstimate est = mc_log_prior(net, x, 100000, 100 + k);
        CHECK(est.n_samples == 100000);
        CHECK(est.std_error > 0.0);
        CHECK(std::abs(est.log_value - dense_log_normal(x, b, marg)) < 3.0 * est.std_error);
    }
}

TEST_CASE("prior estimate for a constant generator") {
    Vector m(3);
    m << 0.2, -0.1, 0.5;
    const GeneratorNet net = fixtures::constant_net(m, 2, 0.04);
    Vector x(3);
    x << 0.3, 0.0, 0.4;
    const PriorEstimate est = mc_log_prior(net, x, 1000, 5);
    const double want = dense_log_normal(x, m, 0.04 * Matrix::Identity(3, 3));
    CHECK(est.log_value == doctest::Approx(want).epsilon(1e-12));
    CHECK(est.std_error < 1e-12);
}

TEST_CASE("standard error shrinks at the Monte-Carlo rate") {
    const GeneratorNet net = fixtures::tanh_net_2x3();
    Vector x(3);
    x << 0.1, -0.2, 0.3;
    double se_n = 0.0, se_2n = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        se_n += mc_log_prior(net, x, 20000, seed).std_error;
        se_2n += mc_log_prior(net, x, 40000, 1000 + seed).std_error;
    }
    const double ratio = se_2n / se_n;
    CHECK(std::abs(ratio - 1.0 / std::sqrt(2.0)) < 0.2 / std::sqrt(2.0));
}

TEST_CASE("prior estimate preconditions and determinism") {
    const GeneratorNet net = fixtures::tanh_net_2x3();
    const Vector x = Vector::Zero(3);
    CHECK_THROWS_AS(mc_log_prior(net, x, 99, 1), InvalidArgument);
    CHECK_THROWS_AS(mc_log_prior(net, Vector::Zero(4), 100, 1), InvalidArgument);
    const PriorEstimate a = mc_log_prior(net, x, 500, 9);
    const PriorEstimate b = mc_log_prior(net, x, 500, 9);
    CHECK(a.log_value == b.log_value);
    CHECK(a.std_error == b.std_error);
    CHECK(std::isfinite(a.log_value));
}

TEST_CASE("posterior moments for an affine generator") {
    CounterRng rng(77);
    const Matrix w = fixtures::random_matrix(3, 2, rng, 0.4);
    const Vector b = rng.normal_vector(3) * 0.1;
    const double var = 0.02;
    const GeneratorNet net = fixtures::affine_net(w, b, var, CovKind::diagonal, true);
    const Matrix a = Matrix::Identity(3, 3) + 0.2 * fixtures::random_matrix(3, 3, rng);
    const double sigma = 0.1;
    const LinearModel model(a, sigma * sigma);
    const Vector x_true = b + w * rng.normal_vector(2);
    const Vector y = observe(model, x_true, 4);

    const fixtures::Conjugate exact = fixtures::conjugate_posterior(
        a, y, sigma * sigma, b, var * Matrix::Identity(3, 3) + w * w.transpose());
    const PosteriorMoments mc = mc_posterior_moments(model, y, net, 4000, 11);
    CHECK_FALSE(mc.low_ess);
    CHECK(mc.ess > 1000.0);
    for (Eigen::Index i = 0; i < 3; ++i) {
        CHECK(mc.std_error[i] > 0.0);
        CHECK(std::abs(mc.mean[i] - exact.mean[i]) < 3.0 * mc.std_error[i]);
    }
    CHECK(fixtures::rel_err(mc.cov, exact.cov) < 0.15);
}

TEST_CASE("vanishing likelihood leaves the prior") {
    const GeneratorNet net = fixtures::tanh_net_2x3();
    const LinearModel model(Matrix::Identity(3, 3), 1e6);
    const Vector y = net.mean(Vector::Zero(2));
    const PosteriorMoments post = mc_posterior_moments(model, y, net, 4000, 21);

    // Direct prior sampling: x = g(z) + Γ(z)^{1/2} ε.
    CounterRng rng(22);
    const int n = 100000;
    Matrix xs(n, 3);
    for (int i = 0; i < n; ++i) {
        const Vector z = rng.normal_vector(2);
        const Matrix g = net.gamma(z).dense();
        const Matrix l = g.llt().matrixL();
        xs.row(i) = (net.mean(z) + l * rng.normal_vector(3)).transpose();
    }
    const Vector prior_mean = xs.colwise().mean().transpose();
    const Vector prior_se =
        ((xs.rowwise() - prior_mean.transpose()).array().square().colwise().sum() / (n - 1.0) / n)
            .sqrt()
            .transpose();
    for (Eigen::Index i = 0; i < 3; ++i) {
        const double se = std::hypot(post.std_error[i], prior_se[i]);
        CHECK(std::abs(post.mean[i] - prior_mean[i]) < 3.0 * se);
    }
}

TEST_CASE("posterior moments are deterministic and flag a small sample") {
    const GeneratorNet net = fixtures::tanh_net_2x3();
    const LinearModel model(Matrix::Identity(3, 3), 1e-2);
    const Vector y = net.mean(Vector::Constant(2, 0.3));
    const PosteriorMoments a = mc_posterior_moments(model, y, net, 300, 3);
    const PosteriorMoments b = mc_posterior_moments(model, y, net, 300, 3);
    CHECK(a.mean == b.mean);
    CHECK(a.cov == b.cov);
    CHECK(a.ess == b.ess);

    const PosteriorMoments small = mc_posterior_moments(model, y, net, 20, 3);
    CHECK(small.ess <= 20.0);
    CHECK(small.low_ess);
    CHECK_THROWS_AS(mc_posterior_moments(model, y, net, 1, 3), InvalidArgument);
}
