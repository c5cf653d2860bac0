#include "genprior/baselines.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#include "genprior/errors.hpp"
#include "genprior/rng.hpp"

namespace genprior {

Vector l2_solve(const Matrix& a, const Vector& y, double lambda) {
    if (!(lambda >= 0.0)) throw InvalidArgument("l2_solve: lambda must be >= 0");
    if (a.rows() != y.size()) throw InvalidArgument("l2_solve: shape mismatch");
    Matrix lhs = a.transpose() * a;
    lhs.diagonal().array() += lambda;
    const Eigen::LLT<Matrix> llt(lhs);
    if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-15)) {
        throw NumericalError("l2_solve: normal equations are singular");
    }
    const Vector rhs = a.transpose() * y;
    Vector x = llt.solve(rhs);
    if (!x.allFinite()) throw NumericalError("l2_solve: normal equations are singular");
    return x;
}

std::vector<double> log_grid(double lo, double hi, int count) {
    if (!(lo > 0.0) || !(hi >= lo) || count < 1) throw InvalidArgument("log_grid: bad bounds");
    std::vector<double> grid(count);
    if (count == 1) {
        grid[0] = lo;
        return grid;
    }
    const double a = std::log10(lo);
    const double b = std::log10(hi);
    for (int i = 0; i < count; ++i) grid[i] = std::pow(10.0, a + (b - a) * i / (count - 1));
    return grid;
}

std::vector<double> default_lambda_grid() { return log_grid(1e-8, 1e2, 61); }

L2OracleResult l2_oracle(const Matrix& a, const Vector& y, const Vector& x_true,
                         const std::vector<double>& lambda_grid) {
    if (lambda_grid.empty()) throw InvalidArgument("l2_oracle: empty lambda grid");
    L2OracleResult best;
    best.error = std::numeric_limits<double>::infinity();
    best.errors.reserve(lambda_grid.size());
    for (double lambda : lambda_grid) {
        Vector x = l2_solve(a, y, lambda);
        const double err = (x - x_true).norm();
        best.errors.push_back(err);
        if (err < best.error) {
            best.error = err;
            best.lambda = lambda;
            best.x = std::move(x);
        }
    }
    return best;
}

std::string to_string(Method m) {
    switch (m) {
        case Method::l2: return "l2";
        case Method::latent: return "latent";
        case Method::laplace: return "laplace";
        case Method::guide: return "guide";
    }
    return "unknown";
}

Method method_from_string(const std::string& name) {
    if (name == "l2") return Method::l2;
    if (name == "latent") return Method::latent;
    if (name == "laplace") return Method::laplace;
    if (name == "guide") return Method::guide;
    throw InvalidArgument("unknown method '" + name + "'");
}

GuideVerdict guide_from_estimates(const LinearModel& model, const GeneratorNet& net, const Vector& x_laplace,
                                  const Vector& x_latent, const GuideOptions& opts, std::uint64_t seed) {
    const LatentPosterior lp(model, net);
    GuideVerdict v;
    v.virtual_seed = seed;
    v.x_laplace = x_laplace;
    v.x_latent = x_latent;

    const double sigma = opts.noiseless ? 0.0 : model.sigma();
    const Vector y_laplace = observe(model.A(), v.x_laplace, sigma, hash_words({seed, 1}));
    const Vector y_latent = observe(model.A(), v.x_latent, sigma, hash_words({seed, 2}));

    const auto laplace_of = [&](const Vector& data) {
        return laplace_estimate(model, data, net, opts.expansion).posterior.mean;
    };
    const auto latent_of = [&](const Vector& data) { return latent_estimate(lp, data, opts.latent).x; };

    if (opts.cross) {
        v.err_laplace = (laplace_of(y_latent) - v.x_latent).squaredNorm();
        v.err_latent = (latent_of(y_laplace) - v.x_laplace).squaredNorm();
    } else {
        v.err_laplace = (laplace_of(y_laplace) - v.x_laplace).squaredNorm();
        v.err_latent = (latent_of(y_latent) - v.x_latent).squaredNorm();
    }
    v.chosen = v.err_latent < v.err_laplace ? Method::latent : Method::laplace;
    return v;
}

GuideVerdict guide(const LinearModel& model, const Vector& y, const GeneratorNet& net,
                   const GuideOptions& opts, std::uint64_t seed) {
    const LatentPosterior lp(model, net);
    const Vector x_laplace = laplace_estimate(model, y, net, opts.expansion).posterior.mean;
    const Vector x_latent = latent_estimate(lp, y, opts.latent).x;
    return guide_from_estimates(model, net, x_laplace, x_latent, opts, seed);
}

}  // namespace genprior
