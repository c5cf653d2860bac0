#include <benchmark/benchmark.h>

#include "genprior/baselines.hpp"
#include "genprior/experiments.hpp"
#include "genprior/forward_model.hpp"
#include "genprior/laplace_inference.hpp"
#include "genprior/latent_inference.hpp"

using namespace genprior;

namespace {

struct Problem {
    GeneratorNet net;
    LinearModel model;
    Vector y;
};

Problem make_problem(int side, double sigma) {
    SyntheticSpec spec;
    spec.height = side;
    spec.width = side;
    GeneratorNet net = make_synthetic_generator(spec);
    const Vector x = make_synthetic_truth(net, 0.02, 11).x;
    LinearModel model(build_blur(3.0, side, side).matrix, sigma * sigma);
    Vector y = observe(model, x, 5);
    return {std::move(net), std::move(model), std::move(y)};
}

void BM_BuildBlur(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(build_blur(3.0, side, side).matrix.data());
}
BENCHMARK(BM_BuildBlur)->Arg(8)->Arg(16)->Arg(28);

void BM_LaplaceEstimate(benchmark::State& state) {
    const Problem pr = make_problem(static_cast<int>(state.range(0)), 1e-2);
    for (auto _ : state) benchmark::DoNotOptimize(laplace_estimate(pr.model, pr.y, pr.net).posterior.mean.data());
}
BENCHMARK(BM_LaplaceEstimate)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_LatentEstimate(benchmark::State& state) {
    const Problem pr = make_problem(static_cast<int>(state.range(0)), 1e-2);
    const LatentPosterior lp(pr.model, pr.net);
    for (auto _ : state) benchmark::DoNotOptimize(latent_estimate(lp, pr.y).x.data());
}
BENCHMARK(BM_LatentEstimate)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_L2Oracle(benchmark::State& state) {
    const Problem pr = make_problem(8, 1e-2);
    const Vector x = pr.net.mean(Vector::Zero(pr.net.latent_dim()));
    for (auto _ : state) benchmark::DoNotOptimize(l2_oracle(pr.model.A(), pr.y, x).lambda);
}
BENCHMARK(BM_L2Oracle)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
