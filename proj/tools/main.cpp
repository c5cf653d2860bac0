// genprior command line front end.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "genprior/baselines.hpp"
#include "genprior/errors.hpp"
#include "genprior/experiments.hpp"
#include "genprior/forward_model.hpp"
#include "genprior/generator.hpp"
#include "genprior/laplace_inference.hpp"
#include "genprior/latent_inference.hpp"
#include "genprior/rng.hpp"

namespace fs = std::filesystem;
using namespace genprior;

namespace {

struct Shape {
    int height = 0;
    int width = 0;
};

Shape square_shape(Eigen::Index d, int height, int width) {
    if (height > 0 && width > 0) {
        if (static_cast<Eigen::Index>(height) * width != d) {
            throw InvalidArgument("--height * --width does not match the generator output size");
        }
        return {height, width};
    }
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(d))));
    if (static_cast<Eigen::Index>(side) * side != d) {
        throw InvalidArgument("output size is not a square; pass --height and --width");
    }
    return {side, side};
}

GeneratorNet load_or_synthetic(const std::string& weights, std::uint64_t seed) {
    if (!weights.empty()) return load_weights(weights);
    SyntheticSpec spec;
    spec.seed = seed;
    return make_synthetic_generator(spec);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generative priors for linear inverse problems"};
    app.set_version_flag("--version", GENPRIOR_VERSION_STRING);
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "Write prior draws x ~ N(g(z), Gamma(z)) as an image grid");
    std::string gen_weights, gen_out = "draws.pgm";
    int gen_count = 64, gen_cols = 8, gen_h = 0, gen_w = 0;
    std::uint64_t gen_seed = 1;
    bool gen_mean_only = false;
    gen->add_option("--weights", gen_weights, "Generator weights file (synthetic generator when omitted)");
    gen->add_option("--count", gen_count, "Number of draws")->check(CLI::PositiveNumber);
    gen->add_option("--columns", gen_cols, "Images per grid row")->check(CLI::PositiveNumber);
    gen->add_option("--seed", gen_seed, "Base seed");
    gen->add_option("--height", gen_h);
    gen->add_option("--width", gen_w);
    gen->add_flag("--mean-only", gen_mean_only, "Write g(z) instead of a full draw");
    gen->add_option("--out", gen_out, "Output PGM");

    // blur-demo
    auto* blur = app.add_subcommand("blur-demo", "Blur one image at several eta values");
    std::string blur_images, blur_out = "blur";
    int blur_index = 0, blur_radius = 4;
    std::vector<double> blur_etas{2, 3, 4, 5};
    std::uint64_t blur_seed = 1;
    blur->add_option("--images", blur_images, "IDX image file (synthetic truth when omitted)");
    blur->add_option("--index", blur_index, "Image index")->check(CLI::NonNegativeNumber);
    blur->add_option("--eta", blur_etas, "Blur precisions");
    blur->add_option("--radius", blur_radius)->check(CLI::PositiveNumber);
    blur->add_option("--seed", blur_seed);
    blur->add_option("--out", blur_out, "Output directory");

    // infer
    auto* inf = app.add_subcommand("infer", "Reconstruct a single blurred image");
    std::string inf_weights, inf_images, inf_method = "laplace", inf_out = "infer";
    int inf_index = 0, inf_h = 0, inf_w = 0;
    double inf_eta = 3.0, inf_sigma = 1e-2, inf_offset = 0.02;
    std::uint64_t inf_seed = 1;
    inf->add_option("--weights", inf_weights, "Generator weights file (synthetic generator when omitted)");
    inf->add_option("--images", inf_images, "IDX image file (synthetic truth when omitted)");
    inf->add_option("--index", inf_index)->check(CLI::NonNegativeNumber);
    inf->add_option("--method", inf_method, "l2, latent, laplace or guide");
    inf->add_option("--eta", inf_eta)->check(CLI::PositiveNumber);
    inf->add_option("--sigma", inf_sigma)->check(CLI::PositiveNumber);
    inf->add_option("--offset-std", inf_offset, "Synthetic truth offset from the generator manifold");
    inf->add_option("--seed", inf_seed);
    inf->add_option("--height", inf_h);
    inf->add_option("--width", inf_w);
    inf->add_option("--out", inf_out, "Output directory");

    // experiment
    auto* exp = app.add_subcommand("experiment", "Run a full sweep from a JSON config file");
    std::string exp_config, exp_out;
    exp->add_option("config", exp_config, "Config file")->required()->check(CLI::ExistingFile);
    exp->add_option("--out", exp_out, "Override output_dir");

    // report
    auto* rep = app.add_subcommand("report", "Charts, box plots and a summary table from results.csv");
    std::string rep_csv, rep_out = "report";
    rep->add_option("results", rep_csv, "results.csv")->required()->check(CLI::ExistingFile);
    rep->add_option("--out", rep_out, "Output directory");

    // validate-weights
    auto* val = app.add_subcommand("validate-weights", "Check a generator weights file");
    std::string val_path;
    val->add_option("weights", val_path)->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            const GeneratorNet net = load_or_synthetic(gen_weights, 20240601);
            const Shape shape = square_shape(net.output_dim(), gen_h, gen_w);
            std::vector<Vector> draws;
            for (int i = 0; i < gen_count; ++i) {
                const std::uint64_t s = hash_words({gen_seed, static_cast<std::uint64_t>(i)});
                if (gen_mean_only) {
                    CounterRng rng(s);
                    draws.push_back(net.mean(rng.normal_vector(net.latent_dim())));
                } else {
                    draws.push_back(net.sample_prior_draw(s));
                }
            }
            int gh = 0, gw = 0;
            const Vector grid = tile_images(draws, shape.height, shape.width, gen_cols, gh, gw);
            write_pgm(gen_out, grid, gh, gw);
            std::cout << "wrote " << gen_out << " (" << gen_count << " draws)\n";
        } else if (*blur) {
            Vector x;
            Shape shape;
            if (!blur_images.empty()) {
                const ImageSet set = load_idx_images(blur_images, "", blur_index + 1);
                if (static_cast<int>(set.images.size()) <= blur_index) throw InvalidArgument("--index out of range");
                x = set.images[blur_index].pixels;
                shape = {set.rows, set.cols};
            } else {
                const GeneratorNet net = make_synthetic_generator({});
                x = make_synthetic_truth(net, 0.0, blur_seed).x;
                shape = square_shape(net.output_dim(), 0, 0);
            }
            fs::create_directories(blur_out);
            std::vector<Vector> tiles{x};
            for (double eta : blur_etas) {
                const BlurOperator op = build_blur(eta, shape.height, shape.width, blur_radius);
                tiles.push_back(op.matrix * x);
            }
            int gh = 0, gw = 0;
            const Vector grid = tile_images(tiles, shape.height, shape.width, static_cast<int>(tiles.size()), gh, gw);
            write_pgm(fs::path(blur_out) / "blur.pgm", grid, gh, gw);
            std::cout << "wrote " << (fs::path(blur_out) / "blur.pgm").string() << '\n';
        } else if (*inf) {
            const GeneratorNet net = load_or_synthetic(inf_weights, 20240601);
            Vector x;
            Shape shape;
            if (!inf_images.empty()) {
                const ImageSet set = load_idx_images(inf_images, "", inf_index + 1);
                if (static_cast<int>(set.images.size()) <= inf_index) throw InvalidArgument("--index out of range");
                x = set.images[inf_index].pixels;
                shape = {set.rows, set.cols};
                if (x.size() != net.output_dim()) throw InvalidArgument("image size does not match the generator");
            } else {
                x = make_synthetic_truth(net, inf_offset, hash_words({inf_seed, static_cast<std::uint64_t>(inf_index)})).x;
                shape = square_shape(net.output_dim(), inf_h, inf_w);
            }
            const Method method = method_from_string(inf_method);
            const BlurOperator op = build_blur(inf_eta, shape.height, shape.width);
            const LinearModel model(op.matrix, inf_sigma * inf_sigma);
            const Vector y = observe(model, x, inf_seed);
            fs::create_directories(inf_out);

            Vector xhat;
            Vector pixel_std;
            GuideOptions gopts;
            switch (method) {
                case Method::l2: {
                    const L2OracleResult r = l2_oracle(model.A(), y, x);
                    xhat = r.x;
                    std::cout << "lambda " << r.lambda << '\n';
                    break;
                }
                case Method::latent: {
                    const LatentPosterior lp(model, net);
                    const LatentEstimate est = latent_estimate(lp, y);
                    xhat = est.x;
                    std::cout << "latent map " << to_string(est.map.status) << " after " << est.map.iterations
                              << " iterations\n";
                    break;
                }
                case Method::laplace: {
                    const LaplaceEstimate est = laplace_estimate(model, y, net);
                    xhat = est.posterior.mean;
                    pixel_std = marginal_pixel_std(est.posterior);
                    std::cout << "expansion updates " << est.expansion.iterations << '\n';
                    break;
                }
                case Method::guide: {
                    const GuideVerdict v = guide(model, y, net, gopts, inf_seed);
                    xhat = v.chosen_estimate();
                    std::cout << "guide chose " << to_string(v.chosen) << " (laplace " << v.err_laplace << ", latent "
                              << v.err_latent << ")\n";
                    break;
                }
            }
            write_pgm(fs::path(inf_out) / "truth.pgm", x, shape.height, shape.width);
            write_pgm(fs::path(inf_out) / "observed.pgm", y, shape.height, shape.width);
            write_pgm(fs::path(inf_out) / "reconstruction.pgm", xhat, shape.height, shape.width);
            if (pixel_std.size() > 0) {
                const double hi = std::max(pixel_std.maxCoeff(), 1e-12);
                write_pgm(fs::path(inf_out) / "pixel_std.pgm", pixel_std, shape.height, shape.width, 0.0, hi);
            }
            const double value = psnr(x, xhat);
            std::printf("psnr %.4f dB\n", value);
        } else if (*exp) {
            ExperimentConfig cfg = load_experiment_config(exp_config);
            if (!exp_out.empty()) cfg.output_dir = exp_out;
            const ExperimentResult r = run_experiment(cfg);
            std::cout << "records " << r.records.size() << ", failures " << r.failures.size() << '\n'
                      << "wrote " << r.csv_path.string() << " and " << r.manifest_path.string() << '\n';
            return r.failures.empty() ? 0 : 3;
        } else if (*rep) {
            const ReportFiles files = report(rep_csv, rep_out);
            std::cout << "wrote " << files.charts.size() << " charts, " << files.boxplots.size()
                      << " box plots and " << files.summary.string() << '\n';
        } else if (*val) {
            const GeneratorNet net = load_weights(val_path);
            std::cout << "ok: latent_dim " << net.latent_dim() << ", output_dim " << net.output_dim()
                      << ", cov head " << (net.cov_head().variant == CovKind::isotropic  ? "isotropic"
                                           : net.cov_head().variant == CovKind::diagonal ? "diagonal"
                                                                                         : "full")
                      << ", encoder " << (net.has_encoder() ? "yes" : "no") << '\n';
        }
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
