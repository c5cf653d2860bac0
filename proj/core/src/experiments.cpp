#include "genprior/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "genprior/errors.hpp"
#include "genprior/forward_model.hpp"
#include "genprior/rng.hpp"

#ifndef GENPRIOR_VERSION_STRING
#define GENPRIOR_VERSION_STRING "unknown"
#endif

namespace genprior {

namespace {

using nlohmann::json;

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
    if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("config: field '") + key + "' has the wrong type: " + e.what());
    }
}

std::string format_number(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

double parse_number(const std::string& field, int line, const char* column) {
    if (field == "inf") return std::numeric_limits<double>::infinity();
    if (field == "-inf") return -std::numeric_limits<double>::infinity();
    try {
        std::size_t used = 0;
        const double v = std::stod(field, &used);
        if (used != field.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ParseError("results csv line " + std::to_string(line) + ": column '" + column +
                         "' is not a number: '" + field + "'");
    }
}

auto record_key(const ExperimentRecord& r) {
    return std::make_tuple(r.image_id, r.eta, r.sigma, r.repeat, static_cast<int>(r.method));
}

}  // namespace

void ExperimentConfig::validate() const {
    if (methods.empty()) throw InvalidArgument("config: method set is empty");
    if (repeats < 1) throw InvalidArgument("config: repeats must be >= 1");
    if (image_count < 0) throw InvalidArgument("config: image_count must be >= 0");
    if (eta_list.empty() || sigma_exponents.empty()) throw InvalidArgument("config: empty eta or sigma list");
    for (double eta : eta_list) {
        if (!(eta > 0.0)) throw InvalidArgument("config: eta values must be positive");
    }
    if (blur_radius < 1) throw InvalidArgument("config: blur_radius must be >= 1");
    if (dataset == Dataset::idx && idx_images.empty()) {
        throw InvalidArgument("config: idx dataset needs dataset.images");
    }
    if (dataset == Dataset::idx && generator.empty()) {
        throw InvalidArgument("config: idx dataset needs a generator weights file");
    }
}

ExperimentConfig parse_experiment_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("config: top level must be an object");

    ExperimentConfig cfg;
    if (doc.contains("dataset")) {
        const json& ds = doc.at("dataset");
        const std::string kind = get_or<std::string>(ds, "kind", "synthetic");
        if (kind == "idx") {
            cfg.dataset = ExperimentConfig::Dataset::idx;
            cfg.idx_images = get_or<std::string>(ds, "images", "");
            cfg.idx_labels = get_or<std::string>(ds, "labels", "");
        } else if (kind == "synthetic") {
            cfg.dataset = ExperimentConfig::Dataset::synthetic;
        } else {
            throw ParseError("config: field 'dataset.kind' must be 'idx' or 'synthetic'");
        }
    }
    cfg.generator = get_or<std::string>(doc, "generator", "");
    cfg.output_dir = get_or<std::string>(doc, "output_dir", cfg.output_dir.string());
    cfg.image_count = get_or<int>(doc, "image_count", cfg.image_count);
    cfg.eta_list = get_or<std::vector<double>>(doc, "eta_list", cfg.eta_list);
    cfg.sigma_exponents = get_or<std::vector<int>>(doc, "sigma_exponents", cfg.sigma_exponents);
    cfg.repeats = get_or<int>(doc, "repeats", cfg.repeats);
    if (doc.contains("methods")) {
        cfg.methods.clear();
        for (const auto& name : get_or<std::vector<std::string>>(doc, "methods", {})) {
            try {
                cfg.methods.push_back(method_from_string(name));
            } catch (const InvalidArgument&) {
                throw ParseError("config: field 'methods' has unknown method '" + name + "'");
            }
        }
    }
    cfg.base_seed = get_or<std::uint64_t>(doc, "base_seed", cfg.base_seed);
    cfg.blur_radius = get_or<int>(doc, "blur_radius", cfg.blur_radius);
    cfg.record_wall_time = get_or<bool>(doc, "record_wall_time", cfg.record_wall_time);

    if (doc.contains("synthetic")) {
        const json& s = doc.at("synthetic");
        cfg.synthetic.height = get_or<int>(s, "height", cfg.synthetic.height);
        cfg.synthetic.width = get_or<int>(s, "width", cfg.synthetic.width);
        cfg.synthetic.latent_dim = get_or<int>(s, "latent_dim", cfg.synthetic.latent_dim);
        cfg.synthetic.hidden = get_or<int>(s, "hidden", cfg.synthetic.hidden);
        cfg.synthetic.gamma_std = get_or<double>(s, "gamma_std", cfg.synthetic.gamma_std);
        cfg.synthetic.eps_gamma = get_or<double>(s, "eps_gamma", cfg.synthetic.eps_gamma);
        cfg.synthetic.with_encoder = get_or<bool>(s, "with_encoder", cfg.synthetic.with_encoder);
        cfg.synthetic.seed = get_or<std::uint64_t>(s, "seed", cfg.synthetic.seed);
        cfg.synthetic_offset_std = get_or<double>(s, "offset_std", cfg.synthetic_offset_std);
    }
    if (doc.contains("lambda_grid")) {
        const json& g = doc.at("lambda_grid");
        cfg.lambda_min = get_or<double>(g, "min", cfg.lambda_min);
        cfg.lambda_max = get_or<double>(g, "max", cfg.lambda_max);
        cfg.lambda_count = get_or<int>(g, "count", cfg.lambda_count);
    }
    if (doc.contains("guide")) {
        const json& g = doc.at("guide");
        cfg.guide.cross = get_or<bool>(g, "cross", cfg.guide.cross);
        cfg.guide.noiseless = get_or<bool>(g, "noiseless", cfg.guide.noiseless);
    }
    if (doc.contains("latent")) {
        const json& l = doc.at("latent");
        cfg.guide.latent.search_restarts = get_or<int>(l, "search_restarts", cfg.guide.latent.search_restarts);
        cfg.guide.latent.bfgs.max_iter = get_or<int>(l, "max_iter", cfg.guide.latent.bfgs.max_iter);
        cfg.guide.latent.bfgs.grad_tol = get_or<double>(l, "grad_tol", cfg.guide.latent.bfgs.grad_tol);
    }
    if (doc.contains("expansion")) {
        const json& e = doc.at("expansion");
        cfg.guide.expansion.max_iter = get_or<int>(e, "max_iter", cfg.guide.expansion.max_iter);
        cfg.guide.expansion.tol = get_or<double>(e, "tol", cfg.guide.expansion.tol);
        cfg.guide.expansion.search.restarts =
            get_or<int>(e, "search_restarts", cfg.guide.expansion.search.restarts);
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("config: cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_experiment_config(ss.str());
}

std::uint64_t cell_seed(std::uint64_t base, int image_id, double eta, int sigma_exponent, int repeat) {
    return hash_words({base, static_cast<std::uint64_t>(image_id), double_bits(eta),
                       static_cast<std::uint64_t>(static_cast<std::int64_t>(sigma_exponent)),
                       static_cast<std::uint64_t>(repeat)});
}

std::string format_results_csv(std::vector<ExperimentRecord> records) {
    std::sort(records.begin(), records.end(),
              [](const ExperimentRecord& a, const ExperimentRecord& b) { return record_key(a) < record_key(b); });
    std::ostringstream os;
    os << kResultsHeader << '\n';
    for (const auto& r : records) {
        os << r.image_id << ',' << format_number(r.eta) << ',' << format_number(r.sigma) << ',' << r.repeat
           << ',' << to_string(r.method) << ',' << format_number(r.psnr) << ',' << format_number(r.wall_ms)
           << ',' << r.seed << ',' << (r.converged ? 1 : 0) << '\n';
    }
    return os.str();
}

std::vector<ExperimentRecord> parse_results_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    if (!std::getline(in, line)) throw ParseError("results csv line 1: missing header");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kResultsHeader) {
        throw ParseError("results csv line 1: unexpected header '" + line + "'");
    }
    std::vector<ExperimentRecord> out;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) f.push_back(cell);
        if (f.size() != 9) {
            throw ParseError("results csv line " + std::to_string(line_no) + ": expected 9 columns, got " +
                             std::to_string(f.size()));
        }
        ExperimentRecord r;
        r.image_id = static_cast<int>(parse_number(f[0], line_no, "image_id"));
        r.eta = parse_number(f[1], line_no, "eta");
        r.sigma = parse_number(f[2], line_no, "sigma");
        r.repeat = static_cast<int>(parse_number(f[3], line_no, "repeat"));
        try {
            r.method = method_from_string(f[4]);
        } catch (const InvalidArgument&) {
            throw ParseError("results csv line " + std::to_string(line_no) + ": unknown method '" + f[4] + "'");
        }
        r.psnr = parse_number(f[5], line_no, "psnr");
        r.wall_ms = parse_number(f[6], line_no, "wall_ms");
        try {
            std::size_t used = 0;
            r.seed = std::stoull(f[7], &used);
            if (used != f[7].size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ParseError("results csv line " + std::to_string(line_no) + ": column 'seed' is not an integer");
        }
        if (f[8] != "0" && f[8] != "1") {
            throw ParseError("results csv line " + std::to_string(line_no) + ": column 'converged' must be 0 or 1");
        }
        r.converged = f[8] == "1";
        out.push_back(r);
    }
    return out;
}

namespace {

struct MethodOutcome {
    Vector x;
    bool converged = true;
};

json config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["dataset"] = {{"kind", cfg.dataset == ExperimentConfig::Dataset::idx ? "idx" : "synthetic"},
                    {"images", cfg.idx_images.string()},
                    {"labels", cfg.idx_labels.string()}};
    j["generator"] = cfg.generator.string();
    j["output_dir"] = cfg.output_dir.string();
    j["image_count"] = cfg.image_count;
    j["eta_list"] = cfg.eta_list;
    j["sigma_exponents"] = cfg.sigma_exponents;
    j["repeats"] = cfg.repeats;
    std::vector<std::string> methods;
    for (Method m : cfg.methods) methods.push_back(to_string(m));
    j["methods"] = methods;
    j["base_seed"] = cfg.base_seed;
    j["blur_radius"] = cfg.blur_radius;
    j["record_wall_time"] = cfg.record_wall_time;
    j["synthetic"] = {{"height", cfg.synthetic.height},         {"width", cfg.synthetic.width},
                      {"latent_dim", cfg.synthetic.latent_dim}, {"hidden", cfg.synthetic.hidden},
                      {"gamma_std", cfg.synthetic.gamma_std},   {"eps_gamma", cfg.synthetic.eps_gamma},
                      {"with_encoder", cfg.synthetic.with_encoder}, {"seed", cfg.synthetic.seed},
                      {"offset_std", cfg.synthetic_offset_std}};
    j["lambda_grid"] = {{"min", cfg.lambda_min}, {"max", cfg.lambda_max}, {"count", cfg.lambda_count}};
    j["guide"] = {{"cross", cfg.guide.cross}, {"noiseless", cfg.guide.noiseless}};
    j["latent"] = {{"search_restarts", cfg.guide.latent.search_restarts},
                   {"max_iter", cfg.guide.latent.bfgs.max_iter},
                   {"grad_tol", cfg.guide.latent.bfgs.grad_tol}};
    j["expansion"] = {{"max_iter", cfg.guide.expansion.max_iter},
                      {"tol", cfg.guide.expansion.tol},
                      {"search_restarts", cfg.guide.expansion.search.restarts}};
    return j;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, const GeneratorNet& net,
                                const std::vector<Vector>& images, int height, int width) {
    cfg.validate();
    if (static_cast<Eigen::Index>(height) * width != net.output_dim()) {
        throw InvalidArgument("run_experiment: image size does not match the generator output");
    }
    const std::vector<double> grid = log_grid(cfg.lambda_min, cfg.lambda_max, cfg.lambda_count);

    ExperimentResult result;
    json seeds = json::array();
    for (double eta : cfg.eta_list) {
        const BlurOperator blur = build_blur(eta, height, width, cfg.blur_radius);
        for (int s : cfg.sigma_exponents) {
            const double sigma = std::pow(10.0, -s);
            const LinearModel model(blur.matrix, sigma * sigma);
            const LatentPosterior lp(model, net);
            for (std::size_t img = 0; img < images.size(); ++img) {
                const Vector& x = images[img];
                for (int rep = 0; rep < cfg.repeats; ++rep) {
                    const int image_id = static_cast<int>(img);
                    const std::uint64_t seed = cell_seed(cfg.base_seed, image_id, eta, s, rep);
                    seeds.push_back({image_id, eta, s, rep, seed});
                    Vector y;
                    try {
                        y = observe(model, x, seed);
                    } catch (const std::exception& e) {
                        for (Method method : cfg.methods) {
                            result.failures.push_back({image_id, eta, sigma, rep, method, e.what()});
                        }
                        continue;
                    }

                    std::optional<MethodOutcome> laplace;
                    std::optional<MethodOutcome> latent;
                    const auto run_laplace = [&] {
                        if (!laplace) {
                            laplace = MethodOutcome{laplace_estimate(model, y, net, cfg.guide.expansion).posterior.mean, true};
                        }
                        return *laplace;
                    };
                    const auto run_latent = [&] {
                        if (!latent) {
                            const LatentEstimate est = latent_estimate(lp, y, cfg.guide.latent);
                            latent = MethodOutcome{est.x, est.map.status != BfgsStatus::max_iterations};
                        }
                        return *latent;
                    };

                    for (Method method : cfg.methods) {
                        const auto t0 = std::chrono::steady_clock::now();
                        try {
                            MethodOutcome out;
                            switch (method) {
                                case Method::l2: out = {l2_oracle(model.A(), y, x, grid).x, true}; break;
                                case Method::laplace: out = run_laplace(); break;
                                case Method::latent: out = run_latent(); break;
                                case Method::guide: {
                                    const MethodOutcome lap = run_laplace();
                                    const MethodOutcome lat = run_latent();
                                    const GuideVerdict v = guide_from_estimates(
                                        model, net, lap.x, lat.x, cfg.guide, hash_words({seed, 0x6D1DEULL}));
                                    out = v.chosen == Method::latent ? lat : lap;
                                    break;
                                }
                            }
                            const auto t1 = std::chrono::steady_clock::now();
                            ExperimentRecord rec;
                            rec.image_id = image_id;
                            rec.eta = eta;
                            rec.sigma = sigma;
                            rec.repeat = rep;
                            rec.method = method;
                            rec.psnr = psnr(x, out.x);
                            rec.wall_ms = cfg.record_wall_time
                                              ? std::chrono::duration<double, std::milli>(t1 - t0).count()
                                              : 0.0;
                            rec.seed = seed;
                            rec.converged = out.converged && out.x.allFinite();
                            result.records.push_back(rec);
                        } catch (const std::exception& e) {
                            result.failures.push_back({image_id, eta, sigma, rep, method, e.what()});
                        }
                    }
                }
            }
        }
    }

    std::filesystem::create_directories(cfg.output_dir);
    result.csv_path = cfg.output_dir / "results.csv";
    result.manifest_path = cfg.output_dir / "manifest.json";
    {
        std::ofstream out(result.csv_path, std::ios::binary);
        if (!out) throw InvalidArgument("run_experiment: cannot write '" + result.csv_path.string() + "'");
        out << format_results_csv(result.records);
    }
    json manifest;
    manifest["code_version"] = GENPRIOR_VERSION_STRING;
    manifest["config"] = config_to_json(cfg);
    manifest["record_count"] = result.records.size();
    manifest["expected_record_count"] = images.size() * cfg.eta_list.size() * cfg.sigma_exponents.size() *
                                        static_cast<std::size_t>(cfg.repeats) * cfg.methods.size();
    json failures = json::array();
    for (const auto& f : result.failures) {
        failures.push_back({{"image_id", f.image_id},
                            {"eta", f.eta},
                            {"sigma", f.sigma},
                            {"repeat", f.repeat},
                            {"method", to_string(f.method)},
                            {"message", f.message}});
    }
    manifest["failures"] = failures;
    manifest["cell_seeds"] = seeds;
    {
        std::ofstream out(result.manifest_path, std::ios::binary);
        out << manifest.dump(2) << '\n';
    }
    return result;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.dataset == ExperimentConfig::Dataset::idx) {
        const GeneratorNet net = load_weights(cfg.generator);
        const ImageSet set = load_idx_images(cfg.idx_images, cfg.idx_labels, cfg.image_count);
        std::vector<Vector> images;
        for (const auto& li : set.images) images.push_back(li.pixels);
        return run_experiment(cfg, net, images, set.rows, set.cols);
    }
    const GeneratorNet net = cfg.generator.empty() ? make_synthetic_generator(cfg.synthetic)
                                                   : load_weights(cfg.generator);
    const int height = cfg.synthetic.height;
    const int width = cfg.synthetic.width;
    std::vector<Vector> images;
    for (int i = 0; i < cfg.image_count; ++i) {
        images.push_back(
            make_synthetic_truth(net, cfg.synthetic_offset_std,
                                 hash_words({cfg.base_seed, 0x7275746873ULL, static_cast<std::uint64_t>(i)}))
                .x);
    }
    return run_experiment(cfg, net, images, height, width);
}

}  // namespace genprior
