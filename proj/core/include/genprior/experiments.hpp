#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "genprior/baselines.hpp"
#include "genprior/generator.hpp"
#include "genprior/linalg.hpp"

namespace genprior {

// ---------------------------------------------------------------- datasets

struct LabeledImage {
    Vector pixels;  ///< row-major, scaled to [0,1] when normalized
    int label = -1;
};

struct ImageSet {
    int rows = 0;
    int cols = 0;
    std::vector<LabeledImage> images;
};

/// Reads big-endian IDX files (images magic 0x00000803, labels 0x00000801).
/// Returns the first `limit` images (all when limit < 0). `labels_path` may be
/// empty, in which case labels are −1. Errors carry the byte offset.
ImageSet load_idx_images(const std::filesystem::path& images_path,
                         const std::filesystem::path& labels_path, long limit, bool normalize = true);

// ---------------------------------------------------------------- synthetic suite

/// Desk-scale generator: g(z) = b₂ + W₂ tanh(W₁ z + b₁) on a height×width
/// image, where the columns of W₂ are Gaussian blobs so that draws look like
/// smooth images. Γ(z) is diagonal with a weakly z-dependent variance near
/// gamma_std².
struct SyntheticSpec {
    int height = 8;
    int width = 8;
    int latent_dim = 4;
    int hidden = 16;
    double gamma_std = 0.003;
    double eps_gamma = 1e-6;
    bool with_encoder = false;
    std::uint64_t seed = 20240601;
};

GeneratorNet make_synthetic_generator(const SyntheticSpec& spec);

struct SyntheticTruth {
    Vector x;
    Vector z;  ///< latent point the truth was generated from
};

/// x = g(z†) + offset_std · ε with z†, ε standard normal from CounterRng(seed).
/// offset_std = 0 gives on-manifold truths.
SyntheticTruth make_synthetic_truth(const GeneratorNet& net, double offset_std, std::uint64_t seed);

// ---------------------------------------------------------------- experiments

struct ExperimentConfig {
    enum class Dataset { idx, synthetic };

    Dataset dataset = Dataset::synthetic;
    std::filesystem::path idx_images;
    std::filesystem::path idx_labels;
    std::filesystem::path generator;  ///< weights file; optional in synthetic mode
    std::filesystem::path output_dir = "results";

    int image_count = 100;
    std::vector<double> eta_list{2.0, 3.0, 4.0, 5.0};
    std::vector<int> sigma_exponents{1, 2, 3, 4};
    int repeats = 1;
    std::vector<Method> methods{Method::l2, Method::latent, Method::laplace, Method::guide};
    std::uint64_t base_seed = 1;
    int blur_radius = 4;

    SyntheticSpec synthetic{};
    double synthetic_offset_std = 0.02;

    double lambda_min = 1e-8;
    double lambda_max = 1e2;
    int lambda_count = 61;

    GuideOptions guide{};
    /// wall_ms is written as 0 unless enabled, so reruns are byte-identical.
    bool record_wall_time = false;

    /// Throws InvalidArgument when the config violates its invariants.
    void validate() const;
};

/// Parses the JSON config document; every key is optional and defaults to the
/// values above.
ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct ExperimentRecord {
    int image_id = 0;
    double eta = 0.0;
    double sigma = 0.0;
    int repeat = 0;
    Method method = Method::l2;
    double psnr = 0.0;
    double wall_ms = 0.0;
    std::uint64_t seed = 0;
    bool converged = true;
};

struct CellFailure {
    int image_id = 0;
    double eta = 0.0;
    double sigma = 0.0;
    int repeat = 0;
    Method method = Method::l2;
    std::string message;
};

struct ExperimentResult {
    std::vector<ExperimentRecord> records;
    std::vector<CellFailure> failures;
    std::filesystem::path csv_path;
    std::filesystem::path manifest_path;
};

/// Seed of one (image, η, s, repeat) cell.
std::uint64_t cell_seed(std::uint64_t base, int image_id, double eta, int sigma_exponent, int repeat);

/// Runs every (image, η, σ, repeat, method) cell and writes `results.csv` and
/// `manifest.json` into cfg.output_dir. Per-cell exceptions are collected as
/// failures; the sweep continues.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Same sweep with an explicit generator and image list (no files read).
ExperimentResult run_experiment(const ExperimentConfig& cfg, const GeneratorNet& net,
                                const std::vector<Vector>& images, int height, int width);

inline constexpr const char* kResultsHeader =
    "image_id,eta,sigma,repeat,method,psnr,wall_ms,seed,converged";

std::string format_results_csv(std::vector<ExperimentRecord> records);
/// Throws ParseError with the 1-based line number on malformed input.
std::vector<ExperimentRecord> parse_results_csv(const std::string& text);

// ---------------------------------------------------------------- report

/// Quantile with linear interpolation between order statistics:
/// position h = (n − 1) q, value s[⌊h⌋] + (h − ⌊h⌋)(s[⌊h⌋+1] − s[⌊h⌋]).
double quantile_sorted(const std::vector<double>& sorted, double q);

struct CellSummary {
    double eta = 0.0;
    double sigma = 0.0;
    Method method = Method::l2;
    int count = 0;
    double mean = 0.0;
    double stddev = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double min = 0.0;
    double max = 0.0;
};

/// Per (η, σ, method) statistics in sorted key order.
std::vector<CellSummary> summarize(const std::vector<ExperimentRecord>& records);

struct ReportFiles {
    std::vector<std::filesystem::path> charts;
    std::vector<std::filesystem::path> boxplots;
    std::filesystem::path summary;
};

/// Writes psnr_eta<η>.svg (mean PSNR against −log₁₀σ, one line per method),
/// boxplot_eta<η>.svg (PSNR distribution per σ and method) and summary.txt.
ReportFiles report(const std::filesystem::path& results_csv, const std::filesystem::path& out_dir);
ReportFiles report(const std::vector<ExperimentRecord>& records, const std::filesystem::path& out_dir);

/// Binary PGM of a row-major image, values clamped to [lo, hi] and mapped to 0..255.
void write_pgm(const std::filesystem::path& path, const Vector& pixels, int height, int width,
               double lo = 0.0, double hi = 1.0);

/// Tiles equally sized images into a grid, `columns` per row, 1 px border of `fill`.
Vector tile_images(const std::vector<Vector>& images, int height, int width, int columns,
                   int& grid_height, int& grid_width, double fill = 1.0);

}  // namespace genprior
