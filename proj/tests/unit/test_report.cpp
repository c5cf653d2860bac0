#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <regex>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "genprior/errors.hpp"
#include "genprior/experiments.hpp"

using namespace genprior;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Linear-interpolation quantile on unsorted data: the value at 1-based rank
// 1 + (n−1)q, located with nth_element.
double quantile_oracle(std::vector<double> v, double q) {
    const double rank = (v.size() - 1) * q;
    const auto k = static_cast<std::size_t>(std::floor(rank));
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
    const double lo = v[k];
    if (k + 1 == v.size()) return lo;
    const double hi = *std::min_element(v.begin() + static_cast<std::ptrdiff_t>(k) + 1, v.end());
    return lo + (rank - static_cast<double>(k)) * (hi - lo);
}

ExperimentRecord rec(int image, double eta, double sigma, Method m, double psnr) {
    ExperimentRecord r;
    r.image_id = image;
    r.eta = eta;
    r.sigma = sigma;
    r.method = m;
    r.psnr = psnr;
    return r;
}

int count(const std::string& text, const std::string& needle) {
    int n = 0;
    for (std::size_t at = text.find(needle); at != std::string::npos; at = text.find(needle, at + 1)) ++n;
    return n;
}

}  // namespace

TEST_CASE("quantiles") {
    CHECK_THROWS_AS(quantile_sorted({}, 0.5), InvalidArgument);
    CHECK_THROWS_AS(quantile_sorted({1.0}, 1.5), InvalidArgument);
    CHECK(quantile_sorted({4.0}, 0.25) == 4.0);
    CHECK(quantile_sorted({1.0, 2.0, 3.0, 4.0}, 0.25) == doctest::Approx(1.75));
    CHECK(quantile_sorted({1.0, 2.0, 3.0, 4.0}, 1.0) == 4.0);

    CounterRng rng(3);
    for (int n : {2, 3, 7, 10, 101}) {
        std::vector<double> v(n);
        for (double& x : v) x = 20.0 + 10.0 * rng.normal();
        std::vector<double> sorted = v;
        std::sort(sorted.begin(), sorted.end());
        for (double q : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            CHECK(quantile_sorted(sorted, q) == doctest::Approx(quantile_oracle(v, q)).epsilon(1e-14));
        }
    }
}

TEST_CASE("single cell report") {
    const fixtures::TempDir dir("report");
    const std::vector<ExperimentRecord> records{rec(0, 3.0, 1e-2, Method::laplace, 27.5)};
    const ReportFiles files = report(records, dir.path());
    REQUIRE(files.charts.size() == 1);
    REQUIRE(files.boxplots.size() == 1);
    CHECK(files.charts[0].filename() == "psnr_eta3.svg");

    const std::string chart = slurp(files.charts[0]);
    CHECK(chart.find("<svg xmlns=\"http://www.w3.org/2000/svg\"") != std::string::npos);
    CHECK(chart.find("</svg>") != std::string::npos);
    CHECK(count(chart, "<polyline class=\"series\"") == 1);
    CHECK(count(chart, "<circle") == 1);
    const std::smatch m = [&] {
        std::smatch out;
        std::regex_search(chart, out, std::regex("points=\"([^\"]*)\""));
        return out;
    }();
    CHECK(count(m[1].str(), ",") == 1);

    const std::vector<CellSummary> cells = summarize(records);
    REQUIRE(cells.size() == 1);
    CHECK(cells[0].mean == 27.5);
    CHECK(cells[0].stddev == 0.0);
    CHECK(cells[0].count == 1);
    const std::string summary = slurp(files.summary);
    CHECK(summary.find("27.5") != std::string::npos);
    CHECK(summary.find("laplace") != std::string::npos);
}

TEST_CASE("box plot quartiles") {
    const fixtures::TempDir dir("report");
    CounterRng rng(8);
    std::vector<ExperimentRecord> records;
    std::vector<double> lap, lat;
    for (int i = 0; i < 37; ++i) {
        lap.push_back(30.0 + 3.0 * rng.normal());
        lat.push_back(25.0 + 5.0 * rng.normal());
        records.push_back(rec(i, 2.5, 1e-3, Method::laplace, lap.back()));
        records.push_back(rec(i, 2.5, 1e-3, Method::latent, lat.back()));
    }
    const ReportFiles files = report(records, dir.path());
    REQUIRE(files.boxplots.size() == 1);
    CHECK(files.boxplots[0].filename() == "boxplot_eta2p5.svg");
    const std::string svg = slurp(files.boxplots[0]);

    const std::regex box_re(
        "data-method=\"(\\w+)\" data-sigma=\"[^\"]*\" data-q1=\"([^\"]*)\" data-median=\"([^\"]*)\" data-q3=\"([^\"]*)\"");
    int boxes = 0;
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), box_re); it != std::sregex_iterator(); ++it) {
        const std::smatch& m = *it;
        const std::vector<double>& v = m[1] == "laplace" ? lap : lat;
        CHECK(std::stod(m[2]) == doctest::Approx(quantile_oracle(v, 0.25)).epsilon(1e-9));
        CHECK(std::stod(m[3]) == doctest::Approx(quantile_oracle(v, 0.5)).epsilon(1e-9));
        CHECK(std::stod(m[4]) == doctest::Approx(quantile_oracle(v, 0.75)).epsilon(1e-9));
        ++boxes;
    }
    CHECK(boxes == 2);
}

TEST_CASE("legend lists only the methods present") {
    const fixtures::TempDir dir("report");
    std::vector<ExperimentRecord> records;
    for (int s = 1; s <= 4; ++s) {
        records.push_back(rec(0, 2.0, std::pow(10.0, -s), Method::l2, 20.0 + s));
        records.push_back(rec(0, 2.0, std::pow(10.0, -s), Method::guide, 21.0 + s));
    }
    records.push_back(rec(0, 5.0, 0.1, Method::latent, std::numeric_limits<double>::infinity()));
    const ReportFiles files = report(records, dir.path());
    REQUIRE(files.charts.size() == 2);

    const std::string chart = slurp(files.charts[0]);
    CHECK(count(chart, "class=\"legend\"") == 2);
    CHECK(chart.find(">l2</text>") != std::string::npos);
    CHECK(chart.find(">guide</text>") != std::string::npos);
    CHECK(chart.find(">laplace</text>") == std::string::npos);
    CHECK(chart.find(">latent</text>") == std::string::npos);
    CHECK(count(chart, "<circle") == 8);

    const std::string other = slurp(files.charts[1]);
    CHECK(count(other, "class=\"legend\"") == 1);
    CHECK(other.find(">latent</text>") != std::string::npos);
    CHECK(other.find("nan") == std::string::npos);
    CHECK(other.find("inf") == std::string::npos);
}

TEST_CASE("report from a results file") {
    const fixtures::TempDir dir("report");
    const std::filesystem::path csv = dir.path() / "results.csv";
    std::ofstream(csv) << format_results_csv({rec(0, 2.0, 0.1, Method::l2, 18.0)});
    const ReportFiles files = report(csv, dir.path() / "out");
    CHECK(std::filesystem::exists(files.summary));

    std::ofstream(dir.path() / "bad.csv") << kResultsHeader << "\n0,2,0.1,0,l2,oops,0,1,1\n";
    try {
        report(dir.path() / "bad.csv", dir.path() / "out2");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    CHECK_THROWS_AS(report(dir.path() / "missing.csv", dir.path()), ParseError);
}

TEST_CASE("image output") {
    const fixtures::TempDir dir("report");
    Vector px(6);
    px << 0.0, 0.5, 1.0, -1.0, 2.0, 0.25;
    write_pgm(dir.path() / "a.pgm", px, 2, 3);
    const std::string bytes = slurp(dir.path() / "a.pgm");
    REQUIRE(bytes.size() == std::string("P5\n3 2\n255\n").size() + 6);
    CHECK(bytes.rfind("P5\n3 2\n255\n", 0) == 0);
    const auto* data = reinterpret_cast<const unsigned char*>(bytes.data() + bytes.size() - 6);
    CHECK(data[0] == 0);
    CHECK(data[1] == 128);
    CHECK(data[2] == 255);
    CHECK(data[3] == 0);
    CHECK(data[4] == 255);
    CHECK(data[5] == 64);
    CHECK_THROWS_AS(write_pgm(dir.path() / "b.pgm", px, 2, 2), InvalidArgument);

    int gh = 0, gw = 0;
    const Vector tiles = tile_images({Vector::Zero(4), Vector::Ones(4), Vector::Constant(4, 0.5)}, 2, 2, 2, gh, gw, 1.0);
    CHECK(gh == 2 * 3 + 1);
    CHECK(gw == 2 * 3 + 1);
    CHECK(tiles[0] == 1.0);
    CHECK(tiles[1 * gw + 1] == 0.0);
    CHECK(tiles[1 * gw + 4] == 1.0);
    CHECK(tiles[4 * gw + 1] == 0.5);
    CHECK(tiles[4 * gw + 4] == 1.0);
}
