#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "genprior/errors.hpp"
#include "genprior/experiments.hpp"

namespace genprior {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 60.0;
constexpr double kRight = 130.0;
constexpr double kTop = 30.0;
constexpr double kBottom = 50.0;

const char* method_color(Method m) {
    switch (m) {
        case Method::l2: return "#1f77b4";
        case Method::latent: return "#d62728";
        case Method::laplace: return "#2ca02c";
        case Method::guide: return "#9467bd";
    }
    return "#000000";
}

std::string fmt(double v, int digits = 4) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
    return buf;
}

std::string eta_tag(double eta) {
    std::string s = fmt(eta, 6);
    std::replace(s.begin(), s.end(), '.', 'p');
    return s;
}

struct Axis {
    double lo = 0.0;
    double hi = 1.0;
};

Axis padded(double lo, double hi) {
    if (!std::isfinite(lo) || !std::isfinite(hi)) return {0.0, 1.0};
    if (hi - lo < 1e-9) {
        lo -= 1.0;
        hi += 1.0;
    }
    const double pad = 0.05 * (hi - lo);
    return {lo - pad, hi + pad};
}

double map_to(double v, const Axis& a, double p0, double p1) {
    return p0 + (v - a.lo) / (a.hi - a.lo) * (p1 - p0);
}

// Infinite PSNR values are drawn at the top of the axis.
double finite_or(double v, double cap) { return std::isfinite(v) ? v : cap; }

void svg_open(std::ostringstream& os, const std::string& title) {
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
       << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << kWidth / 2 << "\" y=\"18\" text-anchor=\"middle\">" << title << "</text>\n";
}

void svg_axes(std::ostringstream& os, const Axis& y, const std::string& xlabel) {
    const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
    os << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\"" << y0
       << "\" stroke=\"black\"/>\n"
       << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 << "\" y2=\"" << y1
       << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double v = y.lo + (y.hi - y.lo) * k / 4.0;
        const double py = map_to(v, y, y0, y1);
        os << "<text x=\"" << x0 - 6 << "\" y=\"" << py + 4 << "\" text-anchor=\"end\">" << fmt(v, 3)
           << "</text>\n";
    }
    os << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">" << xlabel
       << "</text>\n"
       << "<text x=\"16\" y=\"" << (y0 + y1) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
       << (y0 + y1) / 2 << ")\">PSNR [dB]</text>\n";
}

void svg_legend(std::ostringstream& os, const std::vector<Method>& methods) {
    double y = kTop + 10;
    const double x = kWidth - kRight + 15;
    for (Method m : methods) {
        os << "<g class=\"legend\"><rect x=\"" << x << "\" y=\"" << y - 9 << "\" width=\"12\" height=\"12\" fill=\""
           << method_color(m) << "\"/><text x=\"" << x + 18 << "\" y=\"" << y + 1 << "\">" << to_string(m)
           << "</text></g>\n";
        y += 20;
    }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgument("report: cannot write '" + path.string() + "'");
    out << text;
}

}  // namespace

double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw InvalidArgument("quantile_sorted: empty input");
    if (!(q >= 0.0 && q <= 1.0)) throw InvalidArgument("quantile_sorted: q outside [0, 1]");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = h - static_cast<double>(lo);
    if (frac == 0.0) return sorted[lo];
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

std::vector<CellSummary> summarize(const std::vector<ExperimentRecord>& records) {
    std::map<std::tuple<double, double, int>, std::vector<double>> groups;
    for (const auto& r : records) {
        groups[{r.eta, r.sigma, static_cast<int>(r.method)}].push_back(r.psnr);
    }
    std::vector<CellSummary> out;
    for (auto& [key, values] : groups) {
        std::sort(values.begin(), values.end());
        CellSummary c;
        c.eta = std::get<0>(key);
        c.sigma = std::get<1>(key);
        c.method = static_cast<Method>(std::get<2>(key));
        c.count = static_cast<int>(values.size());
        double sum = 0.0;
        for (double v : values) sum += v;
        c.mean = sum / c.count;
        double ss = 0.0;
        if (std::isfinite(c.mean)) {
            for (double v : values) ss += (v - c.mean) * (v - c.mean);
        }
        c.stddev = c.count > 1 && std::isfinite(c.mean) ? std::sqrt(ss / (c.count - 1)) : 0.0;
        c.q1 = quantile_sorted(values, 0.25);
        c.median = quantile_sorted(values, 0.5);
        c.q3 = quantile_sorted(values, 0.75);
        c.min = values.front();
        c.max = values.back();
        out.push_back(c);
    }
    return out;
}

ReportFiles report(const std::filesystem::path& results_csv, const std::filesystem::path& out_dir) {
    std::ifstream in(results_csv, std::ios::binary);
    if (!in) throw ParseError("report: cannot open '" + results_csv.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return report(parse_results_csv(ss.str()), out_dir);
}

ReportFiles report(const std::vector<ExperimentRecord>& records, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    const std::vector<CellSummary> cells = summarize(records);
    ReportFiles files;

    std::set<double> etas;
    for (const auto& c : cells) etas.insert(c.eta);

    for (double eta : etas) {
        std::vector<CellSummary> sub;
        std::set<int> method_ids;
        std::set<double> sigmas;
        for (const auto& c : cells) {
            if (c.eta != eta) continue;
            sub.push_back(c);
            method_ids.insert(static_cast<int>(c.method));
            sigmas.insert(c.sigma);
        }
        std::vector<Method> methods;
        for (int id : method_ids) methods.push_back(static_cast<Method>(id));

        double vmin = std::numeric_limits<double>::infinity();
        double vmax = -vmin;
        for (const auto& c : sub) {
            for (double v : {c.mean, c.min, c.max}) {
                if (std::isfinite(v)) {
                    vmin = std::min(vmin, v);
                    vmax = std::max(vmax, v);
                }
            }
        }
        const Axis ya = padded(vmin, vmax);
        const double px0 = kLeft + 20, px1 = kWidth - kRight - 20;
        const double py0 = kHeight - kBottom, py1 = kTop;

        // Line chart of the mean over −log₁₀σ.
        double smin = std::numeric_limits<double>::infinity(), smax = -smin;
        for (double s : sigmas) {
            smin = std::min(smin, -std::log10(s));
            smax = std::max(smax, -std::log10(s));
        }
        const Axis xa = padded(smin, smax);
        std::ostringstream chart;
        svg_open(chart, "mean PSNR, eta = " + fmt(eta));
        svg_axes(chart, ya, "-log10(sigma)");
        for (double s : sigmas) {
            const double px = map_to(-std::log10(s), xa, px0, px1);
            chart << "<text x=\"" << px << "\" y=\"" << py0 + 16 << "\" text-anchor=\"middle\">"
                  << fmt(-std::log10(s), 3) << "</text>\n";
        }
        for (Method m : methods) {
            std::ostringstream pts;
            std::ostringstream dots;
            for (const auto& c : sub) {
                if (c.method != m) continue;
                const double px = map_to(-std::log10(c.sigma), xa, px0, px1);
                const double py = map_to(finite_or(c.mean, ya.hi), ya, py0, py1);
                pts << px << ',' << py << ' ';
                dots << "<circle cx=\"" << px << "\" cy=\"" << py << "\" r=\"3\" fill=\"" << method_color(m)
                     << "\"/>\n";
            }
            chart << "<polyline class=\"series\" data-method=\"" << to_string(m) << "\" fill=\"none\" stroke=\""
                  << method_color(m) << "\" stroke-width=\"2\" points=\"" << pts.str() << "\"/>\n"
                  << dots.str();
        }
        svg_legend(chart, methods);
        chart << "</svg>\n";
        const auto chart_path = out_dir / ("psnr_eta" + eta_tag(eta) + ".svg");
        write_text(chart_path, chart.str());
        files.charts.push_back(chart_path);

        // Box plots, one group per σ, one box per method inside the group.
        std::ostringstream box;
        svg_open(box, "PSNR distribution, eta = " + fmt(eta));
        svg_axes(box, ya, "sigma");
        const double group_w = (kWidth - kLeft - kRight) / static_cast<double>(sigmas.size());
        const double box_w = std::min(24.0, 0.8 * group_w / static_cast<double>(methods.size()));
        int gi = 0;
        for (auto it = sigmas.rbegin(); it != sigmas.rend(); ++it, ++gi) {
            const double gx = kLeft + group_w * (gi + 0.5);
            box << "<text x=\"" << gx << "\" y=\"" << py0 + 16 << "\" text-anchor=\"middle\">" << fmt(*it, 3)
                << "</text>\n";
            for (std::size_t mi = 0; mi < methods.size(); ++mi) {
                const auto c = std::find_if(sub.begin(), sub.end(), [&](const CellSummary& s) {
                    return s.sigma == *it && s.method == methods[mi];
                });
                if (c == sub.end()) continue;
                const double cx = gx + (static_cast<double>(mi) - 0.5 * (methods.size() - 1.0)) * box_w * 1.2;
                const auto y = [&](double v) { return map_to(finite_or(v, ya.hi), ya, py0, py1); };
                const char* col = method_color(methods[mi]);
                box << "<g class=\"box\" data-method=\"" << to_string(methods[mi]) << "\" data-sigma=\""
                    << fmt(*it, 10) << "\" data-q1=\"" << fmt(c->q1, 10) << "\" data-median=\""
                    << fmt(c->median, 10) << "\" data-q3=\"" << fmt(c->q3, 10) << "\">"
                    << "<line x1=\"" << cx << "\" y1=\"" << y(c->min) << "\" x2=\"" << cx << "\" y2=\""
                    << y(c->max) << "\" stroke=\"" << col << "\"/>"
                    << "<rect x=\"" << cx - box_w / 2 << "\" y=\"" << y(c->q3) << "\" width=\"" << box_w
                    << "\" height=\"" << std::max(0.5, y(c->q1) - y(c->q3)) << "\" fill=\"white\" stroke=\""
                    << col << "\"/>"
                    << "<line x1=\"" << cx - box_w / 2 << "\" y1=\"" << y(c->median) << "\" x2=\""
                    << cx + box_w / 2 << "\" y2=\"" << y(c->median) << "\" stroke=\"" << col
                    << "\" stroke-width=\"2\"/></g>\n";
            }
        }
        svg_legend(box, methods);
        box << "</svg>\n";
        const auto box_path = out_dir / ("boxplot_eta" + eta_tag(eta) + ".svg");
        write_text(box_path, box.str());
        files.boxplots.push_back(box_path);
    }

    std::ostringstream summary;
    char line[160];
    std::snprintf(line, sizeof(line), "%-8s %-10s %-8s %6s %12s %10s %10s %10s %10s\n", "eta", "sigma", "method",
                  "n", "mean", "std", "q1", "median", "q3");
    summary << line;
    for (const auto& c : cells) {
        std::snprintf(line, sizeof(line), "%-8s %-10s %-8s %6d %12s %10s %10s %10s %10s\n", fmt(c.eta, 6).c_str(),
                      fmt(c.sigma, 6).c_str(), to_string(c.method).c_str(), c.count, fmt(c.mean, 6).c_str(),
                      fmt(c.stddev, 4).c_str(), fmt(c.q1, 6).c_str(), fmt(c.median, 6).c_str(),
                      fmt(c.q3, 6).c_str());
        summary << line;
    }
    files.summary = out_dir / "summary.txt";
    write_text(files.summary, summary.str());
    return files;
}

void write_pgm(const std::filesystem::path& path, const Vector& pixels, int height, int width, double lo,
               double hi) {
    if (pixels.size() != static_cast<Eigen::Index>(height) * width) {
        throw InvalidArgument("write_pgm: pixel count does not match height*width");
    }
    if (!(hi > lo)) throw InvalidArgument("write_pgm: hi must exceed lo");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgument("write_pgm: cannot write '" + path.string() + "'");
    out << "P5\n" << width << ' ' << height << "\n255\n";
    for (Eigen::Index i = 0; i < pixels.size(); ++i) {
        const double t = std::clamp((pixels[i] - lo) / (hi - lo), 0.0, 1.0);
        out.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * t))));
    }
}

Vector tile_images(const std::vector<Vector>& images, int height, int width, int columns, int& grid_height,
                   int& grid_width, double fill) {
    if (columns < 1) throw InvalidArgument("tile_images: columns must be >= 1");
    const int count = static_cast<int>(images.size());
    const int rows = std::max(1, (count + columns - 1) / columns);
    const int cols = std::min(columns, std::max(1, count));
    grid_height = rows * (height + 1) + 1;
    grid_width = cols * (width + 1) + 1;
    Vector out = Vector::Constant(static_cast<Eigen::Index>(grid_height) * grid_width, fill);
    for (int k = 0; k < count; ++k) {
        if (images[k].size() != static_cast<Eigen::Index>(height) * width) {
            throw InvalidArgument("tile_images: image " + std::to_string(k) + " has the wrong size");
        }
        const int r0 = 1 + (k / columns) * (height + 1);
        const int c0 = 1 + (k % columns) * (width + 1);
        for (int i = 0; i < height; ++i) {
            for (int j = 0; j < width; ++j) {
                out[static_cast<Eigen::Index>(r0 + i) * grid_width + c0 + j] = images[k][i * width + j];
            }
        }
    }
    return out;
}

}  // namespace genprior
