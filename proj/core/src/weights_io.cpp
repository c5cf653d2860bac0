#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "genprior/errors.hpp"
#include "genprior/generator.hpp"

namespace genprior {

namespace {

using nlohmann::json;

const json& require(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) {
        throw ParseError("weights: missing field '" + where + key + "'");
    }
    return obj.at(key);
}

long long require_int(const json& obj, const std::string& key, const std::string& where) {
    const json& v = require(obj, key, where);
    if (!v.is_number_integer()) throw ParseError("weights: field '" + where + key + "' must be an integer");
    return v.get<long long>();
}

double require_number(const json& obj, const std::string& key, const std::string& where) {
    const json& v = require(obj, key, where);
    if (!v.is_number()) throw ParseError("weights: field '" + where + key + "' must be a number");
    return v.get<double>();
}

std::string require_string(const json& obj, const std::string& key, const std::string& where) {
    const json& v = require(obj, key, where);
    if (!v.is_string()) throw ParseError("weights: field '" + where + key + "' must be a string");
    return v.get<std::string>();
}

std::vector<double> require_numbers(const json& obj, const std::string& key, const std::string& where) {
    const json& v = require(obj, key, where);
    if (!v.is_array()) throw ParseError("weights: field '" + where + key + "' must be a list of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) {
            throw ParseError("weights: field '" + where + key + "[" + std::to_string(i) + "]' is not a number");
        }
        out.push_back(v[i].get<double>());
    }
    return out;
}

LayerStack parse_layers(const json& arr, Eigen::Index input_dim, const std::string& section) {
    if (!arr.is_array()) throw ParseError("weights: field '" + section + "' must be a list of layers");
    std::vector<Layer> layers;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string where = section + "[" + std::to_string(i) + "].";
        const json& entry = arr[i];
        const std::string type = require_string(entry, "type", where);
        if (type == "dense") {
            const long long rows = require_int(entry, "rows", where);
            const long long cols = require_int(entry, "cols", where);
            const std::vector<double> w = require_numbers(entry, "W", where);
            const std::vector<double> b = require_numbers(entry, "b", where);
            if (rows <= 0 || cols <= 0) {
                throw ValidationError(section + " layer " + std::to_string(i) + ": rows and cols must be positive");
            }
            if (static_cast<long long>(w.size()) != rows * cols) {
                throw ValidationError(section + " layer " + std::to_string(i) + ": W has " +
                                      std::to_string(w.size()) + " entries, expected rows*cols=" +
                                      std::to_string(rows * cols));
            }
            if (static_cast<long long>(b.size()) != rows) {
                throw ValidationError(section + " layer " + std::to_string(i) + ": b has " +
                                      std::to_string(b.size()) + " entries, expected " +
                                      std::to_string(rows));
            }
            DenseLayer dense;
            dense.W = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
                w.data(), rows, cols);
            dense.b = Eigen::Map<const Vector>(b.data(), rows);
            layers.emplace_back(std::move(dense));
        } else {
            try {
                layers.emplace_back(ActivationLayer{activation_from_string(type)});
            } catch (const ParseError&) {
                throw ParseError("weights: field '" + where + "type' has unknown layer type '" + type + "'");
            }
        }
    }
    try {
        return LayerStack(std::move(layers), input_dim);
    } catch (const ValidationError& e) {
        throw ValidationError(section + ": " + e.what());
    }
}

CovKind parse_variant(const std::string& s) {
    if (s == "isotropic") return CovKind::isotropic;
    if (s == "diagonal") return CovKind::diagonal;
    if (s == "full") return CovKind::full;
    throw ParseError("weights: field 'cov_head.variant' has unknown value '" + s + "'");
}

std::string variant_name(CovKind k) {
    switch (k) {
        case CovKind::isotropic: return "isotropic";
        case CovKind::diagonal: return "diagonal";
        case CovKind::full: return "full";
    }
    return "unknown";
}

void write_number(std::ostream& os, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << buf;
}

void write_numbers(std::ostream& os, const double* data, Eigen::Index n) {
    os << '[';
    for (Eigen::Index i = 0; i < n; ++i) {
        if (i) os << ", ";
        write_number(os, data[i]);
    }
    os << ']';
}

void write_layers(std::ostream& os, const LayerStack& stack, const std::string& indent) {
    os << "[";
    const auto& layers = stack.layers();
    for (std::size_t i = 0; i < layers.size(); ++i) {
        os << (i ? ",\n" : "\n") << indent << "  ";
        if (const auto* dense = std::get_if<DenseLayer>(&layers[i])) {
            const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w = dense->W;
            os << "{\"type\": \"dense\", \"rows\": " << w.rows() << ", \"cols\": " << w.cols() << ", \"W\": ";
            write_numbers(os, w.data(), w.size());
            os << ", \"b\": ";
            write_numbers(os, dense->b.data(), dense->b.size());
            os << "}";
        } else {
            os << "{\"type\": \"" << to_string(std::get<ActivationLayer>(layers[i]).kind) << "\"}";
        }
    }
    if (!layers.empty()) os << "\n" << indent;
    os << "]";
}

}  // namespace

GeneratorNet parse_weights(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("weights: invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("weights: top level must be an object");
    const long long version = require_int(doc, "version", "");
    if (version != kWeightsFormatVersion) {
        throw ParseError("weights: field 'version' is " + std::to_string(version) + ", expected " +
                         std::to_string(kWeightsFormatVersion));
    }
    const long long p = require_int(doc, "latent_dim", "");
    const long long d = require_int(doc, "output_dim", "");
    if (p <= 0 || d <= 0) throw ValidationError("latent_dim and output_dim must be positive");

    LayerStack mean = parse_layers(require(doc, "mean_layers", ""), p, "mean_layers");

    const json& head = require(doc, "cov_head", "");
    CovHead cov;
    cov.variant = parse_variant(require_string(head, "variant", "cov_head."));
    cov.eps_gamma = require_number(head, "eps_gamma", "cov_head.");
    cov.layers = parse_layers(require(head, "layers", "cov_head."), p, "cov_head.layers");

    std::optional<LayerStack> encoder;
    if (doc.contains("encoder") && !doc.at("encoder").is_null()) {
        encoder = parse_layers(doc.at("encoder"), d, "encoder");
    }
    return GeneratorNet(p, d, std::move(mean), std::move(cov), std::move(encoder));
}

GeneratorNet load_weights(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("weights: cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_weights(ss.str());
}

std::string serialize_weights(const GeneratorNet& net) {
    std::ostringstream os;
    os << "{\n";
    os << "  \"version\": " << kWeightsFormatVersion << ",\n";
    os << "  \"latent_dim\": " << net.latent_dim() << ",\n";
    os << "  \"output_dim\": " << net.output_dim() << ",\n";
    os << "  \"mean_layers\": ";
    write_layers(os, net.mean_layers(), "  ");
    os << ",\n  \"cov_head\": {\n";
    os << "    \"variant\": \"" << variant_name(net.cov_head().variant) << "\",\n";
    os << "    \"eps_gamma\": ";
    write_number(os, net.cov_head().eps_gamma);
    os << ",\n    \"layers\": ";
    write_layers(os, net.cov_head().layers, "    ");
    os << "\n  }";
    if (net.has_encoder()) {
        os << ",\n  \"encoder\": ";
        write_layers(os, *net.encoder_layers(), "  ");
    }
    os << "\n}\n";
    return os.str();
}

void save_weights(const GeneratorNet& net, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgument("weights: cannot write '" + path.string() + "'");
    out << serialize_weights(net);
}

}  // namespace genprior
