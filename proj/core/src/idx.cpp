#include <cstdint>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "genprior/errors.hpp"
#include "genprior/experiments.hpp"

namespace genprior {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("idx: cannot open '" + path.string() + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<unsigned char>& buf, std::size_t offset,
                        const std::filesystem::path& path) {
    if (offset + 4 > buf.size()) {
        throw ParseError("idx: '" + path.string() + "' truncated at byte offset " + std::to_string(offset));
    }
    return (std::uint32_t{buf[offset]} << 24) | (std::uint32_t{buf[offset + 1]} << 16) |
           (std::uint32_t{buf[offset + 2]} << 8) | std::uint32_t{buf[offset + 3]};
}

void check_magic(std::uint32_t magic, std::uint32_t expected, const std::filesystem::path& path) {
    if (magic != expected) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "0x%08X, expected 0x%08X", magic, expected);
        throw ParseError("idx: '" + path.string() + "' has bad magic " + buf + " at byte offset 0");
    }
}

}  // namespace

ImageSet load_idx_images(const std::filesystem::path& images_path,
                         const std::filesystem::path& labels_path, long limit, bool normalize) {
    const std::vector<unsigned char> img = read_file(images_path);
    check_magic(read_be32(img, 0, images_path), kImagesMagic, images_path);
    const std::uint32_t count = read_be32(img, 4, images_path);
    const std::uint32_t rows = read_be32(img, 8, images_path);
    const std::uint32_t cols = read_be32(img, 12, images_path);
    constexpr std::size_t header = 16;

    std::size_t wanted = count;
    if (limit >= 0 && static_cast<std::size_t>(limit) < wanted) wanted = static_cast<std::size_t>(limit);
    const std::size_t pixels = static_cast<std::size_t>(rows) * cols;

    std::vector<unsigned char> lab;
    if (!labels_path.empty()) {
        lab = read_file(labels_path);
        check_magic(read_be32(lab, 0, labels_path), kLabelsMagic, labels_path);
        const std::uint32_t label_count = read_be32(lab, 4, labels_path);
        if (label_count < wanted) {
            throw ParseError("idx: '" + labels_path.string() + "' has " + std::to_string(label_count) +
                             " labels for " + std::to_string(wanted) + " images (byte offset 4)");
        }
    }

    ImageSet set;
    set.rows = static_cast<int>(rows);
    set.cols = static_cast<int>(cols);
    set.images.reserve(wanted);
    const double scale = normalize ? 1.0 / 255.0 : 1.0;
    for (std::size_t i = 0; i < wanted; ++i) {
        const std::size_t start = header + i * pixels;
        if (start + pixels > img.size()) {
            throw ParseError("idx: '" + images_path.string() + "' truncated at byte offset " +
                             std::to_string(img.size()) + " (image " + std::to_string(i) + ")");
        }
        LabeledImage li;
        li.pixels.resize(static_cast<Eigen::Index>(pixels));
        for (std::size_t k = 0; k < pixels; ++k) li.pixels[static_cast<Eigen::Index>(k)] = img[start + k] * scale;
        if (!lab.empty()) {
            const std::size_t at = 8 + i;
            if (at >= lab.size()) {
                throw ParseError("idx: '" + labels_path.string() + "' truncated at byte offset " +
                                 std::to_string(lab.size()));
            }
            li.label = lab[at];
        }
        set.images.push_back(std::move(li));
    }
    return set;
}

}  // namespace genprior
