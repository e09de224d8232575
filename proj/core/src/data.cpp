#include "orgnet/data.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <memory>
#include <numeric>
#include <string>

#include "orgnet/errors.hpp"

namespace orgnet {

LabeledDataset::LabeledDataset(std::size_t input_size, std::size_t target_size, Split split)
    : input_size_(input_size), target_size_(target_size), split_(split) {
    if (input_size == 0 || target_size == 0) throw ShapeError("dataset dimensions must be positive");
}

void LabeledDataset::push_back(std::span<const double> input, std::span<const double> target) {
    if (input.size() != input_size_ || target.size() != target_size_) {
        throw ShapeError("dataset item does not match dataset dimensions");
    }
    inputs_.insert(inputs_.end(), input.begin(), input.end());
    targets_.insert(targets_.end(), target.begin(), target.end());
}

void LabeledDataset::reserve(std::size_t n) {
    inputs_.reserve(n * input_size_);
    targets_.reserve(n * target_size_);
}

std::vector<Example> LabeledDataset::examples() const {
    std::vector<Example> out;
    out.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) out.push_back(example(i));
    return out;
}

void LabeledDataset::truncate(std::size_t n) {
    if (n >= size()) return;
    inputs_.resize(n * input_size_);
    targets_.resize(n * target_size_);
}

namespace {

struct GzCloser {
    void operator()(gzFile_s* f) const { gzclose(f); }
};
using GzHandle = std::unique_ptr<gzFile_s, GzCloser>;

// gzread reads uncompressed files transparently.
class IdxReader {
public:
    explicit IdxReader(const std::filesystem::path& path) : path_(path.string()) {
        if (!std::filesystem::exists(path)) throw FormatError(path_ + ": file not found");
        file_.reset(gzopen(path_.c_str(), "rb"));
        if (!file_) throw FormatError(path_ + ": cannot open");
    }

    std::uint32_t read_u32(const char* field) {
        std::array<unsigned char, 4> b{};
        read_exact(b.data(), b.size(), field);
        return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) |
               (std::uint32_t{b[2]} << 8) | std::uint32_t{b[3]};
    }

    void read_exact(unsigned char* dst, std::size_t n, const char* field) {
        std::size_t done = 0;
        while (done < n) {
            const auto chunk = static_cast<unsigned>(std::min<std::size_t>(n - done, 1u << 30));
            const int got = gzread(file_.get(), dst + done, chunk);
            if (got < 0) throw FormatError(path_ + ": read error in " + field);
            if (got == 0) {
                throw FormatError(path_ + ": truncated " + field + " (expected " +
                                  std::to_string(n) + " bytes, got " + std::to_string(done) + ")");
            }
            done += static_cast<std::size_t>(got);
        }
    }

    bool at_end() {
        unsigned char probe = 0;
        return gzread(file_.get(), &probe, 1) == 0;
    }

    const std::string& path() const { return path_; }

private:
    std::string path_;
    GzHandle file_;
};

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;
constexpr std::size_t kMnistClasses = 10;

std::array<double, kMnistClasses> one_hot(std::uint8_t label) {
    std::array<double, kMnistClasses> t{};
    t[label] = 1.0;
    return t;
}

template <typename PerImage>
LabeledDataset build_mnist(const IdxImages& images, const std::filesystem::path& labels_path,
                           Split split, std::size_t out_size, PerImage&& per_image) {
    const auto labels = read_idx_labels(labels_path);
    if (labels.size() != images.count) {
        throw FormatError(labels_path.string() + ": item count " + std::to_string(labels.size()) +
                          " does not match image count " + std::to_string(images.count));
    }
    const std::size_t pixels = images.rows * images.cols;
    LabeledDataset ds(out_size, kMnistClasses, split);
    ds.reserve(images.count);
    std::vector<double> scaled(pixels);
    for (std::size_t i = 0; i < images.count; ++i) {
        const std::uint8_t* src = images.pixels.data() + i * pixels;
        for (std::size_t p = 0; p < pixels; ++p) scaled[p] = static_cast<double>(src[p]) / 255.0;
        const auto target = one_hot(labels[i]);
        ds.push_back(per_image(scaled, images.rows), target);
    }
    return ds;
}

}  // namespace

IdxImages read_idx_images(const std::filesystem::path& path) {
    IdxReader in(path);
    const auto magic = in.read_u32("magic number");
    if (magic != kImageMagic) {
        throw FormatError(in.path() + ": bad magic number " + std::to_string(magic) +
                          " (expected 2051 for images)");
    }
    IdxImages out;
    out.count = in.read_u32("image count");
    out.rows = in.read_u32("row count");
    out.cols = in.read_u32("column count");
    if (out.rows == 0 || out.cols == 0) throw FormatError(in.path() + ": zero image dimension");
    if (out.count * out.rows * out.cols > (std::size_t{1} << 32)) {
        throw FormatError(in.path() + ": implausible image count " + std::to_string(out.count));
    }
    out.pixels.resize(out.count * out.rows * out.cols);
    in.read_exact(out.pixels.data(), out.pixels.size(), "pixel data");
    if (!in.at_end()) throw FormatError(in.path() + ": trailing bytes after pixel data");
    return out;
}

std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path) {
    IdxReader in(path);
    const auto magic = in.read_u32("magic number");
    if (magic != kLabelMagic) {
        throw FormatError(in.path() + ": bad magic number " + std::to_string(magic) +
                          " (expected 2049 for labels)");
    }
    const std::size_t count = in.read_u32("label count");
    std::vector<std::uint8_t> labels(count);
    in.read_exact(labels.data(), count, "label data");
    if (!in.at_end()) throw FormatError(in.path() + ": trailing bytes after label data");
    for (auto l : labels) {
        if (l >= kMnistClasses) throw FormatError(in.path() + ": label value out of range");
    }
    return labels;
}

LabeledDataset load_mnist_idx(const std::filesystem::path& images_path,
                              const std::filesystem::path& labels_path, Split split) {
    const auto images = read_idx_images(images_path);
    return build_mnist(images, labels_path, split, images.rows * images.cols,
                       [](const std::vector<double>& img, std::size_t) -> std::span<const double> {
                           return img;
                       });
}

LabeledDataset load_mnist_15(const std::filesystem::path& images_path,
                             const std::filesystem::path& labels_path, Split split) {
    const auto images = read_idx_images(images_path);
    if (images.rows != 28 || images.cols != 28) {
        throw FormatError(images_path.string() + ": expected 28x28 images");
    }
    std::vector<double> small;
    return build_mnist(images, labels_path, split, 15 * 15,
                       [&](const std::vector<double>& img, std::size_t side) -> std::span<const double> {
                           small = area_downsample(img, side, 15);
                           return small;
                       });
}

std::vector<double> area_downsample(std::span<const double> image, std::size_t in_side,
                                    std::size_t out_side) {
    if (in_side == 0 || out_side == 0 || image.size() != in_side * in_side) {
        throw ShapeError("area_downsample: image is not " + std::to_string(in_side) + "x" +
                         std::to_string(in_side));
    }
    // weights[j][i]: share of source index i in target index j, rows sum to 1.
    const double scale = static_cast<double>(in_side) / static_cast<double>(out_side);
    std::vector<double> weights(out_side * in_side, 0.0);
    for (std::size_t j = 0; j < out_side; ++j) {
        const double lo = static_cast<double>(j) * scale;
        const double hi = static_cast<double>(j + 1) * scale;
        double sum = 0.0;
        for (std::size_t i = 0; i < in_side; ++i) {
            const double overlap = std::min(hi, static_cast<double>(i + 1)) -
                                   std::max(lo, static_cast<double>(i));
            if (overlap > 0.0) {
                weights[j * in_side + i] = overlap;
                sum += overlap;
            }
        }
        for (std::size_t i = 0; i < in_side; ++i) weights[j * in_side + i] /= sum;
    }
    // Separable: rows first, then columns.
    std::vector<double> rows(out_side * in_side, 0.0);
    for (std::size_t y = 0; y < out_side; ++y) {
        for (std::size_t i = 0; i < in_side; ++i) {
            const double w = weights[y * in_side + i];
            if (w == 0.0) continue;
            for (std::size_t x = 0; x < in_side; ++x) rows[y * in_side + x] += w * image[i * in_side + x];
        }
    }
    std::vector<double> out(out_side * out_side, 0.0);
    for (std::size_t y = 0; y < out_side; ++y) {
        for (std::size_t x = 0; x < out_side; ++x) {
            double s = 0.0;
            for (std::size_t k = 0; k < in_side; ++k) s += weights[x * in_side + k] * rows[y * in_side + k];
            out[y * out_side + x] = s;
        }
    }
    return out;
}

std::vector<double> downsample_15(std::span<const double> image) {
    if (image.size() != 28 * 28) throw ShapeError("downsample_15 expects a 28x28 image");
    return area_downsample(image, 28, 15);
}

LabeledDataset add_input_noise(const LabeledDataset& ds, double sigma, Rng& rng) {
    if (sigma < 0.0) throw std::invalid_argument("sigma must be non-negative");
    LabeledDataset out = ds;
    if (sigma == 0.0) return out;
    std::normal_distribution<double> noise(0.0, sigma);
    for (std::size_t i = 0; i < out.size(); ++i) {
        for (double& v : out.input(i)) v += noise(rng);
    }
    return out;
}

LabeledDataset make_addition_dataset(std::size_t n, Rng& rng, Split split) {
    if (n == 0) throw std::invalid_argument("addition dataset needs at least one item");
    std::uniform_real_distribution<double> dist(0.0, 0.5);
    LabeledDataset ds(2, 1, split);
    ds.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = dist(rng);
        const double b = dist(rng);
        const std::array<double, 2> x{a, b};
        const std::array<double, 1> y{a + b};
        ds.push_back(x, y);
    }
    return ds;
}

std::vector<std::vector<Example>> batches(const LabeledDataset& ds, std::size_t batch_size,
                                          Rng& rng) {
    if (batch_size == 0) throw std::invalid_argument("batch size must be at least 1");
    std::vector<std::size_t> order(ds.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::vector<Example>> out;
    out.reserve((order.size() + batch_size - 1) / batch_size);
    for (std::size_t begin = 0; begin < order.size(); begin += batch_size) {
        const std::size_t end = std::min(order.size(), begin + batch_size);
        std::vector<Example> batch;
        batch.reserve(end - begin);
        for (std::size_t k = begin; k < end; ++k) batch.push_back(ds.example(order[k]));
        out.push_back(std::move(batch));
    }
    return out;
}

}  // namespace orgnet
