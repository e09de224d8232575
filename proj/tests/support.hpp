#pragma once

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "orgnet/data.hpp"
#include "orgnet/net.hpp"
#include "orgnet/organism.hpp"
#include "orgnet/particle.hpp"
#include "orgnet/rng.hpp"

namespace testing {

using namespace orgnet;

inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

/// Random dense architecture with 2..max_layers cell layers of width 1..max_width
/// and at most max_weights weights.
inline NetworkArchitecture random_arch(Rng& rng, std::size_t max_layers, std::size_t max_width,
                                       std::size_t max_weights, Activation act) {
    for (;;) {
        const std::size_t depth = pick(rng, 2, max_layers);
        std::vector<std::size_t> sizes(depth);
        for (auto& s : sizes) s = pick(rng, 1, max_width);
        NetworkArchitecture a(sizes, act);
        if (a.weight_count() <= max_weights) return a;
    }
}

inline Network random_net(const NetworkArchitecture& arch, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Network n(arch);
    for (auto& w : n.weights) w = uniform(rng, lo, hi);
    return n;
}

inline LabeledDataset random_dataset(std::size_t n, std::size_t in, std::size_t out, Rng& rng,
                                     bool one_hot = false) {
    LabeledDataset ds(in, out, Split::Train);
    std::vector<double> x(in);
    std::vector<double> y(out);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto& v : x) v = uniform(rng, -1.0, 1.0);
        if (one_hot) {
            std::fill(y.begin(), y.end(), 0.0);
            y[pick(rng, 0, out - 1)] = 1.0;
        } else {
            for (auto& v : y) v = uniform(rng, -1.0, 1.0);
        }
        ds.push_back(x, y);
    }
    return ds;
}

/// Central differences of f over the entries of w.
template <typename F>
std::vector<double> central_differences(std::vector<double> w, F&& f, double h = 1e-6) {
    std::vector<double> g(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double orig = w[i];
        w[i] = orig + h;
        const double up = f(w);
        w[i] = orig - h;
        const double down = f(w);
        w[i] = orig;
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

/// max |a - b| / max |b|, with the denominator floored at `floor`.
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b, double floor = 1e-8) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num = std::max(num, std::abs(a[i] - b[i]));
        den = std::max(den, std::abs(b[i]));
    }
    return num / std::max(den, floor);
}

/// [5,3,3,1] particle whose only nonzero path runs from input `input` through
/// hidden cell 0 of both hidden layers; the path product is `product`.
inline ParticleNetwork path_particle(std::size_t input, double product) {
    const auto arch = default_particle_arch();
    Network n(arch);
    n.weights[arch.flat_index({0, 0, input})] = product;
    n.weights[arch.flat_index({1, 0, 0})] = 1.0;
    n.weights[arch.flat_index({2, 0, 0})] = 1.0;
    return ParticleNetwork(std::move(n));
}

/// Replicates weights exactly (input-0 path product 1) and extracts `c`
/// (input-4 path product c through hidden cell 1).
inline ParticleNetwork identity_extracting(double c) {
    const auto arch = default_particle_arch();
    Network n(arch);
    n.weights[arch.flat_index({0, 0, 0})] = 1.0;
    n.weights[arch.flat_index({1, 0, 0})] = 1.0;
    n.weights[arch.flat_index({2, 0, 0})] = 1.0;
    n.weights[arch.flat_index({0, 1, 4})] = c;
    n.weights[arch.flat_index({1, 1, 1})] = 1.0;
    n.weights[arch.flat_index({2, 0, 1})] = 1.0;
    return ParticleNetwork(std::move(n));
}

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

/// IDX image file bytes; pixel k holds k mod 256.
inline std::vector<std::uint8_t> idx_images(std::uint32_t count, std::uint32_t rows, std::uint32_t cols,
                                            std::uint32_t magic = 0x00000803) {
    std::vector<std::uint8_t> out;
    put_u32(out, magic);
    put_u32(out, count);
    put_u32(out, rows);
    put_u32(out, cols);
    for (std::uint32_t i = 0; i < count * rows * cols; ++i) out.push_back(static_cast<std::uint8_t>(i % 256));
    return out;
}

inline std::vector<std::uint8_t> idx_labels(const std::vector<std::uint8_t>& labels,
                                            std::uint32_t magic = 0x00000801) {
    std::vector<std::uint8_t> out;
    put_u32(out, magic);
    put_u32(out, static_cast<std::uint32_t>(labels.size()));
    out.insert(out.end(), labels.begin(), labels.end());
    return out;
}

inline void write_bytes(const std::filesystem::path& p, const std::vector<std::uint8_t>& bytes) {
    std::ofstream f(p, std::ios::binary);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline void write_gz(const std::filesystem::path& p, const std::vector<std::uint8_t>& bytes) {
    gzFile f = gzopen(p.string().c_str(), "wb");
    if (f == nullptr) throw std::runtime_error("gzopen failed: " + p.string());
    gzwrite(f, bytes.data(), static_cast<unsigned>(bytes.size()));
    gzclose(f);
}

/// Gzipped 28x28 MNIST-style files where digit d lights up a 6x6 block at a
/// position that depends on d.
inline void write_synthetic_mnist(const std::filesystem::path& dir, std::size_t n_train, std::size_t n_test,
                                  std::uint64_t seed) {
    std::filesystem::create_directories(dir);
    Rng rng(seed);
    auto make = [&](std::size_t n, const std::string& images, const std::string& labels) {
        std::vector<std::uint8_t> img;
        put_u32(img, 0x00000803);
        put_u32(img, static_cast<std::uint32_t>(n));
        put_u32(img, 28);
        put_u32(img, 28);
        std::vector<std::uint8_t> lab;
        for (std::size_t i = 0; i < n; ++i) {
            const auto d = static_cast<std::uint8_t>(pick(rng, 0, 9));
            lab.push_back(d);
            const std::size_t r0 = 2 + (d / 5) * 12;
            const std::size_t c0 = 2 + (d % 5) * 5;
            for (std::size_t r = 0; r < 28; ++r) {
                for (std::size_t c = 0; c < 28; ++c) {
                    const bool on = r >= r0 && r < r0 + 6 && c >= c0 && c < c0 + 6;
                    img.push_back(on ? 255 : static_cast<std::uint8_t>(pick(rng, 0, 20)));
                }
            }
        }
        write_gz(dir / (images + ".gz"), img);
        write_gz(dir / (labels + ".gz"), idx_labels(lab));
    };
    make(n_train, "train-images-idx3-ubyte", "train-labels-idx1-ubyte");
    make(n_test, "t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte");
}

/// Unique empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& tag) {
    static std::uint64_t counter = 0;
    std::random_device rd;
    const auto dir = std::filesystem::temp_directory_path() /
                     ("orgnet-test-" + tag + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace testing
