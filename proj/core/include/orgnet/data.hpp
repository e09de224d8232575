#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "orgnet/net.hpp"
#include "orgnet/rng.hpp"

namespace orgnet {

enum class Split : std::uint8_t { Train, Test };

/// Row-major inputs and targets of equal count. Classification targets are
/// one-hot.
class LabeledDataset {
public:
    LabeledDataset() = default;
    LabeledDataset(std::size_t input_size, std::size_t target_size, Split split);

    void push_back(std::span<const double> input, std::span<const double> target);
    void reserve(std::size_t n);

    std::size_t size() const { return input_size_ == 0 ? 0 : inputs_.size() / input_size_; }
    bool empty() const { return size() == 0; }
    std::size_t input_size() const { return input_size_; }
    std::size_t target_size() const { return target_size_; }
    Split split() const { return split_; }

    std::span<const double> input(std::size_t i) const {
        return {inputs_.data() + i * input_size_, input_size_};
    }
    std::span<double> input(std::size_t i) { return {inputs_.data() + i * input_size_, input_size_}; }
    std::span<const double> target(std::size_t i) const {
        return {targets_.data() + i * target_size_, target_size_};
    }
    Example example(std::size_t i) const { return {input(i), target(i)}; }
    std::vector<Example> examples() const;

    const std::vector<double>& raw_inputs() const { return inputs_; }
    const std::vector<double>& raw_targets() const { return targets_; }

    /// Keeps the first n items.
    void truncate(std::size_t n);

private:
    std::size_t input_size_ = 0;
    std::size_t target_size_ = 0;
    Split split_ = Split::Train;
    std::vector<double> inputs_;
    std::vector<double> targets_;
};

/// Raw contents of an IDX image file (magic 0x00000803).
struct IdxImages {
    std::size_t count = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> pixels;
};

/// Both readers accept plain or gzip-compressed files and throw FormatError
/// naming the field that is wrong. Nothing partial is returned.
IdxImages read_idx_images(const std::filesystem::path& path);
std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path);

/// Pixels scaled to [0,1], one-hot targets over 10 classes.
LabeledDataset load_mnist_idx(const std::filesystem::path& images_path,
                              const std::filesystem::path& labels_path, Split split);

/// Same as load_mnist_idx followed by downsample_15 per image, without holding
/// the full-resolution dataset in memory.
LabeledDataset load_mnist_15(const std::filesystem::path& images_path,
                             const std::filesystem::path& labels_path, Split split);

/// Area-weighted average pooling of a square image. Every output pixel is the
/// mean of the source area it covers.
std::vector<double> area_downsample(std::span<const double> image, std::size_t in_side,
                                    std::size_t out_side);

/// 28x28 -> 15x15.
std::vector<double> downsample_15(std::span<const double> image);

/// Adds independent N(0, sigma^2) to every input component. Targets untouched.
LabeledDataset add_input_noise(const LabeledDataset& ds, double sigma, Rng& rng);

/// n pairs (x1, x2) uniform in [0, 0.5] with target x1 + x2.
LabeledDataset make_addition_dataset(std::size_t n, Rng& rng, Split split = Split::Train);

/// One seeded shuffle, then contiguous chunks; the last short chunk is kept.
std::vector<std::vector<Example>> batches(const LabeledDataset& ds, std::size_t batch_size,
                                          Rng& rng);

}  // namespace orgnet
