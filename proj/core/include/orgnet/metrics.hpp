#pragma once

#include <optional>
#include <span>

namespace orgnet {

enum class TaskKind { Regression, Classification };

struct Metrics {
    double mse = 0.0;
    double mae = 0.0;
    std::optional<double> accuracy;  // classification only
};

/// Row-major outputs and targets, `width` values per item. Accuracy compares
/// argmax positions; ties resolve to the lowest index.
Metrics metrics(std::span<const double> outputs, std::span<const double> targets, std::size_t width,
                TaskKind task);

std::size_t argmax(std::span<const double> values);

}  // namespace orgnet
