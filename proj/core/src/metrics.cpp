#include "orgnet/metrics.hpp"

#include <cmath>

#include "orgnet/errors.hpp"

namespace orgnet {

std::size_t argmax(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) best = i;
    }
    return best;
}

Metrics metrics(std::span<const double> outputs, std::span<const double> targets, std::size_t width,
                TaskKind task) {
    if (outputs.size() != targets.size()) throw ShapeError("metrics: outputs and targets differ in length");
    if (width == 0 || outputs.size() % width != 0) throw ShapeError("metrics: bad item width");
    Metrics m;
    if (outputs.empty()) return m;
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        const double d = outputs[i] - targets[i];
        m.mse += d * d;
        m.mae += std::abs(d);
    }
    const auto n = static_cast<double>(outputs.size());
    m.mse /= n;
    m.mae /= n;
    if (task == TaskKind::Classification) {
        const std::size_t items = outputs.size() / width;
        std::size_t hits = 0;
        for (std::size_t k = 0; k < items; ++k) {
            const auto o = outputs.subspan(k * width, width);
            const auto t = targets.subspan(k * width, width);
            if (argmax(o) == argmax(t)) ++hits;
        }
        m.accuracy = static_cast<double>(hits) / static_cast<double>(items);
    }
    return m;
}

}  // namespace orgnet
