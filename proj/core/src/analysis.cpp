#include "orgnet/analysis.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "orgnet/errors.hpp"

namespace orgnet {

PcaResult pca_project(const Matrix& rows, std::size_t k) {
    if (rows.rows < 2) throw std::invalid_argument("pca needs at least two observations");
    if (rows.data.size() != rows.rows * rows.cols) throw ShapeError("pca: matrix storage mismatch");
    if (k == 0 || k > std::min(rows.rows, rows.cols)) {
        throw std::invalid_argument("pca: k must be in [1, min(rows, cols)]");
    }
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const Eigen::Map<const RowMajor> x(rows.data.data(), static_cast<Eigen::Index>(rows.rows),
                                       static_cast<Eigen::Index>(rows.cols));
    const Eigen::RowVectorXd mean = x.colwise().mean();
    const Eigen::MatrixXd centered = x.rowwise() - mean;

    PcaResult out;
    out.mean.assign(mean.data(), mean.data() + mean.size());
    out.projected = Matrix(rows.rows, k);
    out.components = Matrix(k, rows.cols);
    out.explained.assign(k, 0.0);

    const double scale = x.cwiseAbs().maxCoeff();
    const double total = centered.squaredNorm();
    const double floor = 1e-24 * std::max(1.0, scale * scale) * static_cast<double>(rows.rows);
    if (!(total > floor)) return out;

    const Eigen::MatrixXd cov = centered.transpose() * centered;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) throw std::runtime_error("pca: eigendecomposition failed");
    const Eigen::Index d = cov.rows();
    for (std::size_t j = 0; j < k; ++j) {
        const Eigen::Index col = d - 1 - static_cast<Eigen::Index>(j);
        Eigen::VectorXd dir = eig.eigenvectors().col(col);
        Eigen::Index arg = 0;
        dir.cwiseAbs().maxCoeff(&arg);
        if (dir(arg) < 0) dir = -dir;
        for (Eigen::Index c = 0; c < d; ++c) out.components(j, static_cast<std::size_t>(c)) = dir(c);
        const Eigen::VectorXd scores = centered * dir;
        for (std::size_t r = 0; r < rows.rows; ++r) {
            out.projected(r, j) = scores(static_cast<Eigen::Index>(r));
        }
        out.explained[j] = std::max(0.0, eig.eigenvalues()(col)) / total;
    }
    return out;
}

Network l1_prune(const Network& net, double fraction) {
    if (!(fraction >= 0.0 && fraction < 1.0)) throw std::invalid_argument("l1_prune: fraction must be in [0, 1)");
    const auto n = static_cast<double>(net.weights.size());
    return l1_prune_count(net, static_cast<std::size_t>(std::floor(fraction * n)));
}

Network l1_prune_count(const Network& net, std::size_t count) {
    const std::size_t n = net.weights.size();
    if (count > n) throw std::invalid_argument("l1_prune: more weights to prune than the net has");
    Network out = net;
    if (count == 0) return out;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(net.weights[a]) < std::abs(net.weights[b]);
    });
    for (std::size_t i = 0; i < count; ++i) out.weights[order[i]] = 0.0;
    return out;
}

PositionStats sr_position_stats(const OrganismNetwork& on, FixpointMargin margin,
                                TypeThresholds thresholds) {
    const auto& na = on.network_arch();
    PositionStats s;
    if (na.input_size() != s.side * s.side) {
        throw ShapeError("sr_position_stats needs a 225-pixel input layer, got " +
                         std::to_string(na.input_size()));
    }
    s.counts.assign(s.side * s.side, 0.0);
    s.weight_sums.assign(s.side * s.side, 0.0);
    const std::size_t first = na.fan_in(0) * na.fan_out(0);
    for (std::size_t k = 0; k < first; ++k) {
        const auto& p = on.particle(k);
        if (classify(p, margin, thresholds) != ParticleType::SR) continue;
        const std::size_t pixel = na.position_of(k).edge;
        s.counts[pixel] += 1.0;
        s.weight_sums[pixel] += extract_weight(p);
    }
    return s;
}

BorderCenter border_center_means(const std::vector<double>& grid, std::size_t side,
                                 std::size_t border, std::size_t center) {
    if (grid.size() != side * side) throw ShapeError("grid size does not match side length");
    if (2 * border >= side || center > side || center == 0) {
        throw std::invalid_argument("border/center regions do not fit the grid");
    }
    const std::size_t lo = (side - center) / 2;
    double bsum = 0.0;
    double csum = 0.0;
    std::size_t bn = 0;
    std::size_t cn = 0;
    for (std::size_t r = 0; r < side; ++r) {
        for (std::size_t c = 0; c < side; ++c) {
            const double v = grid[r * side + c];
            if (r < border || c < border || r >= side - border || c >= side - border) {
                bsum += v;
                ++bn;
            }
            if (r >= lo && r < lo + center && c >= lo && c < lo + center) {
                csum += v;
                ++cn;
            }
        }
    }
    return {bsum / static_cast<double>(bn), csum / static_cast<double>(cn)};
}

Matrix stack_trajectories(const TrajectoryLog& log, std::size_t layer, ParticleType group) {
    std::size_t cols = 0;
    std::size_t count = 0;
    for (const auto& t : log.particles) {
        if (t.position.layer != layer || t.group != group) continue;
        for (const auto& s : t.snapshots) {
            if (cols == 0) cols = s.size();
            if (s.size() != cols) throw ShapeError("trajectory snapshots differ in length");
            ++count;
        }
    }
    Matrix m(count, cols);
    std::size_t r = 0;
    for (const auto& t : log.particles) {
        if (t.position.layer != layer || t.group != group) continue;
        for (const auto& s : t.snapshots) {
            std::copy(s.begin(), s.end(), m.data.begin() + static_cast<std::ptrdiff_t>(r * cols));
            ++r;
        }
    }
    return m;
}

}  // namespace orgnet
