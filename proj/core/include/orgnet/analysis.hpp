#pragma once

#include <cstddef>
#include <vector>

#include "orgnet/net.hpp"
#include "orgnet/organism.hpp"
#include "orgnet/particle.hpp"
#include "orgnet/trajectory.hpp"

namespace orgnet {

/// Dense row-major matrix used for analysis inputs and outputs.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

struct PcaResult {
    Matrix projected;                  // rows x k scores
    Matrix components;                 // k x cols, unit-length principal directions
    std::vector<double> mean;          // column means removed before projection
    std::vector<double> explained;     // variance ratio per component, non-increasing
};

/// Principal components of the observations in `rows`. The largest-magnitude
/// entry of each component is positive.
/// Data with zero total variance yields an all-zero projection and zero ratios.
PcaResult pca_project(const Matrix& rows, std::size_t k);

/// Copy of `net` with floor(fraction * weight_count) smallest-magnitude
/// weights set to zero; ties go to the lower flat index.
Network l1_prune(const Network& net, double fraction);

/// Copy of `net` with exactly `count` smallest-magnitude weights set to zero.
Network l1_prune_count(const Network& net, std::size_t count);

struct PositionStats {
    std::size_t side = 15;
    std::vector<double> counts;       // side*side, row-major
    std::vector<double> weight_sums;  // side*side, row-major
};

/// Per-input-pixel count of SR particles in the first organism layer and the
/// sum of their extracted weights. Requires a 225-pixel input layer.
PositionStats sr_position_stats(const OrganismNetwork& on, FixpointMargin margin,
                                TypeThresholds thresholds);

/// Mean of grid cells in the outer `border` rows and columns and in the
/// centered `center` x `center` block.
struct BorderCenter {
    double border_mean = 0.0;
    double center_mean = 0.0;
};
BorderCenter border_center_means(const std::vector<double>& grid, std::size_t side,
                                 std::size_t border, std::size_t center);

/// All snapshots of trajectories in `group` restricted to organism layer
/// `layer`, stacked as rows (particle-major, then epoch).
Matrix stack_trajectories(const TrajectoryLog& log, std::size_t layer, ParticleType group);

}  // namespace orgnet
