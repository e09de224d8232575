#pragma once

#include <vector>

#include "orgnet/net.hpp"
#include "orgnet/particle.hpp"

namespace orgnet {

/// Weight history of one particle of an organism.
struct ParticleTrajectory {
    Position position;  // edge position inside the organism
    ParticleType group = ParticleType::F;  // type at the end of training
    std::vector<std::vector<double>> snapshots;  // one per entry of TrajectoryLog::epochs
};

struct TrajectoryLog {
    std::vector<int> epochs;  // strictly increasing
    std::vector<ParticleTrajectory> particles;
};

}  // namespace orgnet
