#include "doctest.h"

#include <cmath>

#include "orgnet/analysis.hpp"
#include "orgnet/errors.hpp"
#include "orgnet/metrics.hpp"
#include "support.hpp"

using namespace orgnet;

namespace {

Matrix random_matrix(Rng& rng, std::size_t r, std::size_t c) {
    Matrix m(r, c);
    for (auto& v : m.data) v = testing::uniform(rng, -1.0, 1.0);
    return m;
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("metrics examples") {
    const std::vector<double> y{1.0, 2.0};
    const std::vector<double> t{0.0, 0.0};
    const auto m = metrics(y, t, 1, TaskKind::Regression);
    CHECK(m.mse == doctest::Approx(2.5));
    CHECK(m.mae == doctest::Approx(1.5));
    CHECK_FALSE(m.accuracy);

    const std::vector<double> out{0.1, 0.9, 0.0, 0.5, 0.5, 0.0};
    const std::vector<double> tgt{0.0, 1.0, 0.0, 0.0, 1.0, 0.0};
    const auto c = metrics(out, tgt, 3, TaskKind::Classification);
    REQUIRE(c.accuracy);
    CHECK(*c.accuracy == doctest::Approx(0.5));

    const std::vector<double> tie{1.0, 1.0, 0.0};
    CHECK(argmax(tie) == 0);
    CHECK_THROWS_AS(metrics(out, t, 1, TaskKind::Regression), ShapeError);
    CHECK_THROWS_AS(metrics(out, tgt, 4, TaskKind::Classification), ShapeError);
}

TEST_CASE("pca examples") {
    SUBCASE("points on a line have one component") {
        Matrix m(5, 3);
        for (std::size_t r = 0; r < 5; ++r) {
            const double s = static_cast<double>(r) - 1.0;
            m(r, 0) = 1.0 + s;
            m(r, 1) = 2.0 - 2.0 * s;
            m(r, 2) = 3.0;
        }
        const auto p = pca_project(m, 2);
        CHECK(p.explained[0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(p.explained[1]) <= 1e-12);
        const double norm = std::sqrt(5.0);
        CHECK(std::abs(p.components(0, 0)) == doctest::Approx(1.0 / norm));
        CHECK(p.components(0, 1) == doctest::Approx(2.0 / norm));
        for (std::size_t r = 0; r < 5; ++r) CHECK(std::abs(p.projected(r, 1)) <= 1e-12);
    }
    SUBCASE("identical rows project to zero") {
        Matrix m(4, 3);
        for (std::size_t r = 0; r < 4; ++r) {
            m(r, 0) = 0.5;
            m(r, 1) = -1.0;
            m(r, 2) = 2.0;
        }
        const auto p = pca_project(m, 2);
        for (double v : p.projected.data) CHECK(v == 0.0);
        for (double v : p.explained) CHECK(v == 0.0);
    }
    SUBCASE("invalid input") {
        CHECK_THROWS_AS(pca_project(Matrix(1, 3), 1), std::invalid_argument);
        CHECK_THROWS_AS(pca_project(Matrix(4, 3), 0), std::invalid_argument);
        CHECK_THROWS_AS(pca_project(Matrix(4, 3), 4), std::invalid_argument);
    }
}

TEST_CASE("property: full-rank pca reconstructs the data") {
    Rng rng(1);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t cols = testing::pick(rng, 1, 6);
        const std::size_t rows = testing::pick(rng, cols + 1, 20);
        const Matrix m = random_matrix(rng, rows, cols);
        const auto p = pca_project(m, cols);
        double total = 0.0;
        for (std::size_t k = 0; k < cols; ++k) {
            total += p.explained[k];
            if (k > 0) CHECK(p.explained[k] <= p.explained[k - 1] + 1e-15);
            double len = 0.0;
            for (std::size_t c = 0; c < cols; ++c) len += p.components(k, c) * p.components(k, c);
            CHECK(len == doctest::Approx(1.0).epsilon(1e-12));
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) {
                double x = p.mean[c];
                for (std::size_t k = 0; k < cols; ++k) x += p.projected(r, k) * p.components(k, c);
                CHECK(std::abs(x - m(r, c)) <= 1e-10);
            }
        }
    }
}

TEST_CASE("property: pca does not depend on row order") {
    Rng rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix m = random_matrix(rng, 12, 4);
        Matrix rev(12, 4);
        for (std::size_t r = 0; r < 12; ++r) {
            for (std::size_t c = 0; c < 4; ++c) rev(11 - r, c) = m(r, c);
        }
        const auto a = pca_project(m, 2);
        const auto b = pca_project(rev, 2);
        for (std::size_t i = 0; i < a.components.data.size(); ++i) {
            CHECK(std::abs(a.components.data[i] - b.components.data[i]) <= 1e-9);
        }
        for (std::size_t r = 0; r < 12; ++r) {
            for (std::size_t k = 0; k < 2; ++k) CHECK(std::abs(a.projected(r, k) - b.projected(11 - r, k)) <= 1e-9);
        }
    }
}

TEST_CASE("l1_prune examples") {
    const Network n(NetworkArchitecture({2, 2, 1}), {0.5, -0.1, 0.3, 0.1, -2.0, 0.05});
    const auto half = l1_prune(n, 0.5);
    CHECK(half.weights == std::vector<double>{0.5, 0.0, 0.3, 0.0, -2.0, 0.0});
    CHECK(l1_prune(n, 0.0).weights == n.weights);
    const auto two = l1_prune_count(n, 2);
    CHECK(two.weights == std::vector<double>{0.5, 0.0, 0.3, 0.1, -2.0, 0.0});
    CHECK(l1_prune(n, 0.99).weights == std::vector<double>{0.0, 0.0, 0.0, 0.0, -2.0, 0.0});
    CHECK_THROWS_AS(l1_prune(n, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(l1_prune(n, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(l1_prune_count(n, 7), std::invalid_argument);
}

TEST_CASE("property: l1 pruning zeroes exactly the smallest weights and is idempotent") {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const auto arch = testing::random_arch(rng, 4, 6, 150, Activation::Linear);
        const Network n = testing::random_net(arch, rng);
        const std::size_t count = testing::pick(rng, 0, n.weights.size());
        const auto p = l1_prune_count(n, count);
        std::size_t zeros = 0;
        double max_pruned = 0.0;
        double min_kept = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n.weights.size(); ++i) {
            if (p.weights[i] == 0.0) {
                ++zeros;
                max_pruned = std::max(max_pruned, std::abs(n.weights[i]));
            } else {
                CHECK(p.weights[i] == n.weights[i]);
                min_kept = std::min(min_kept, std::abs(n.weights[i]));
            }
        }
        CHECK(zeros == count);
        CHECK(max_pruned <= min_kept);
        CHECK(l1_prune_count(p, count).weights == p.weights);
        const double f = testing::uniform(rng, 0.0, 0.999);
        const auto q = l1_prune(n, f);
        CHECK(l1_prune(q, f).weights == q.weights);
    }
}

TEST_CASE("sr_position_stats and border_center_means") {
    OrganismArchitecture a;
    a.layer_sizes = {225, 1};
    auto on = OrganismNetwork::zeros(a, 0.004, 0.9);
    on.particle(Position{0, 0, 0}) = testing::identity_extracting(0.5);
    on.particle(Position{0, 0, 16}) = testing::identity_extracting(-0.25);
    on.particle(Position{0, 0, 112}) = testing::path_particle(0, 2.0);
    const auto s = sr_position_stats(on, {}, {});
    CHECK(s.counts[0] == 1.0);
    CHECK(s.counts[16] == 1.0);
    CHECK(s.counts[112] == 0.0);
    CHECK(s.weight_sums[0] == doctest::Approx(0.5));
    CHECK(s.weight_sums[16] == doctest::Approx(-0.25));
    double total = 0.0;
    for (double c : s.counts) total += c;
    CHECK(total == 2.0);

    const auto bc = border_center_means(s.counts, 15, 2, 7);
    CHECK(bc.border_mean == doctest::Approx(2.0 / (225.0 - 121.0)));
    CHECK(bc.center_mean == 0.0);

    std::vector<double> grid(9, 0.0);
    grid[4] = 9.0;
    const auto one = border_center_means(grid, 3, 1, 1);
    CHECK(one.border_mean == 0.0);
    CHECK(one.center_mean == 9.0);
    CHECK_THROWS_AS(border_center_means(grid, 3, 2, 1), std::invalid_argument);
    CHECK_THROWS_AS(border_center_means(grid, 4, 1, 1), ShapeError);

    OrganismArchitecture small;
    small.layer_sizes = {2, 1};
    CHECK_THROWS_AS(sr_position_stats(OrganismNetwork::zeros(small, 0.004, 0.9), {}, {}), ShapeError);
}

TEST_CASE("stack_trajectories") {
    TrajectoryLog log;
    log.epochs = {0, 1};
    log.particles.push_back({Position{0, 0, 0}, ParticleType::SR, {{1.0, 2.0}, {3.0, 4.0}}});
    log.particles.push_back({Position{1, 0, 0}, ParticleType::SR, {{5.0, 6.0}, {7.0, 8.0}}});
    log.particles.push_back({Position{0, 1, 0}, ParticleType::F, {{9.0, 9.0}, {9.0, 9.0}}});
    log.particles.push_back({Position{0, 0, 1}, ParticleType::SR, {{0.0, 1.0}, {1.0, 0.0}}});
    const auto m = stack_trajectories(log, 0, ParticleType::SR);
    CHECK(m.rows == 4);
    CHECK(m.cols == 2);
    CHECK(m(1, 0) == 3.0);
    CHECK(m(2, 1) == 1.0);
    CHECK(stack_trajectories(log, 2, ParticleType::SR).rows == 0);
}

}  // TEST_SUITE
