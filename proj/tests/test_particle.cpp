#include "doctest.h"

#include <cmath>

#include "orgnet/errors.hpp"
#include "orgnet/particle.hpp"
#include "support.hpp"

using namespace orgnet;

namespace {

ParticleNetwork trained_particle(std::uint64_t seed, double max_error = 1e-7, int max_steps = 20000) {
    Rng rng(seed);
    ParticleNetwork p = ParticleNetwork::random(default_particle_arch(), rng);
    OptimizerState opt(p.weights().size(), 0.004, 0.9);
    for (int s = 0; s < max_steps && replication_error(p).max_abs > max_error; ++s) self_train_step(p, opt);
    return p;
}

double max_abs(std::span<const double> w) {
    double m = 0.0;
    for (double x : w) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

TEST_SUITE("particle") {

TEST_CASE("particle shape is validated") {
    CHECK_NOTHROW(ParticleNetwork(Network(NetworkArchitecture({5, 2, 1}))));
    CHECK_THROWS_AS(ParticleNetwork(Network(NetworkArchitecture({4, 1}))), ShapeError);
    CHECK_THROWS_AS(ParticleNetwork(Network(NetworkArchitecture({5, 2}))), ShapeError);
    CHECK_THROWS_AS(ParticleNetwork(Network(NetworkArchitecture({5, 3, 1}, Activation::Gelu))), ShapeError);
    CHECK(default_particle_arch().weight_count() == 27);
}

TEST_CASE("apply_replicative examples") {
    Rng rng(1);
    const Network m = testing::random_net(NetworkArchitecture({2, 3, 1}), rng);
    SUBCASE("zero particle maps every weight to zero") {
        const auto out = apply_replicative(ParticleNetwork::zeros(default_particle_arch()), m);
        for (double w : out.weights) CHECK(w == 0.0);
    }
    SUBCASE("identity on the first input reproduces m") {
        const auto out = apply_replicative(testing::path_particle(0, 1.0), m);
        CHECK(out.weights == m.weights);
        CHECK(out.arch == m.arch);
    }
    SUBCASE("path product 2 doubles m") {
        const auto out = apply_replicative(testing::path_particle(0, 2.0), m);
        for (std::size_t i = 0; i < m.weights.size(); ++i) CHECK(out.weights[i] == 2.0 * m.weights[i]);
    }
    SUBCASE("positions are fed as raw indices") {
        const Network ones(NetworkArchitecture({2, 2, 1}), std::vector<double>(6, 0.0));
        const auto cell = apply_replicative(testing::path_particle(2, 1.0), ones);
        const auto edge = apply_replicative(testing::path_particle(3, 1.0), ones);
        const auto layer = apply_replicative(testing::path_particle(1, 1.0), ones);
        for (std::size_t i = 0; i < 6; ++i) {
            const Position p = ones.arch.position_of(i);
            CHECK(layer.weights[i] == static_cast<double>(p.layer));
            CHECK(cell.weights[i] == static_cast<double>(p.cell));
            CHECK(edge.weights[i] == static_cast<double>(p.edge));
        }
    }
    SUBCASE("non-finite output marks the result diverged") {
        Network big(NetworkArchitecture({1, 1}), {1e308});
        const auto out = apply_replicative(testing::path_particle(0, 1e10), big);
        CHECK(out.diverged);
    }
}

TEST_CASE("apply_auxiliary and extract_weight examples") {
    Rng rng(2);
    const auto p = ParticleNetwork::random(default_particle_arch(), rng);
    CHECK(apply_auxiliary(p, 0.0) == 0.0);
    CHECK(apply_auxiliary(ParticleNetwork::zeros(default_particle_arch()), 5.0) == 0.0);
    CHECK(extract_weight(ParticleNetwork::zeros(default_particle_arch())) == 0.0);
    const double c = -0.37;
    CHECK(apply_auxiliary(testing::path_particle(4, c), 3.0) == doctest::Approx(3.0 * c).epsilon(1e-15));
    CHECK(extract_weight(testing::path_particle(4, c)) == doctest::Approx(c).epsilon(1e-15));
}

TEST_CASE("self_train_step examples") {
    SUBCASE("zero particle is a no-op with loss 0") {
        auto p = ParticleNetwork::zeros(default_particle_arch());
        OptimizerState opt(27, 0.004, 0.9);
        CHECK(self_train_step(p, opt) == 0.0);
        for (double w : p.weights()) CHECK(w == 0.0);
    }
    SUBCASE("random particle reaches replication loss below 1e-7") {
        const auto p = trained_particle(3, 3e-4, 5000);
        CHECK(replication_error(p).mse < 1e-7);
        CHECK(max_abs(p.weights()) > 1e-3);
    }
    SUBCASE("a single step reduces the replication loss in at least 95 of 100 seeds") {
        int reduced = 0;
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            Rng rng(1000 + seed);
            auto p = ParticleNetwork::random(default_particle_arch(), rng);
            OptimizerState opt(27, 0.004, 0.9);
            const double before = replication_error(p).mse;
            self_train_step(p, opt);
            if (replication_error(p).mse < before) ++reduced;
        }
        CHECK(reduced >= 95);
    }
}

TEST_CASE("is_eps_fixpoint examples") {
    CHECK(is_eps_fixpoint(ParticleNetwork::zeros(default_particle_arch()), {1e-12}));
    CHECK(is_eps_fixpoint(testing::path_particle(0, 1.0), {1e-15}));
    CHECK(is_eps_fixpoint(testing::identity_extracting(0.6), {1e-15}));
    CHECK_FALSE(is_eps_fixpoint(testing::path_particle(0, 2.0), {1e-5}));
}

TEST_CASE("classify examples") {
    const FixpointMargin m;
    const TypeThresholds t;
    CHECK(classify(ParticleNetwork::zeros(default_particle_arch()), m, t) == ParticleType::Zero);
    auto huge = testing::path_particle(0, 1.0);
    huge.weights()[5] = 1e9;
    CHECK(classify(huge, m, t) == ParticleType::Diverged);
    CHECK(classify(trained_particle(4), m, t) == ParticleType::SR);
    CHECK(classify(testing::path_particle(0, 2.0), m, t) == ParticleType::F);
    auto nan = testing::path_particle(0, 1.0);
    nan.weights()[0] = std::numeric_limits<double>::quiet_NaN();
    CHECK(classify(nan, m, t) == ParticleType::Diverged);
}

TEST_CASE("perturb examples") {
    Rng rng(5);
    const auto p = ParticleNetwork::random(default_particle_arch(), rng);
    SUBCASE("sigma 0 is the identity") {
        const auto q = perturb(p, 0.0, rng);
        CHECK(std::equal(q.weights().begin(), q.weights().end(), p.weights().begin()));
    }
    SUBCASE("sigma 1e-9 moves no weight by 1e-7 over 1e4 draws") {
        double worst = 0.0;
        for (int i = 0; i < 371; ++i) {
            const auto q = perturb(p, 1e-9, rng);
            for (std::size_t k = 0; k < 27; ++k) worst = std::max(worst, std::abs(q.weights()[k] - p.weights()[k]));
        }
        CHECK(worst < 1e-7);
    }
    SUBCASE("empirical standard deviation matches sigma") {
        const double sigma = 0.01;
        double sum = 0.0;
        double sq = 0.0;
        std::size_t n = 0;
        for (int i = 0; i < 3704; ++i) {
            const auto q = perturb(p, sigma, rng);
            for (std::size_t k = 0; k < 27; ++k, ++n) {
                const double d = q.weights()[k] - p.weights()[k];
                sum += d;
                sq += d * d;
            }
        }
        const double mean = sum / static_cast<double>(n);
        const double sd = std::sqrt(sq / static_cast<double>(n) - mean * mean);
        CHECK(n >= 100000);
        CHECK(std::abs(sd - sigma) <= 0.05 * sigma);
    }
    SUBCASE("negative sigma is rejected") { CHECK_THROWS_AS(perturb(p, -1.0, rng), std::invalid_argument); }
}

TEST_CASE("self_application_chain examples") {
    SUBCASE("zero particle never leaves the fixpoint") {
        const auto r = self_application_chain(ParticleNetwork::zeros(default_particle_arch()), {}, 50, 1e3);
        CHECK(r.steps_sr == 50);
        CHECK(r.steps_to_divergence == 50);
    }
    SUBCASE("doubling particle diverges within ceil(log2(threshold)) steps") {
        const auto r = self_application_chain(testing::path_particle(0, 2.0), {}, 100, 1e3);
        CHECK(r.steps_to_divergence <= static_cast<int>(std::ceil(std::log2(1e3))));
        CHECK(r.steps_sr == 0);
    }
    SUBCASE("trained fixpoint keeps the SR property for at least one step") {
        const auto r = self_application_chain(trained_particle(6), {}, 100, 1e3);
        CHECK(r.steps_sr >= 1);
        CHECK(r.steps_sr <= r.steps_to_divergence);
    }
    SUBCASE("max_steps must be positive") {
        CHECK_THROWS_AS(self_application_chain(testing::path_particle(0, 1.0), {}, 0, 1e3), std::invalid_argument);
    }
}

TEST_CASE("property: replicative application leaves m untouched and keeps its shape") {
    Rng rng(7);
    for (int trial = 0; trial < 40; ++trial) {
        const auto p = ParticleNetwork::random(default_particle_arch(), rng);
        const auto arch = testing::random_arch(rng, 4, 5, 120, Activation::Linear);
        const Network m = testing::random_net(arch, rng);
        const Network copy = m;
        const Network out = apply_replicative(p, m);
        CHECK(out.arch == m.arch);
        CHECK(m.weights == copy.weights);
    }
}

TEST_CASE("property: auxiliary application equals extract_weight times x") {
    Rng rng(8);
    for (int trial = 0; trial < 200; ++trial) {
        const auto p = ParticleNetwork::random(default_particle_arch(), rng);
        const double x = testing::uniform(rng, -10.0, 10.0);
        CHECK(std::abs(apply_auxiliary(p, x) - extract_weight(p) * x) <= 1e-12);
    }
}

TEST_CASE("property: is_eps_fixpoint is monotone in epsilon") {
    Rng rng(9);
    for (int trial = 0; trial < 30; ++trial) {
        auto p = ParticleNetwork::random(default_particle_arch(), rng);
        OptimizerState opt(27, 0.004, 0.9);
        const int steps = static_cast<int>(testing::pick(rng, 0, 40));
        for (int s = 0; s < steps; ++s) self_train_step(p, opt);
        const double err = replication_error(p).max_abs;
        const double eps[] = {err * 0.5, err * 1.0001, err * 2, err * 10};
        bool seen_true = false;
        for (double e : eps) {
            const bool fp = is_eps_fixpoint(p, {e});
            CHECK((!seen_true || fp));
            seen_true = seen_true || fp;
        }
        CHECK(seen_true);
    }
}

TEST_CASE("property: classification precedence is Diverged > Zero > SR > F") {
    const FixpointMargin m;
    const TypeThresholds t;
    auto tiny_but_huge = ParticleNetwork::zeros(default_particle_arch());
    tiny_but_huge.weights()[0] = 2e3;
    CHECK(classify(tiny_but_huge, m, t) == ParticleType::Diverged);
    auto near_zero = testing::path_particle(0, 1.0);
    for (auto& w : near_zero.weights()) w *= 1e-7;
    CHECK(is_eps_fixpoint(near_zero, m));
    CHECK(classify(near_zero, m, t) == ParticleType::Zero);
    Rng rng(10);
    for (int trial = 0; trial < 50; ++trial) {
        const auto p = ParticleNetwork::random(default_particle_arch(), rng);
        const auto a = classify(p, m, t);
        CHECK(a == classify(p, m, t));
        CHECK((a == ParticleType::F || a == ParticleType::SR));
    }
}

}  // TEST_SUITE
