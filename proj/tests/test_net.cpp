#include "doctest.h"

#include <cmath>
#include <numbers>

#include "orgnet/errors.hpp"
#include "orgnet/net.hpp"
#include "support.hpp"

using namespace orgnet;
using testing::central_differences;
using testing::relative_error;

namespace {

double batch_loss(const Network& net, const std::vector<Example>& batch, Loss loss) {
    std::vector<double> g(net.weights.size());
    return loss_and_gradient(net, batch, g, loss);
}

}  // namespace

TEST_SUITE("net") {

TEST_CASE("architecture counts and offsets") {
    NetworkArchitecture a({2, 2, 1});
    CHECK(a.layer_count() == 2);
    CHECK(a.weight_count() == 6);
    CHECK(a.layer_offset(1) == 4);
    CHECK(a.fan_in(1) == 2);
    CHECK(a.fan_out(1) == 1);
    CHECK_THROWS_AS(NetworkArchitecture({3}), std::invalid_argument);
    CHECK_THROWS_AS(NetworkArchitecture({3, 0, 1}), std::invalid_argument);
}

TEST_CASE("forward examples") {
    SUBCASE("zero weights give zero output") {
        Network n(NetworkArchitecture({3, 4, 2}, Activation::Gelu));
        const std::vector<double> x{0.3, -2.0, 7.0};
        for (double y : forward(n, x)) CHECK(y == 0.0);
    }
    SUBCASE("single linear layer") {
        Network n(NetworkArchitecture({2, 1}), {0.5, -3.0});
        const std::vector<double> x{4.0, 2.0};
        CHECK(forward(n, x)[0] == doctest::Approx(0.5 * 4.0 - 3.0 * 2.0));
    }
    SUBCASE("hand evaluation of [2,2,1] with unit weights") {
        Network n(NetworkArchitecture({2, 2, 1}), std::vector<double>(6, 1.0));
        const std::vector<double> x{1.0, 2.0};
        CHECK(forward(n, x)[0] == doctest::Approx(6.0).epsilon(1e-15));
    }
    SUBCASE("gelu is applied after hidden layers only") {
        Network n(NetworkArchitecture({1, 1, 1}, Activation::Gelu), {1.0, -2.0});
        const std::vector<double> x{1.0};
        CHECK(forward(n, x)[0] == doctest::Approx(-2.0 * gelu(1.0)).epsilon(1e-14));
    }
    SUBCASE("wrong input length") {
        Network n(NetworkArchitecture({2, 1}));
        const std::vector<double> x{1.0, 2.0, 3.0};
        CHECK_THROWS_AS(forward(n, x), ShapeError);
    }
}

TEST_CASE("position_of examples") {
    NetworkArchitecture a({2, 2, 1});
    CHECK(a.position_of(0) == Position{0, 0, 0});
    CHECK(a.position_of(3) == Position{0, 1, 1});
    CHECK(a.position_of(5) == Position{1, 0, 1});
    CHECK_THROWS_AS(a.position_of(6), IndexError);
    CHECK_THROWS_AS(a.flat_index({0, 2, 0}), IndexError);
}

TEST_CASE("gradient examples") {
    SUBCASE("zero target and zero weights") {
        Network n(NetworkArchitecture({3, 2, 2}));
        std::vector<double> x{1.0, -1.0, 0.5};
        std::vector<double> t{0.0, 0.0};
        const std::vector<Example> batch{{x, t}};
        for (double g : gradient(n, batch)) CHECK(g == 0.0);
    }
    SUBCASE("closed-form scalar case") {
        const double w = 0.7;
        const double x = 1.3;
        const double y = -0.4;
        Network n(NetworkArchitecture({1, 1}), {w});
        std::vector<double> xv{x};
        std::vector<double> yv{y};
        const std::vector<Example> batch{{xv, yv}};
        CHECK(gradient(n, batch)[0] == doctest::Approx(2.0 * x * (w * x - y)).epsilon(1e-14));
    }
    SUBCASE("empty batch") {
        Network n(NetworkArchitecture({1, 1}), {1.0});
        CHECK_THROWS_AS(gradient(n, std::vector<Example>{}), std::invalid_argument);
    }
}

TEST_CASE("sgd_step examples") {
    SUBCASE("momentum 0 is plain sgd") {
        Network n(NetworkArchitecture({2, 1}), {1.0, 2.0});
        OptimizerState s(2, 0.1, 0.0);
        const std::vector<double> g{0.5, -1.0};
        sgd_step(n, g, s);
        CHECK(n.weights[0] == doctest::Approx(1.0 - 0.05));
        CHECK(n.weights[1] == doctest::Approx(2.0 + 0.1));
    }
    SUBCASE("zero gradient and zero velocity") {
        Network n(NetworkArchitecture({2, 1}), {1.0, 2.0});
        OptimizerState s(2, 0.1, 0.9);
        const std::vector<double> g{0.0, 0.0};
        sgd_step(n, g, s);
        CHECK(n.weights == std::vector<double>{1.0, 2.0});
    }
    SUBCASE("second update with constant gradient is lr * 1.9 * g") {
        Network n(NetworkArchitecture({1, 1}), {0.0});
        OptimizerState s(1, 0.01, 0.9);
        const std::vector<double> g{2.0};
        sgd_step(n, g, s);
        const double after_first = n.weights[0];
        sgd_step(n, g, s);
        CHECK(after_first - n.weights[0] == doctest::Approx(0.01 * 1.9 * 2.0).epsilon(1e-12));
    }
    SUBCASE("non-finite gradient") {
        Network n(NetworkArchitecture({1, 1}), {0.0});
        OptimizerState s(1, 0.01, 0.9);
        const std::vector<double> g{std::numeric_limits<double>::quiet_NaN()};
        CHECK_THROWS_AS(sgd_step(n, g, s), DivergenceError);
    }
    SUBCASE("invalid optimizer settings") {
        CHECK_THROWS_AS(OptimizerState(1, 0.0, 0.9), std::invalid_argument);
        CHECK_THROWS_AS(OptimizerState(1, 0.1, 1.0), std::invalid_argument);
    }
}

TEST_CASE("gelu examples") {
    CHECK(gelu(0.0) == 0.0);
    CHECK(std::abs(gelu(10.0) - 10.0) < 1e-6);
    CHECK(std::abs(gelu(1.0) - 0.8413447) < 1e-6);
    const double phi1 = std::exp(-0.5) / std::sqrt(2.0 * std::numbers::pi);
    CHECK(gelu_derivative(1.0) == doctest::Approx(0.8413447460685429 + phi1).epsilon(1e-12));
    for (double x : {-3.0, -0.7, 0.0, 0.4, 2.5}) {
        const double fd = (gelu(x + 1e-6) - gelu(x - 1e-6)) / 2e-6;
        CHECK(gelu_derivative(x) == doctest::Approx(fd).epsilon(1e-8));
    }
}

TEST_CASE("output_loss values") {
    const std::vector<double> y{1.0, 3.0};
    const std::vector<double> t{0.0, 0.0};
    std::vector<double> g(2);
    CHECK(output_loss(Loss::MeanSquared, y, t, 1, g) == doctest::Approx(5.0));
    CHECK(g[0] == doctest::Approx(1.0));
    CHECK(g[1] == doctest::Approx(3.0));

    const std::vector<double> logits{0.0, 0.0, 0.0};
    const std::vector<double> onehot{0.0, 1.0, 0.0};
    std::vector<double> g3(3);
    CHECK(output_loss(Loss::CrossEntropy, logits, onehot, 2, g3) == doctest::Approx(std::log(3.0) / 2.0));
    CHECK(g3[1] == doctest::Approx((1.0 / 3.0 - 1.0) / 2.0));
    CHECK(loss_from_string(to_string(Loss::CrossEntropy)) == Loss::CrossEntropy);
    CHECK_THROWS_AS(loss_from_string("hinge"), std::invalid_argument);
}

TEST_CASE("property: forward is linear in x for linear nets") {
    Rng rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        const auto arch = testing::random_arch(rng, 4, 5, 200, Activation::Linear);
        const Network n = testing::random_net(arch, rng);
        std::vector<double> x(arch.input_size());
        std::vector<double> z(arch.input_size());
        for (auto& v : x) v = testing::uniform(rng, -1, 1);
        for (auto& v : z) v = testing::uniform(rng, -1, 1);
        const double a = testing::uniform(rng, -1, 1);
        const double b = testing::uniform(rng, -1, 1);
        std::vector<double> mix(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) mix[i] = a * x[i] + b * z[i];
        const auto fm = forward(n, mix);
        const auto fx = forward(n, x);
        const auto fz = forward(n, z);
        for (std::size_t i = 0; i < fm.size(); ++i) CHECK(std::abs(fm[i] - (a * fx[i] + b * fz[i])) <= 1e-12);
    }
}

TEST_CASE("property: analytic gradient matches central differences") {
    Rng rng(12);
    for (int trial = 0; trial < 60; ++trial) {
        const Activation act = trial % 2 == 0 ? Activation::Linear : Activation::Gelu;
        const Loss loss = trial % 3 == 0 ? Loss::CrossEntropy : Loss::MeanSquared;
        const auto arch = testing::random_arch(rng, 4, 6, 200, act);
        const Network n = testing::random_net(arch, rng);
        const auto ds = testing::random_dataset(testing::pick(rng, 1, 6), arch.input_size(), arch.output_size(),
                                                rng, loss == Loss::CrossEntropy);
        const auto batch = ds.examples();
        const auto analytic = gradient(n, batch, loss);
        const auto numeric = central_differences(n.weights, [&](const std::vector<double>& w) {
            return batch_loss(Network(arch, w), batch, loss);
        });
        CHECK(relative_error(analytic, numeric) <= 1e-5);
    }
}

TEST_CASE("property: position_of and flat_index round-trip") {
    Rng rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        const auto arch = testing::random_arch(rng, 5, 7, 400, Activation::Linear);
        for (std::size_t i = 0; i < arch.weight_count(); ++i) {
            const Position p = arch.position_of(i);
            REQUIRE(p.layer < arch.layer_count());
            REQUIRE(p.cell < arch.fan_out(p.layer));
            REQUIRE(p.edge < arch.fan_in(p.layer));
            REQUIRE(arch.flat_index(p) == i);
        }
    }
}

TEST_CASE("property: a small gradient step does not increase the mse") {
    Rng rng(14);
    for (int trial = 0; trial < 50; ++trial) {
        const auto arch = testing::random_arch(rng, 4, 5, 100, trial % 2 ? Activation::Gelu : Activation::Linear);
        Network n = testing::random_net(arch, rng);
        const auto ds = testing::random_dataset(8, arch.input_size(), arch.output_size(), rng);
        const auto batch = ds.examples();
        const double before = mse(n, batch);
        OptimizerState s(n.weights.size(), 1e-5, 0.9);
        sgd_step(n, gradient(n, batch), s);
        CHECK(mse(n, batch) <= before);
    }
}

TEST_CASE("init_uniform respects the fan-in bound") {
    Rng rng(15);
    NetworkArchitecture a({4, 9, 1});
    const Network n = init_uniform(a, rng);
    for (std::size_t i = 0; i < a.weight_count(); ++i) {
        const double bound = std::sqrt(1.0 / static_cast<double>(a.fan_in(a.position_of(i).layer)));
        CHECK(std::abs(n.weights[i]) <= bound);
    }
}

}  // TEST_SUITE
