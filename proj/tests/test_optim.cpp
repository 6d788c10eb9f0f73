#include "test_support.hpp"

#include "wavefdrc/optim.hpp"

#include <doctest.h>

#include <cmath>

using namespace wavefdrc;

namespace {

template <typename S>
ModelParams<S> filled(S value) {
    auto p = ModelParams<S>::zeros();
    for (auto& L : p.layers) {
        for (S& w : L.weights) w = value;
        for (S& b : L.biases) b = value;
    }
    return p;
}

}  // namespace

TEST_CASE("learning-rate schedule") {
    CHECK(lr_schedule(1) == 1e-4);
    CHECK(lr_schedule(20) == 1e-4);
    CHECK(lr_schedule(21) == 1e-5);
    CHECK(lr_schedule(60) == 1e-5);
    CHECK(lr_schedule(61) == 1e-6);
    CHECK(lr_schedule(200) == 1e-6);
    CHECK_THROWS_AS(lr_schedule(0), Error);
}

TEST_CASE("first step moves every parameter by lr against the gradient sign") {
    auto p = ModelParams<double>::zeros();
    auto adam = AdamState<double>::fresh();
    adam_step(p, filled(1.0), adam, 1e-4);
    CHECK(adam.t == 1);
    for (const auto& L : p.layers)
        for (double w : L.weights) CHECK(w == doctest::Approx(-1e-4).epsilon(1e-7));

    auto q = ModelParams<double>::zeros();
    auto adam2 = AdamState<double>::fresh();
    adam_step(q, filled(-37.0), adam2, 1e-4);
    CHECK(q.layers[1].weights[5] == doctest::Approx(1e-4).epsilon(1e-7));
}

TEST_CASE("matches a scalar transcription over many steps") {
    Rng rng(3);
    std::normal_distribution<double> d(0.0, 1.0);
    auto p = ModelParams<double>::zeros();
    auto adam = AdamState<double>::fresh();
    double x = 0.0, m = 0.0, v = 0.0;
    for (int t = 1; t <= 50; ++t) {
        const double g = d(rng);
        adam_step(p, filled(g), adam, 1e-3);
        m = 0.9 * m + 0.1 * g;
        v = 0.999 * v + 0.001 * g * g;
        const double mh = m / (1 - std::pow(0.9, t));
        const double vh = v / (1 - std::pow(0.999, t));
        x -= 1e-3 * mh / (std::sqrt(vh) + 1e-8);
    }
    CHECK(p.layers[2].biases[1] == doctest::Approx(x).epsilon(1e-10));
}

TEST_CASE("update is invariant to gradient scale") {
    auto a = ModelParams<double>::zeros(), b = ModelParams<double>::zeros();
    auto sa = AdamState<double>::fresh(), sb = AdamState<double>::fresh();
    for (int k = 0; k < 5; ++k) {
        adam_step(a, filled(0.3 + k), sa, 1e-4);
        adam_step(b, filled(1000.0 * (0.3 + k)), sb, 1e-4);
    }
    CHECK(a.layers[0].weights[0] == doctest::Approx(b.layers[0].weights[0]).epsilon(1e-6));
}

TEST_CASE("single precision state") {
    auto p = ModelParams<float>::zeros();
    auto adam = AdamState<float>::fresh();
    adam_step(p, filled(2.0f), adam, 1e-4);
    CHECK(p.layers[0].weights[0] == doctest::Approx(-1e-4).epsilon(1e-5));
}

TEST_CASE("non-finite gradient names the layer") {
    auto p = ModelParams<double>::zeros();
    auto adam = AdamState<double>::fresh();
    auto g = filled(1.0);
    g.layers[1].weights[3] = std::nan("");  // second layer, reported 1-based
    try {
        adam_step(p, g, adam, 1e-4);
        FAIL("expected Error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("layer 2") != std::string::npos);
    }
}
