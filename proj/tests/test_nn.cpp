#include "test_support.hpp"

#include "wavefdrc/nn.hpp"

#include <doctest.h>

#include <cmath>

using namespace wavefdrc;
using namespace wavefdrc::testing;

namespace {

using Grid3 = std::vector<std::vector<std::vector<double>>>;  // [c][i][j]

Grid3 to_grid(const FieldStack<double>& f) {
    Grid3 g(f.channels(), std::vector<std::vector<double>>(f.nx(), std::vector<double>(f.ny())));
    for (int c = 0; c < f.channels(); ++c)
        for (int i = 0; i < f.nx(); ++i)
            for (int j = 0; j < f.ny(); ++j) g[c][i][j] = f(c, i, j);
    return g;
}

// Direct nested-loop convolution with zero padding.
Grid3 naive_conv(const ConvLayer<double>& L, const Grid3& x, bool relu) {
    const int nx = static_cast<int>(x[0].size()), ny = static_cast<int>(x[0][0].size());
    Grid3 y(L.out_channels, std::vector<std::vector<double>>(nx, std::vector<double>(ny)));
    for (int o = 0; o < L.out_channels; ++o)
        for (int i = 0; i < nx; ++i)
            for (int j = 0; j < ny; ++j) {
                double acc = L.biases[o];
                for (int c = 0; c < L.in_channels; ++c)
                    for (int ki = 0; ki < 3; ++ki)
                        for (int kj = 0; kj < 3; ++kj) {
                            const int ii = i + ki - 1, jj = j + kj - 1;
                            if (ii < 0 || jj < 0 || ii >= nx || jj >= ny) continue;
                            acc += L.weights[L.weight_index(o, c, ki, kj)] * x[c][ii][jj];
                        }
                y[o][i][j] = relu ? std::max(acc, 0.0) : acc;
            }
    return y;
}

FieldStack<double> random_stack(int ch, int nx, int ny, Rng& rng) {
    std::uniform_real_distribution<double> d(-1, 1);
    FieldStack<double> f(ch, nx, ny);
    for (int c = 0; c < ch; ++c)
        for (int i = 0; i < nx; ++i)
            for (int j = 0; j < ny; ++j) f(c, i, j) = d(rng);
    return f;
}

ModelParams<double> random_params(Rng& rng) {
    ModelParams<double> p = init_params<double>(rng);
    std::normal_distribution<double> d(0.0, 0.05);
    for (auto& L : p.layers)
        for (double& b : L.biases) b = d(rng);
    return p;
}

double dot_delta(const FieldStack<double>& delta, const FieldStack<double>& r) {
    double s = 0.0;
    for (int c = 0; c < delta.channels(); ++c)
        for (int i = 0; i < delta.nx(); ++i)
            for (int j = 0; j < delta.ny(); ++j) s += delta(c, i, j) * r(c, i, j);
    return s;
}

}  // namespace

TEST_CASE("parameter shapes") {
    const auto p = ModelParams<double>::zeros();
    CHECK(p.layers[0].weights.size() == 1152);
    CHECK(p.layers[1].weights.size() == 9216);
    CHECK(p.layers[2].weights.size() == 864);
    CHECK(p.layers[2].biases.size() == 3);
    CHECK(p.parameter_count() == 11299);
}

TEST_CASE("zero parameters predict a zero delta") {
    Rng rng(1);
    const auto p = ModelParams<float>::zeros();
    FieldStack<float> in(4, 12, 9);
    for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 9; ++j) in(2, i, j) = 1.0f + i;
    const auto out = forward(p, in);
    CHECK(out.delta.channels() == 3);
    CHECK(out.delta.nx() == 12);
    CHECK(out.delta.ny() == 9);
    CHECK(out.delta.padded().cwiseAbs().maxCoeff() == 0.0f);
}

TEST_CASE("He initialization") {
    Rng rng(2);
    const auto p = init_params<double>(rng);
    for (const auto& L : p.layers) {
        double s2 = 0.0;
        for (double w : L.weights) s2 += w * w;
        const double std_est = std::sqrt(s2 / static_cast<double>(L.weights.size()));
        const double target = std::sqrt(2.0 / (L.in_channels * 9.0));
        CHECK(std::abs(std_est / target - 1.0) < 0.2);
        for (double b : L.biases) CHECK(b == 0.0);
    }
}

TEST_CASE("forward agrees with nested-loop convolution") {
    Rng rng(3);
    const auto p = random_params(rng);
    for (auto [nx, ny] : {std::pair{7, 5}, {1, 1}, {13, 16}}) {
        const auto in = random_stack(4, nx, ny, rng);
        const auto out = forward(p, in);
        const Grid3 h1 = naive_conv(p.layers[0], to_grid(in), true);
        const Grid3 h2 = naive_conv(p.layers[1], h1, true);
        const Grid3 y = naive_conv(p.layers[2], h2, false);
        double worst = 0.0;
        for (int c = 0; c < 3; ++c)
            for (int i = 0; i < nx; ++i)
                for (int j = 0; j < ny; ++j) worst = std::max(worst, std::abs(out.delta(c, i, j) - y[c][i][j]));
        CHECK(worst < 1e-12);
        // the padding ring stays zero
        for (int c = 0; c < 3; ++c) {
            CHECK(out.delta.padded()(c, 0) == 0.0);
            CHECK(out.delta.padded()(c, out.delta.padded().cols() - 1) == 0.0);
        }
    }
}

TEST_CASE("float and double forward agree") {
    Rng rng(4);
    const auto pd = random_params(rng);
    const auto pf = convert_params<float>(pd);
    const auto in = random_stack(4, 10, 10, rng);
    FieldStack<float> inf(4, 10, 10);
    inf.padded() = in.padded().cast<float>();
    const auto od = forward(pd, in);
    const auto of = forward(pf, inf);
    CHECK((od.delta.padded() - of.delta.padded().cast<double>()).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("translation equivariance away from the border") {
    Rng rng(5);
    const auto p = random_params(rng);
    FieldStack<double> a(4, 20, 20), b(4, 20, 20);
    std::uniform_real_distribution<double> d(-1, 1);
    for (int c = 0; c < 4; ++c)
        for (int i = 7; i < 11; ++i)
            for (int j = 7; j < 11; ++j) {
                const double x = d(rng);
                a(c, i, j) = x;
                b(c, i + 2, j - 3) = x;
            }
    // biases make the zero region non-zero too, so compare every shifted cell that
    // has a full receptive field inside the grid on both sides
    const auto oa = forward(p, a), ob = forward(p, b);
    double worst = 0.0;
    for (int c = 0; c < 3; ++c)
        for (int i = 3; i < 15; ++i)
            for (int j = 6; j < 17; ++j) worst = std::max(worst, std::abs(oa.delta(c, i, j) - ob.delta(c, i + 2, j - 3)));
    CHECK(worst < 1e-12);
}

TEST_CASE("receptive field is 7x7") {
    Rng rng(6);
    const auto p = random_params(rng);
    const auto base = random_stack(4, 21, 21, rng);
    auto bumped = base;
    bumped(1, 10, 10) += 1.0;
    const auto oa = forward(p, base), ob = forward(p, bumped);
    for (int i = 0; i < 21; ++i)
        for (int j = 0; j < 21; ++j)
            if (std::abs(i - 10) > 3 || std::abs(j - 10) > 3)
                for (int c = 0; c < 3; ++c) CHECK(oa.delta(c, i, j) == ob.delta(c, i, j));
}

TEST_CASE("backward matches per-parameter central differences") {
    Rng rng(7);
    const auto p = random_params(rng);
    const auto in = random_stack(4, 5, 4, rng);
    const auto r = random_stack(3, 5, 4, rng);
    const auto res = forward(p, in);
    const auto g = backward(p, res.cache, r);
    const double h = 1e-6;
    double worst = 0.0;
    std::size_t checked = 0;
    for (int l = 0; l < kLayerCount; ++l) {
        auto check_one = [&](auto member, std::size_t k) {
            auto pp = p, pm = p;
            (pp.layers[l].*member)[k] += h;
            (pm.layers[l].*member)[k] -= h;
            const double num = (dot_delta(forward(pp, in).delta, r) - dot_delta(forward(pm, in).delta, r)) / (2 * h);
            const double ana = (g.layers[l].*member)[k];
            worst = std::max(worst, std::abs(num - ana) / std::max(1.0, std::abs(ana)));
            ++checked;
        };
        for (std::size_t k = 0; k < p.layers[l].weights.size(); ++k) check_one(&ConvLayer<double>::weights, k);
        for (std::size_t k = 0; k < p.layers[l].biases.size(); ++k) check_one(&ConvLayer<double>::biases, k);
    }
    CHECK(checked == p.parameter_count());
    CHECK(worst < 1e-6);
}

TEST_CASE("backward is linear in the upstream gradient") {
    Rng rng(8);
    const auto p = random_params(rng);
    const auto in = random_stack(4, 6, 6, rng);
    const auto r1 = random_stack(3, 6, 6, rng);
    const auto r2 = random_stack(3, 6, 6, rng);
    FieldStack<double> r12(3, 6, 6);
    r12.padded() = 2.0 * r1.padded() - 0.5 * r2.padded();
    const auto res = forward(p, in);
    const auto g1 = backward(p, res.cache, r1), g2 = backward(p, res.cache, r2), g12 = backward(p, res.cache, r12);
    double worst = 0.0;
    for (int l = 0; l < kLayerCount; ++l)
        for (std::size_t k = 0; k < g1.layers[l].weights.size(); ++k)
            worst = std::max(worst, std::abs(g12.layers[l].weights[k] -
                                             (2.0 * g1.layers[l].weights[k] - 0.5 * g2.layers[l].weights[k])));
    CHECK(worst < 1e-12);
}

TEST_CASE("backward rejects a mismatched cache") {
    Rng rng(9);
    const auto p = random_params(rng);
    const auto res = forward(p, random_stack(4, 6, 6, rng));
    CHECK_THROWS_AS(backward(p, res.cache, FieldStack<double>(3, 5, 6)), Error);
}

TEST_CASE("make_input and apply_delta") {
    Rng rng(10);
    DomainSpec s = small_domain(16, 3);
    s.dt = 0.5;
    const SigmaField sg = build_sigma(s);
    WaveState st = random_state(s, rng);
    st.step = 4;
    const auto in = make_input<double>(st, sg, s);
    CHECK(in.channels() == 4);
    CHECK(in(0, 3, 4) == st.u(3, 4));
    CHECK(in(1, 3, 4) == st.v(3, 4));
    CHECK(in(2, 3, 4) == st.p(3, 4));
    CHECK(in(3, 0, 4) == sg.sigma(0, 4) * 0.5);

    FieldStack<double> delta(3, 16, 16);
    delta(2, 8, 8) = 0.25;
    const std::vector<SourceSpec> src{{5, 5, 2, 2, 20.0, 0.0}};
    const WaveState next = apply_delta(st, delta, s, src);
    CHECK(next.step == 5);
    CHECK(next.p(8, 8) == st.p(8, 8) + 0.25);
    CHECK(next.u == st.u);
    CHECK(next.p(5, 5) == source_value(src[0], 2.5));

    // single precision rounds the stored fields
    FieldStack<float> df(3, 16, 16);
    const WaveState nf = apply_delta(st, df, s, {});
    CHECK(nf.p(1, 1) == static_cast<double>(static_cast<float>(st.p(1, 1))));
}

TEST_CASE("predict_step with zero parameters is identity plus injection") {
    Rng rng(11);
    const DomainSpec s = small_domain(16, 3);
    const SigmaField sg = build_sigma(s);
    WaveState st = random_state(s, rng);
    const WaveState next = predict_step(ModelParams<double>::zeros(), st, sg, s, {});
    CHECK(next.p == st.p);
    CHECK(next.step == 1);
}
