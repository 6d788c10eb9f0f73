#include "wavefdrc/nn.hpp"

#include <cmath>

namespace wavefdrc {

namespace {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Column range [lo, lo + len) of the padded layout that covers every real
// cell; the ring columns inside it are cleared after each convolution.
struct PaddedRange {
    Eigen::Index stride;
    Eigen::Index lo;
    Eigen::Index len;

    PaddedRange(int nx, int ny)
        : stride(ny + 2),
          lo(stride + 1),
          len(static_cast<Eigen::Index>(nx + 2) * stride - 2 * (stride + 1)) {}

    Eigen::Index offset(int ki, int kj) const { return (ki - 1) * stride + (kj - 1); }
};

template <typename Scalar>
void zero_ring(Matrix<Scalar>& m, int nx, int ny) {
    const Eigen::Index stride = ny + 2;
    m.leftCols(stride).setZero();
    m.rightCols(stride).setZero();
    for (int i = 1; i <= nx; ++i) {
        m.col(i * stride).setZero();
        m.col(i * stride + ny + 1).setZero();
    }
}

template <typename Scalar>
std::array<Matrix<Scalar>, 9> tap_matrices(const ConvLayer<Scalar>& layer) {
    std::array<Matrix<Scalar>, 9> taps;
    for (int ki = 0; ki < kKernelSize; ++ki) {
        for (int kj = 0; kj < kKernelSize; ++kj) {
            auto& t = taps[ki * kKernelSize + kj];
            t.resize(layer.out_channels, layer.in_channels);
            for (int o = 0; o < layer.out_channels; ++o)
                for (int c = 0; c < layer.in_channels; ++c) t(o, c) = layer.weights[layer.weight_index(o, c, ki, kj)];
        }
    }
    return taps;
}

template <typename Scalar>
FieldStack<Scalar> conv_forward(const ConvLayer<Scalar>& layer, const FieldStack<Scalar>& in) {
    FieldStack<Scalar> out(layer.out_channels, in.nx(), in.ny());
    const PaddedRange r(in.nx(), in.ny());
    const auto taps = tap_matrices(layer);
    const Eigen::Map<const Vector<Scalar>> bias(layer.biases.data(), layer.out_channels);

    auto body = out.padded().middleCols(r.lo, r.len);
    body.colwise() = bias;
    for (int ki = 0; ki < kKernelSize; ++ki)
        for (int kj = 0; kj < kKernelSize; ++kj)
            body.noalias() += taps[ki * kKernelSize + kj] * in.padded().middleCols(r.lo + r.offset(ki, kj), r.len);
    zero_ring(out.padded(), in.nx(), in.ny());
    return out;
}

// grad_out must vanish on the ring.
template <typename Scalar>
void conv_backward(const ConvLayer<Scalar>& layer, const FieldStack<Scalar>& in,
                   const FieldStack<Scalar>& grad_out, ConvLayer<Scalar>& grad,
                   FieldStack<Scalar>* grad_in) {
    const PaddedRange r(in.nx(), in.ny());
    const auto go = grad_out.padded().middleCols(r.lo, r.len);

    const Vector<Scalar> gb = go.rowwise().sum();
    for (int o = 0; o < layer.out_channels; ++o) grad.biases[o] = gb(o);

    const auto taps = grad_in ? tap_matrices(layer) : std::array<Matrix<Scalar>, 9>{};
    Matrix<Scalar> gw;
    for (int ki = 0; ki < kKernelSize; ++ki) {
        for (int kj = 0; kj < kKernelSize; ++kj) {
            const auto shifted = in.padded().middleCols(r.lo + r.offset(ki, kj), r.len);
            gw.noalias() = go * shifted.transpose();
            for (int o = 0; o < layer.out_channels; ++o)
                for (int c = 0; c < layer.in_channels; ++c)
                    grad.weights[layer.weight_index(o, c, ki, kj)] = gw(o, c);
            if (grad_in) {
                grad_in->padded().middleCols(r.lo + r.offset(ki, kj), r.len).noalias() +=
                    taps[ki * kKernelSize + kj].transpose() * go;
            }
        }
    }
}

template <typename Scalar>
FieldStack<Scalar> relu(const FieldStack<Scalar>& x) {
    FieldStack<Scalar> y = x;
    y.padded() = y.padded().cwiseMax(Scalar(0));
    return y;
}

// grad * 1[pre > 0]; ring entries of pre are zero so the result vanishes there.
template <typename Scalar>
void relu_backward_inplace(FieldStack<Scalar>& grad, const FieldStack<Scalar>& pre) {
    grad.padded() = (pre.padded().array() > Scalar(0)).select(grad.padded(), Scalar(0));
}

template <typename Scalar>
void check_layer_chain(const ModelParams<Scalar>& params) {
    const std::array<std::pair<int, int>, kLayerCount> chain{
        {{kHiddenChannels, kInputChannels}, {kHiddenChannels, kHiddenChannels}, {kOutputChannels, kHiddenChannels}}};
    for (int l = 0; l < kLayerCount; ++l) {
        const auto& layer = params.layers[l];
        if (layer.out_channels != chain[l].first || layer.in_channels != chain[l].second ||
            layer.weights.size() != static_cast<std::size_t>(layer.out_channels) * layer.in_channels * 9 ||
            layer.biases.size() != static_cast<std::size_t>(layer.out_channels))
            throw Error("model parameters: layer " + std::to_string(l + 1) + " has an unexpected shape");
    }
}

}  // namespace

template <typename Scalar>
ConvLayer<Scalar> ConvLayer<Scalar>::zeros(int out, int in) {
    ConvLayer layer;
    layer.out_channels = out;
    layer.in_channels = in;
    layer.weights.assign(static_cast<std::size_t>(out) * in * kKernelSize * kKernelSize, Scalar(0));
    layer.biases.assign(static_cast<std::size_t>(out), Scalar(0));
    return layer;
}

template <typename Scalar>
ModelParams<Scalar> ModelParams<Scalar>::zeros() {
    ModelParams p;
    p.layers[0] = ConvLayer<Scalar>::zeros(kHiddenChannels, kInputChannels);
    p.layers[1] = ConvLayer<Scalar>::zeros(kHiddenChannels, kHiddenChannels);
    p.layers[2] = ConvLayer<Scalar>::zeros(kOutputChannels, kHiddenChannels);
    return p;
}

template <typename Scalar>
std::size_t ModelParams<Scalar>::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.weights.size() + l.biases.size();
    return n;
}

template <typename Scalar>
bool ModelParams<Scalar>::all_finite() const {
    for (const auto& l : layers) {
        for (Scalar w : l.weights)
            if (!std::isfinite(w)) return false;
        for (Scalar b : l.biases)
            if (!std::isfinite(b)) return false;
    }
    return true;
}

template <typename Scalar>
ModelParams<Scalar> init_params(Rng& rng) {
    auto params = ModelParams<Scalar>::zeros();
    for (auto& layer : params.layers) {
        const double fan_in = static_cast<double>(layer.in_channels) * kKernelSize * kKernelSize;
        std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
        for (auto& w : layer.weights) w = static_cast<Scalar>(dist(rng));
    }
    return params;
}

template <typename Scalar>
ForwardResult<Scalar> forward(const ModelParams<Scalar>& params, const FieldStack<Scalar>& input) {
    check_layer_chain(params);
    if (input.channels() != kInputChannels)
        throw Error("forward: expected " + std::to_string(kInputChannels) + " input channels, got " +
                    std::to_string(input.channels()));
    ForwardResult<Scalar> r;
    r.cache.input = input;
    r.cache.pre1 = conv_forward(params.layers[0], input);
    r.cache.act1 = relu(r.cache.pre1);
    r.cache.pre2 = conv_forward(params.layers[1], r.cache.act1);
    r.cache.act2 = relu(r.cache.pre2);
    r.delta = conv_forward(params.layers[2], r.cache.act2);
    return r;
}

template <typename Scalar>
ModelParams<Scalar> backward(const ModelParams<Scalar>& params, const ForwardCache<Scalar>& cache,
                             const FieldStack<Scalar>& grad_delta) {
    check_layer_chain(params);
    const int nx = cache.input.nx();
    const int ny = cache.input.ny();
    auto same_grid = [&](const FieldStack<Scalar>& s, int channels) {
        return s.channels() == channels && s.nx() == nx && s.ny() == ny;
    };
    if (!same_grid(cache.input, kInputChannels) || !same_grid(cache.pre1, kHiddenChannels) ||
        !same_grid(cache.act1, kHiddenChannels) || !same_grid(cache.pre2, kHiddenChannels) ||
        !same_grid(cache.act2, kHiddenChannels))
        throw Error("backward: forward cache does not match the model parameters");
    if (!same_grid(grad_delta, kOutputChannels))
        throw Error("backward: gradient stack does not match the forward output shape");

    auto grads = ModelParams<Scalar>::zeros();

    FieldStack<Scalar> g_out = grad_delta;
    zero_ring(g_out.padded(), nx, ny);

    FieldStack<Scalar> g_act2(kHiddenChannels, nx, ny);
    conv_backward(params.layers[2], cache.act2, g_out, grads.layers[2], &g_act2);
    relu_backward_inplace(g_act2, cache.pre2);

    FieldStack<Scalar> g_act1(kHiddenChannels, nx, ny);
    conv_backward(params.layers[1], cache.act1, g_act2, grads.layers[1], &g_act1);
    relu_backward_inplace(g_act1, cache.pre1);

    conv_backward<Scalar>(params.layers[0], cache.input, g_act1, grads.layers[0], nullptr);
    return grads;
}

template <typename Scalar>
FieldStack<Scalar> make_input(const WaveState& state, const SigmaField& sigma, const DomainSpec& spec) {
    const int nx = state.p.nx();
    const int ny = state.p.ny();
    if (!state.consistent() || !sigma.sigma.same_shape(state.p))
        throw Error("make_input: field shapes disagree");
    FieldStack<Scalar> in(kInputChannels, nx, ny);
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            in(0, i, j) = static_cast<Scalar>(state.u(i, j));
            in(1, i, j) = static_cast<Scalar>(state.v(i, j));
            in(2, i, j) = static_cast<Scalar>(state.p(i, j));
            in(3, i, j) = static_cast<Scalar>(sigma.sigma(i, j) * spec.dt);
        }
    }
    return in;
}

template <typename Scalar>
WaveState apply_delta(const WaveState& state, const FieldStack<Scalar>& delta, const DomainSpec& spec,
                      std::span<const SourceSpec> sources) {
    const int nx = state.p.nx();
    const int ny = state.p.ny();
    if (delta.channels() != kOutputChannels || delta.nx() != nx || delta.ny() != ny)
        throw Error("apply_delta: delta shape does not match the state");
    WaveState next = WaveState::zeros(nx, ny);
    next.step = state.step + 1;
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            next.u(i, j) = static_cast<Scalar>(static_cast<Scalar>(state.u(i, j)) + delta(0, i, j));
            next.v(i, j) = static_cast<Scalar>(static_cast<Scalar>(state.v(i, j)) + delta(1, i, j));
            next.p(i, j) = static_cast<Scalar>(static_cast<Scalar>(state.p(i, j)) + delta(2, i, j));
        }
    }
    next = inject_sources(std::move(next), sources, spec);
    for (const auto& s : sources)
        for (int i = s.i0; i < s.i0 + s.w; ++i)
            for (int j = s.j0; j < s.j0 + s.h; ++j) next.p(i, j) = static_cast<Scalar>(next.p(i, j));
    return next;
}

template <typename Scalar>
WaveState predict_step(const ModelParams<Scalar>& params, const WaveState& state, const SigmaField& sigma,
                       const DomainSpec& spec, std::span<const SourceSpec> sources) {
    const auto result = forward(params, make_input<Scalar>(state, sigma, spec));
    return apply_delta(state, result.delta, spec, sources);
}

#define WAVEFDRC_INSTANTIATE_NN(S)                                                                       \
    template struct ConvLayer<S>;                                                                        \
    template struct ModelParams<S>;                                                                      \
    template ModelParams<S> init_params<S>(Rng&);                                                        \
    template ForwardResult<S> forward<S>(const ModelParams<S>&, const FieldStack<S>&);                   \
    template ModelParams<S> backward<S>(const ModelParams<S>&, const ForwardCache<S>&,                   \
                                        const FieldStack<S>&);                                           \
    template FieldStack<S> make_input<S>(const WaveState&, const SigmaField&, const DomainSpec&);        \
    template WaveState apply_delta<S>(const WaveState&, const FieldStack<S>&, const DomainSpec&,         \
                                      std::span<const SourceSpec>);                                      \
    template WaveState predict_step<S>(const ModelParams<S>&, const WaveState&, const SigmaField&,       \
                                       const DomainSpec&, std::span<const SourceSpec>);

WAVEFDRC_INSTANTIATE_NN(float)
WAVEFDRC_INSTANTIATE_NN(double)

#undef WAVEFDRC_INSTANTIATE_NN

}  // namespace wavefdrc
