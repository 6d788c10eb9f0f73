#pragma once
/**
 * @file nn.hpp
 * @brief Three-layer convolutional surrogate predicting one-step field deltas.
 *
 * Architecture: conv3x3(4->32) -> ReLU -> conv3x3(32->32) -> ReLU ->
 * conv3x3(32->3), zero padding 1 so that spatial size is preserved. Input
 * channels are (u, v, p, sigma*dt); output channels are (du, dv, dp).
 *
 * Activations are stored channel-major per grid point (an Eigen matrix of
 * shape channels x (nx+2)(ny+2)) including a one-cell zero ring, so a 3x3
 * convolution reduces to nine GEMMs over shifted column blocks.
 */

#include "wavefdrc/grid.hpp"

#include <Eigen/Core>

#include <array>
#include <span>
#include <vector>

namespace wavefdrc {

inline constexpr int kInputChannels = 4;
inline constexpr int kHiddenChannels = 32;
inline constexpr int kOutputChannels = 3;
inline constexpr int kKernelSize = 3;
inline constexpr int kLayerCount = 3;

template <typename Scalar>
struct ConvLayer {
    int out_channels = 0;
    int in_channels = 0;
    std::vector<Scalar> weights;  // [out][in][kh][kw]
    std::vector<Scalar> biases;   // [out]

    static ConvLayer zeros(int out, int in);

    std::size_t weight_index(int o, int c, int ki, int kj) const {
        return ((static_cast<std::size_t>(o) * in_channels + c) * kKernelSize + ki) * kKernelSize +
               kj;
    }
    friend bool operator==(const ConvLayer&, const ConvLayer&) = default;
};

template <typename Scalar>
struct ModelParams {
    std::array<ConvLayer<Scalar>, kLayerCount> layers;

    /// Zero-valued parameters with the 4 -> 32 -> 32 -> 3 channel chain.
    static ModelParams zeros();

    std::size_t parameter_count() const;
    bool all_finite() const;

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Stack of scalar fields over one grid, stored with a one-cell zero ring.
template <typename Scalar>
class FieldStack {
  public:
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    FieldStack() = default;
    FieldStack(int channels, int nx, int ny)
        : nx_(nx), ny_(ny), data_(Matrix::Zero(channels, static_cast<Eigen::Index>(nx + 2) * (ny + 2))) {}

    int channels() const { return static_cast<int>(data_.rows()); }
    int nx() const { return nx_; }
    int ny() const { return ny_; }

    Scalar& operator()(int c, int i, int j) { return data_(c, column(i, j)); }
    Scalar operator()(int c, int i, int j) const { return data_(c, column(i, j)); }

    Eigen::Index column(int i, int j) const {
        return static_cast<Eigen::Index>(i + 1) * (ny_ + 2) + (j + 1);
    }

    Matrix& padded() { return data_; }
    const Matrix& padded() const { return data_; }

  private:
    int nx_ = 0;
    int ny_ = 0;
    Matrix data_;
};

/// Everything the reverse pass needs from one forward evaluation.
template <typename Scalar>
struct ForwardCache {
    FieldStack<Scalar> input;
    FieldStack<Scalar> pre1;
    FieldStack<Scalar> act1;
    FieldStack<Scalar> pre2;
    FieldStack<Scalar> act2;
};

template <typename Scalar>
struct ForwardResult {
    FieldStack<Scalar> delta;
    ForwardCache<Scalar> cache;
};

/// He fan-in normal weights (std = sqrt(2 / (in * 9))), zero biases.
template <typename Scalar>
ModelParams<Scalar> init_params(Rng& rng);

template <typename Scalar>
ForwardResult<Scalar> forward(const ModelParams<Scalar>& params, const FieldStack<Scalar>& input);

/// Gradient of a scalar loss w.r.t. every parameter given dLoss/d(delta).
template <typename Scalar>
ModelParams<Scalar> backward(const ModelParams<Scalar>& params, const ForwardCache<Scalar>& cache,
                             const FieldStack<Scalar>& grad_delta);

/// Network input (u, v, p, sigma*dt) for one state.
template <typename Scalar>
FieldStack<Scalar> make_input(const WaveState& state, const SigmaField& sigma,
                              const DomainSpec& spec);

/// state + delta channelwise in Scalar arithmetic, then source injection at
/// the new time. Fields are rounded to Scalar so that single-precision runs
/// store exactly what the network saw.
template <typename Scalar>
WaveState apply_delta(const WaveState& state, const FieldStack<Scalar>& delta,
                      const DomainSpec& spec, std::span<const SourceSpec> sources);

template <typename Scalar>
WaveState predict_step(const ModelParams<Scalar>& params, const WaveState& state,
                       const SigmaField& sigma, const DomainSpec& spec,
                       std::span<const SourceSpec> sources);

/// Converts parameter precision (exact when widening).
template <typename To, typename From>
ModelParams<To> convert_params(const ModelParams<From>& params) {
    ModelParams<To> out;
    for (int l = 0; l < kLayerCount; ++l) {
        const auto& src = params.layers[l];
        auto& dst = out.layers[l];
        dst.out_channels = src.out_channels;
        dst.in_channels = src.in_channels;
        dst.weights.assign(src.weights.begin(), src.weights.end());
        dst.biases.assign(src.biases.begin(), src.biases.end());
    }
    return out;
}

}  // namespace wavefdrc
