#pragma once
// Adam with bias correction and the stepped learning-rate schedule used for
// training: 1e-4 up to epoch 20, 1e-5 up to epoch 60, 1e-6 afterwards.

#include "wavefdrc/nn.hpp"

#include <cstdint>

namespace wavefdrc {

template <typename Scalar>
struct AdamState {
    ModelParams<Scalar> m;  // first moments, same shapes as the parameters
    ModelParams<Scalar> v;  // second moments
    std::int64_t t = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    static AdamState fresh() {
        AdamState s;
        s.m = ModelParams<Scalar>::zeros();
        s.v = ModelParams<Scalar>::zeros();
        return s;
    }
    friend bool operator==(const AdamState&, const AdamState&) = default;
};

double lr_schedule(int epoch);

/// In-place Adam update. Throws naming the layer if a gradient is not finite.
template <typename Scalar>
void adam_step(ModelParams<Scalar>& params, const ModelParams<Scalar>& grads, AdamState<Scalar>& state,
               double lr);

}  // namespace wavefdrc
