#include "wavefdrc/optim.hpp"

#include <cmath>

namespace wavefdrc {

double lr_schedule(int epoch) {
    if (epoch < 1) throw Error("lr_schedule: epoch must be >= 1");
    if (epoch <= 20) return 1e-4;
    if (epoch <= 60) return 1e-5;
    return 1e-6;
}

namespace {

template <typename Scalar>
void update(std::vector<Scalar>& p, const std::vector<Scalar>& g, std::vector<Scalar>& m,
            std::vector<Scalar>& v, double b1, double b2, double c1, double c2, double eps,
            double lr) {
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double gk = g[k];
        const double mk = b1 * m[k] + (1.0 - b1) * gk;
        const double vk = b2 * v[k] + (1.0 - b2) * gk * gk;
        m[k] = static_cast<Scalar>(mk);
        v[k] = static_cast<Scalar>(vk);
        const double m_hat = mk / c1;
        const double v_hat = vk / c2;
        p[k] = static_cast<Scalar>(p[k] - lr * m_hat / (std::sqrt(v_hat) + eps));
    }
}

}  // namespace

template <typename Scalar>
void adam_step(ModelParams<Scalar>& params, const ModelParams<Scalar>& grads, AdamState<Scalar>& state,
               double lr) {
    for (int l = 0; l < kLayerCount; ++l) {
        const auto& g = grads.layers[l];
        const auto& p = params.layers[l];
        if (g.weights.size() != p.weights.size() || g.biases.size() != p.biases.size() ||
            state.m.layers[l].weights.size() != p.weights.size() ||
            state.v.layers[l].biases.size() != p.biases.size())
            throw Error("adam_step: shape mismatch in layer " + std::to_string(l + 1));
        auto finite = [](const std::vector<Scalar>& xs) {
            for (Scalar x : xs)
                if (!std::isfinite(x)) return false;
            return true;
        };
        if (!finite(g.weights) || !finite(g.biases))
            throw Error("adam_step: non-finite gradient in layer " + std::to_string(l + 1));
    }

    state.t += 1;
    const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    for (int l = 0; l < kLayerCount; ++l) {
        auto& p = params.layers[l];
        const auto& g = grads.layers[l];
        update(p.weights, g.weights, state.m.layers[l].weights, state.v.layers[l].weights, state.beta1,
               state.beta2, c1, c2, state.eps, lr);
        update(p.biases, g.biases, state.m.layers[l].biases, state.v.layers[l].biases, state.beta1,
               state.beta2, c1, c2, state.eps, lr);
    }
}

template void adam_step<float>(ModelParams<float>&, const ModelParams<float>&, AdamState<float>&, double);
template void adam_step<double>(ModelParams<double>&, const ModelParams<double>&, AdamState<double>&, double);

}  // namespace wavefdrc
