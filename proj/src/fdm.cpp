#include "wavefdrc/fdm.hpp"

#include "wavefdrc/stencil.hpp"

#include <cmath>
#include <sstream>

namespace wavefdrc {

double cfl_number(const DomainSpec& spec) {
    return spec.c * spec.dt * std::sqrt(1.0 / (spec.dx * spec.dx) + 1.0 / (spec.dy * spec.dy));
}

bool check_cfl(const DomainSpec& spec) { return cfl_number(spec) <= 1.0; }

WaveState fdm_step(const WaveState& state, const SigmaField& sigma, const DomainSpec& spec,
                   std::span<const SourceSpec> sources) {
    if (!state.consistent() || !state.p.same_shape(sigma.sigma) || state.p.nx() != spec.nx ||
        state.p.ny() != spec.ny)
        throw Error("fdm_step: field shapes do not match the domain");
    if (!state.all_finite()) throw NonFiniteError(state.step, "fdm_step: input");

    const auto dpdx = DifferenceKernel::backward(Axis::x, spec.dx).apply(state.p);
    const auto dpdy = DifferenceKernel::backward(Axis::y, spec.dy).apply(state.p);

    WaveState next = WaveState::zeros(spec.nx, spec.ny);
    next.step = state.step + 1;

    const auto& s = sigma.sigma;
    const auto u_old = state.u.values();
    const auto v_old = state.v.values();
    const auto sig = s.values();
    auto u_new = next.u.values();
    auto v_new = next.v.values();
    const double a = spec.dt / spec.rho0;
    for (std::size_t k = 0; k < u_new.size(); ++k) {
        const double damp = 1.0 + sig[k] * spec.dt;
        u_new[k] = (u_old[k] - a * dpdx.values()[k]) / damp;
        v_new[k] = (v_old[k] - a * dpdy.values()[k]) / damp;
    }

    const auto dudx = DifferenceKernel::forward(Axis::x, spec.dx).apply(next.u);
    const auto dvdy = DifferenceKernel::forward(Axis::y, spec.dy).apply(next.v);
    const double b = spec.dt * spec.rho0 * spec.c * spec.c;
    const auto p_old = state.p.values();
    auto p_new = next.p.values();
    for (std::size_t k = 0; k < p_new.size(); ++k) {
        const double damp = 1.0 + sig[k] * spec.dt;
        p_new[k] = (p_old[k] - b * (dudx.values()[k] + dvdy.values()[k])) / damp;
    }

    return inject_sources(std::move(next), sources, spec);
}

Trajectory march(const WaveState& initial, int steps, int snapshot_stride, const StepFunction& step,
                 const std::string& label) {
    if (steps < 0) throw Error(label + ": steps must be >= 0");
    if (snapshot_stride < 1) throw Error(label + ": snapshot stride must be >= 1");
    Trajectory out;
    out.push_back(initial);
    WaveState current = initial;
    for (int n = 1; n <= steps; ++n) {
        current = step(current);
        if (!current.all_finite()) throw NonFiniteError(current.step, label);
        if (n % snapshot_stride == 0 || n == steps) out.push_back(current);
    }
    return out;
}

Trajectory simulate(const DomainSpec& spec, std::span<const SourceSpec> sources, int steps,
                    int snapshot_stride) {
    spec.validate();
    validate_sources(sources, spec);
    if (!check_cfl(spec)) {
        std::ostringstream os;
        os << "simulate: CFL number " << cfl_number(spec) << " exceeds 1";
        throw Error(os.str());
    }
    const SigmaField sigma = build_sigma(spec);
    const std::vector<SourceSpec> src(sources.begin(), sources.end());
    return march(WaveState::zeros(spec.nx, spec.ny), steps, snapshot_stride,
                 [&](const WaveState& s) { return fdm_step(s, sigma, spec, src); }, "simulate");
}

}  // namespace wavefdrc
