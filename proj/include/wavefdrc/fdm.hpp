#pragma once
/**
 * @file fdm.hpp
 * @brief Reference staggered-grid stepper with semi-implicit PML damping.
 *
 * One step:
 *   u'(i,j) = [u(i,j) - dt (p(i,j) - p(i-1,j)) / (rho0 dx)] / (1 + sigma(i,j) dt)
 *   v'(i,j) = [v(i,j) - dt (p(i,j) - p(i,j-1)) / (rho0 dy)] / (1 + sigma(i,j) dt)
 *   p'(i,j) = [p(i,j) - dt rho0 c^2 ((u'(i+1,j) - u'(i,j)) / dx
 *                                   + (v'(i,j+1) - v'(i,j)) / dy)] / (1 + sigma(i,j) dt)
 * followed by hard-source injection at the new time. Neighbours outside the
 * grid read as zero.
 */

#include "wavefdrc/grid.hpp"

#include <functional>
#include <span>
#include <vector>

namespace wavefdrc {

/// Raised when a field stops being finite; `step` is the index of the offending state.
class NonFiniteError : public Error {
  public:
    NonFiniteError(std::int64_t step, const std::string& what)
        : Error(what + " (non-finite field at step " + std::to_string(step) + ")"), step_(step) {}
    std::int64_t step() const { return step_; }

  private:
    std::int64_t step_;
};

double cfl_number(const DomainSpec& spec);
bool check_cfl(const DomainSpec& spec);

WaveState fdm_step(const WaveState& state, const SigmaField& sigma, const DomainSpec& spec,
                   std::span<const SourceSpec> sources);

using Trajectory = std::vector<WaveState>;
using StepFunction = std::function<WaveState(const WaveState&)>;

/// Marches `step` from `initial`, keeping every stride-th state and the final one.
/// Throws NonFiniteError with the first step whose fields are not finite.
Trajectory march(const WaveState& initial, int steps, int snapshot_stride, const StepFunction& step,
                 const std::string& label);

/// Oracle trajectory from the zero state.
Trajectory simulate(const DomainSpec& spec, std::span<const SourceSpec> sources, int steps,
                    int snapshot_stride);

}  // namespace wavefdrc
