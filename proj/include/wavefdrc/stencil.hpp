#pragma once
// One-dimensional finite-difference kernels applied along a grid axis.
// Shared by the reference stepper and the residual loss so that both use
// exactly the same discrete operators.

#include "wavefdrc/grid.hpp"

#include <vector>

namespace wavefdrc {

enum class Axis { x, y };

struct Tap {
    int offset;
    double weight;
};

class DifferenceKernel {
  public:
    DifferenceKernel(Axis axis, std::vector<Tap> taps) : axis_(axis), taps_(std::move(taps)) {}

    /// (f(k) - f(k-1)) / h
    static DifferenceKernel backward(Axis axis, double h) {
        return DifferenceKernel(axis, {{-1, -1.0 / h}, {0, 1.0 / h}});
    }
    /// (f(k+1) - f(k)) / h
    static DifferenceKernel forward(Axis axis, double h) {
        return DifferenceKernel(axis, {{0, -1.0 / h}, {1, 1.0 / h}});
    }

    Axis axis() const { return axis_; }
    const std::vector<Tap>& taps() const { return taps_; }

    /// out(k) = sum_t w_t * f(k + offset_t); out-of-range samples read as 0.
    FieldGrid apply(const FieldGrid& f) const;

    /// Adjoint of apply: out(k + offset_t) += w_t * g(k) for in-range targets.
    FieldGrid apply_transpose(const FieldGrid& g) const;

  private:
    Axis axis_;
    std::vector<Tap> taps_;
};

}  // namespace wavefdrc
