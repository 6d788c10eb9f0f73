#include "wavefdrc/stencil.hpp"

namespace wavefdrc {

FieldGrid DifferenceKernel::apply(const FieldGrid& f) const {
    FieldGrid out(f.nx(), f.ny());
    const int di = axis_ == Axis::x ? 1 : 0;
    const int dj = axis_ == Axis::y ? 1 : 0;
    for (int i = 0; i < f.nx(); ++i) {
        for (int j = 0; j < f.ny(); ++j) {
            double acc = 0.0;
            for (const Tap& t : taps_) acc += t.weight * f.at_or_zero(i + di * t.offset, j + dj * t.offset);
            out(i, j) = acc;
        }
    }
    return out;
}

FieldGrid DifferenceKernel::apply_transpose(const FieldGrid& g) const {
    FieldGrid out(g.nx(), g.ny());
    const int di = axis_ == Axis::x ? 1 : 0;
    const int dj = axis_ == Axis::y ? 1 : 0;
    for (int i = 0; i < g.nx(); ++i) {
        for (int j = 0; j < g.ny(); ++j) {
            for (const Tap& t : taps_) {
                const int ti = i + di * t.offset;
                const int tj = j + dj * t.offset;
                if (ti < 0 || tj < 0 || ti >= g.nx() || tj >= g.ny()) continue;
                out(ti, tj) += t.weight * g(i, j);
            }
        }
    }
    return out;
}

}  // namespace wavefdrc
