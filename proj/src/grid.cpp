#include "wavefdrc/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace wavefdrc {

void DomainSpec::validate() const {
    auto fail = [](const std::string& msg) { throw Error("invalid domain: " + msg); };
    if (pml_thickness < 0) fail("pml_thickness must be >= 0");
    if (nx < 2 * pml_thickness + 4 || ny < 2 * pml_thickness + 4) {
        std::ostringstream os;
        os << "nx=" << nx << ", ny=" << ny << " too small for pml_thickness=" << pml_thickness
           << " (need >= " << 2 * pml_thickness + 4 << ")";
        fail(os.str());
    }
    if (!(dx > 0.0) || !std::isfinite(dx)) fail("dx must be > 0");
    if (!(dy > 0.0) || !std::isfinite(dy)) fail("dy must be > 0");
    if (!(dt > 0.0) || !std::isfinite(dt)) fail("dt must be > 0");
    if (!(c > 0.0) || !std::isfinite(c)) fail("c must be > 0");
    if (!(rho0 > 0.0) || !std::isfinite(rho0)) fail("rho0 must be > 0");
    if (!(pml_R > 0.0 && pml_R < 1.0)) fail("pml_R must lie in (0, 1)");
}

void SourceSampling::validate() const {
    auto fail = [](const std::string& msg) { throw Error("invalid source sampling: " + msg); };
    if (min_count < 0 || max_count < min_count) fail("need 0 <= min_count <= max_count");
    if (size < 1) fail("size must be >= 1");
    if (margin < 0) fail("margin must be >= 0");
    if (!(period_min > 0.0) || period_max < period_min) fail("need 0 < period_min <= period_max");
}

FieldGrid::FieldGrid(int nx, int ny, double fill) : nx_(nx), ny_(ny) {
    if (nx < 0 || ny < 0) throw Error("FieldGrid: negative dimensions");
    data_.assign(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny), fill);
}

bool FieldGrid::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

double FieldGrid::max_abs() const {
    double m = 0.0;
    for (double x : data_) m = std::max(m, std::abs(x));
    return m;
}

namespace {

// Penetration depth in cells (1..thickness) of index k into the low or high PML band, 0 outside.
int band_depth(int k, int n, int thickness) {
    if (k < thickness) return thickness - k;
    if (k >= n - thickness) return k - (n - thickness) + 1;
    return 0;
}

}  // namespace

SigmaField build_sigma(const DomainSpec& spec) {
    spec.validate();
    SigmaField out{FieldGrid(spec.nx, spec.ny)};
    if (spec.pml_thickness == 0) return out;

    const double delta_x = spec.pml_thickness * spec.dx;
    const double delta_y = spec.pml_thickness * spec.dy;
    const double log_term = std::log(1.0 / spec.pml_R);
    auto profile = [&](double depth, double delta) {
        const double r = depth / delta;
        return log_term * (3.0 * spec.c / (2.0 * delta)) * r * r;
    };

    for (int i = 0; i < spec.nx; ++i) {
        const int di = band_depth(i, spec.nx, spec.pml_thickness);
        const double sx = di > 0 ? profile(di * spec.dx, delta_x) : 0.0;
        for (int j = 0; j < spec.ny; ++j) {
            const int dj = band_depth(j, spec.ny, spec.pml_thickness);
            const double sy = dj > 0 ? profile(dj * spec.dy, delta_y) : 0.0;
            out.sigma(i, j) = sx + sy;
        }
    }
    return out;
}

double source_value(const SourceSpec& src, double time) {
    return std::sin(2.0 * std::numbers::pi * time / src.period + src.bias);
}

void validate_sources(std::span<const SourceSpec> sources, const DomainSpec& spec) {
    for (std::size_t a = 0; a < sources.size(); ++a) {
        const auto& s = sources[a];
        if (s.w < 1 || s.h < 1) throw Error("source " + std::to_string(a) + ": empty rectangle");
        if (!(s.period > 0.0) || !std::isfinite(s.period))
            throw Error("source " + std::to_string(a) + ": period must be > 0");
        if (!spec.is_interior(s.i0, s.j0) || !spec.is_interior(s.i0 + s.w - 1, s.j0 + s.h - 1))
            throw Error("source " + std::to_string(a) + ": rectangle leaves the interior region");
        for (std::size_t b = 0; b < a; ++b) {
            if (s.overlaps(sources[b]))
                throw Error("sources " + std::to_string(b) + " and " + std::to_string(a) +
                            " overlap");
        }
    }
}

WaveState inject_sources(WaveState state, std::span<const SourceSpec> sources,
                         const DomainSpec& spec) {
    validate_sources(sources, spec);
    const double t = state.time(spec.dt);
    for (const auto& s : sources) {
        const double value = source_value(s, t);
        for (int i = s.i0; i < s.i0 + s.w; ++i)
            for (int j = s.j0; j < s.j0 + s.h; ++j) state.p(i, j) = value;
    }
    return state;
}

Domain new_domain(const DomainSpec& spec, Rng& rng, const SourceSampling& sampling) {
    spec.validate();
    sampling.validate();

    Domain d{WaveState::zeros(spec.nx, spec.ny), {}};

    const int lo = spec.pml_thickness;
    const int interior_x = spec.nx - 2 * spec.pml_thickness;
    const int interior_y = spec.ny - 2 * spec.pml_thickness;
    if (sampling.size > interior_x || sampling.size > interior_y)
        throw Error("source size exceeds the interior region");
    const int margin = std::min({sampling.margin, (interior_x - sampling.size) / 2,
                                 (interior_y - sampling.size) / 2});

    std::uniform_int_distribution<int> count_dist(sampling.min_count, sampling.max_count);
    std::uniform_int_distribution<int> ix(lo + margin, spec.nx - lo - margin - sampling.size);
    std::uniform_int_distribution<int> jy(lo + margin, spec.ny - lo - margin - sampling.size);
    std::uniform_real_distribution<double> period(sampling.period_min, sampling.period_max);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);

    const int count = count_dist(rng);
    constexpr int kMaxAttempts = 64;
    for (int n = 0; n < count; ++n) {
        for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
            SourceSpec s;
            s.i0 = ix(rng);
            s.j0 = jy(rng);
            s.w = sampling.size;
            s.h = sampling.size;
            s.period = period(rng);
            s.bias = phase(rng);
            const bool clash = std::any_of(d.sources.begin(), d.sources.end(),
                                           [&](const SourceSpec& o) { return o.overlaps(s); });
            if (!clash) {
                d.sources.push_back(s);
                break;
            }
        }
    }
    return d;
}

FieldGrid interior_mask(const DomainSpec& spec) {
    spec.validate();
    FieldGrid mask(spec.nx, spec.ny);
    for (int i = 0; i < spec.nx; ++i)
        for (int j = 0; j < spec.ny; ++j) mask(i, j) = spec.is_interior(i, j) ? 1.0 : 0.0;
    return mask;
}

FieldGrid non_source_mask(const DomainSpec& spec, std::span<const SourceSpec> sources) {
    FieldGrid mask(spec.nx, spec.ny, 1.0);
    for (const auto& s : sources) {
        for (int i = std::max(0, s.i0); i < std::min(spec.nx, s.i0 + s.w); ++i)
            for (int j = std::max(0, s.j0); j < std::min(spec.ny, s.j0 + s.h); ++j)
                mask(i, j) = 0.0;
    }
    return mask;
}

}  // namespace wavefdrc
