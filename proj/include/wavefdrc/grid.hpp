#pragma once
/**
 * @file grid.hpp
 * @brief Domain geometry, staggered field storage, PML absorption profile and
 *        hard oscillating sources.
 *
 * Index convention: (i, j) with i along x (grid row) and j along y (grid
 * column); storage is row-major. Pressure p(i,j) sits at the cell center,
 * u(i,j) on the cell's left x-face (between p(i-1,j) and p(i,j)) and v(i,j)
 * on its bottom y-face (between p(i,j-1) and p(i,j)).
 */

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace wavefdrc {

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

using Rng = std::mt19937_64;

/// Geometry, discretization, medium and PML parameters of one computational domain.
struct DomainSpec {
    int nx = 200;
    int ny = 200;
    double dx = 2.0;
    double dy = 2.0;
    double dt = 1.0;
    double c = 1.0;
    double rho0 = 1.0;
    int pml_thickness = 30;  // cells
    double pml_R = 1e-3;

    /// Throws Error naming the first violated invariant. CFL is checked separately.
    void validate() const;

    bool is_interior(int i, int j) const {
        return i >= pml_thickness && i < nx - pml_thickness && j >= pml_thickness &&
               j < ny - pml_thickness;
    }

    friend bool operator==(const DomainSpec&, const DomainSpec&) = default;
};

class FieldGrid {
  public:
    FieldGrid() = default;
    FieldGrid(int nx, int ny, double fill = 0.0);

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(int i, int j) { return data_[index(i, j)]; }
    double operator()(int i, int j) const { return data_[index(i, j)]; }

    /// Out-of-range reads return 0.
    double at_or_zero(int i, int j) const {
        if (i < 0 || j < 0 || i >= nx_ || j >= ny_) return 0.0;
        return data_[index(i, j)];
    }

    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }

    bool same_shape(const FieldGrid& other) const {
        return nx_ == other.nx_ && ny_ == other.ny_;
    }
    bool all_finite() const;
    double max_abs() const;

    friend bool operator==(const FieldGrid&, const FieldGrid&) = default;

  private:
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(ny_) +
               static_cast<std::size_t>(j);
    }

    int nx_ = 0;
    int ny_ = 0;
    std::vector<double> data_;
};

/// Staggered fields at one time level. Simulation time is step * dt.
struct WaveState {
    FieldGrid u;
    FieldGrid v;
    FieldGrid p;
    std::int64_t step = 0;

    static WaveState zeros(int nx, int ny) {
        return WaveState{FieldGrid(nx, ny), FieldGrid(nx, ny), FieldGrid(nx, ny), 0};
    }
    double time(double dt) const { return static_cast<double>(step) * dt; }
    bool consistent() const { return u.same_shape(p) && v.same_shape(p); }
    bool all_finite() const { return u.all_finite() && v.all_finite() && p.all_finite(); }

    friend bool operator==(const WaveState&, const WaveState&) = default;
};

/// Rectangular hard source: p over [i0, i0+w) x [j0, j0+h) is overwritten with
/// sin(2*pi*t/period + bias) after every time advance.
struct SourceSpec {
    int i0 = 0;
    int j0 = 0;
    int w = 5;
    int h = 5;
    double period = 50.0;
    double bias = 0.0;

    bool contains(int i, int j) const {
        return i >= i0 && i < i0 + w && j >= j0 && j < j0 + h;
    }
    bool overlaps(const SourceSpec& o) const {
        return i0 < o.i0 + o.w && o.i0 < i0 + w && j0 < o.j0 + o.h && o.j0 < j0 + h;
    }

    friend bool operator==(const SourceSpec&, const SourceSpec&) = default;
};

/// Absorption coefficients; zero on the interior, quadratic growth inside the PML bands.
struct SigmaField {
    FieldGrid sigma;
};

/// Distribution used by new_domain to draw random sources.
struct SourceSampling {
    int min_count = 1;
    int max_count = 4;
    int size = 5;     // rectangle edge in cells
    int margin = 10;  // distance kept from the PML, shrunk if the interior is too small
    double period_min = 20.0;
    double period_max = 100.0;

    void validate() const;
    friend bool operator==(const SourceSampling&, const SourceSampling&) = default;
};

SigmaField build_sigma(const DomainSpec& spec);

double source_value(const SourceSpec& src, double time);

/// Throws if a rectangle leaves the interior, has T <= 0, or two rectangles overlap.
void validate_sources(std::span<const SourceSpec> sources, const DomainSpec& spec);

/// Overwrites p on every source rectangle with its value at state.time(spec.dt).
WaveState inject_sources(WaveState state, std::span<const SourceSpec> sources,
                         const DomainSpec& spec);

struct Domain {
    WaveState state;
    std::vector<SourceSpec> sources;
};

/// Zero state at step 0 with 1..4 random non-overlapping interior sources.
Domain new_domain(const DomainSpec& spec, Rng& rng, const SourceSampling& sampling = {});

/// 1 on interior cells, 0 on PML cells.
FieldGrid interior_mask(const DomainSpec& spec);

/// 1 everywhere except source rectangles (0). Used as the loss mask.
FieldGrid non_source_mask(const DomainSpec& spec, std::span<const SourceSpec> sources);

}  // namespace wavefdrc
