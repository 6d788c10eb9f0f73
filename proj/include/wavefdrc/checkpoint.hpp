#pragma once
/**
 * @file checkpoint.hpp
 * @brief Model checkpoint files.
 *
 * Layout (all little-endian):
 *   "WNET" | version u16 | precision u8 (0 = single, 1 = double) | layer count u8 |
 *   per layer: out u32 | in u32 | kh u32 | kw u32 | weights | biases |
 *   adam flag u8 | [t u64 | beta1 f64 | beta2 f64 | eps f64 |
 *                   per layer: m weights | m biases | v weights | v biases]
 * Weights, biases and moments are stored in the declared precision.
 */

#include "wavefdrc/optim.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

namespace wavefdrc {

enum class Precision : std::uint8_t { single = 0, double_ = 1 };

template <typename Scalar>
constexpr Precision precision_of() {
    static_assert(std::is_same_v<Scalar, float> || std::is_same_v<Scalar, double>);
    return std::is_same_v<Scalar, float> ? Precision::single : Precision::double_;
}

template <typename Scalar>
struct Checkpoint {
    ModelParams<Scalar> params;
    std::optional<AdamState<Scalar>> adam;
};

template <typename Scalar>
void write_checkpoint(std::ostream& os, const ModelParams<Scalar>& params,
                      const AdamState<Scalar>* adam = nullptr);

/// Reads into Scalar. A single-precision file widens exactly into double;
/// reading a double-precision file as single is rejected.
template <typename Scalar>
Checkpoint<Scalar> read_checkpoint(std::istream& is);

Precision read_checkpoint_precision(const std::filesystem::path& path);

template <typename Scalar>
void save_params(const ModelParams<Scalar>& params, const std::filesystem::path& path,
                 const AdamState<Scalar>* adam = nullptr);

template <typename Scalar>
Checkpoint<Scalar> load_checkpoint(const std::filesystem::path& path);

template <typename Scalar>
ModelParams<Scalar> load_params(const std::filesystem::path& path) {
    return load_checkpoint<Scalar>(path).params;
}

}  // namespace wavefdrc
