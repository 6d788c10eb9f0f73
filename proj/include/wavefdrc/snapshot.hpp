#pragma once
/**
 * @file snapshot.hpp
 * @brief Binary field snapshots and their csv/pgm exports.
 *
 * Layout (all little-endian):
 *   "WFLD" | version u16 | nx u32 | ny u32 | n_channels u32 | step u64 |
 *   channel data, row-major per channel, in order u, v, p (, sigma).
 * Version 1 stores IEEE-754 single precision. Version 2 stores double
 * precision and is only written for double-precision training pool dumps.
 */

#include "wavefdrc/grid.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace wavefdrc {

enum class SnapshotPrecision : std::uint16_t { single = 1, double_ = 2 };

struct Snapshot {
    std::uint64_t step = 0;
    std::vector<FieldGrid> channels;  // u, v, p (, sigma)

    friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

Snapshot to_snapshot(const WaveState& state, const SigmaField* sigma = nullptr);
WaveState state_from_snapshot(const Snapshot& snap);

void write_snapshot(std::ostream& os, const Snapshot& snap,
                    SnapshotPrecision precision = SnapshotPrecision::single);
Snapshot read_snapshot(std::istream& is);

void save_snapshot(const std::filesystem::path& path, const Snapshot& snap,
                   SnapshotPrecision precision = SnapshotPrecision::single);
Snapshot load_snapshot(const std::filesystem::path& path);

/// One line per grid row i, values j = 0..ny-1 in shortest round-trip form.
void export_csv(const FieldGrid& field, std::ostream& os);

/// Binary P5 greyscale: clamp(round(128 + 127 * f / max|f|)), 128 for an all-zero field.
void export_pgm(const FieldGrid& field, std::ostream& os);

}  // namespace wavefdrc
