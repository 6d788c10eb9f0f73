#include "wavefdrc/snapshot.hpp"

#include "binary_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

namespace wavefdrc {

using detail::ByteReader;
using detail::write_le;

namespace {
constexpr char kMagic[5] = "WFLD";
constexpr std::uint32_t kMaxChannels = 64;
}  // namespace

Snapshot to_snapshot(const WaveState& state, const SigmaField* sigma) {
    if (!state.consistent()) throw Error("to_snapshot: inconsistent state");
    Snapshot snap;
    snap.step = static_cast<std::uint64_t>(state.step);
    snap.channels = {state.u, state.v, state.p};
    if (sigma) {
        if (!sigma->sigma.same_shape(state.p)) throw Error("to_snapshot: sigma shape mismatch");
        snap.channels.push_back(sigma->sigma);
    }
    return snap;
}

WaveState state_from_snapshot(const Snapshot& snap) {
    if (snap.channels.size() < 3) throw Error("snapshot: need at least the u, v, p channels");
    WaveState s{snap.channels[0], snap.channels[1], snap.channels[2],
                static_cast<std::int64_t>(snap.step)};
    if (!s.consistent()) throw Error("snapshot: channel shapes disagree");
    return s;
}

void write_snapshot(std::ostream& os, const Snapshot& snap, SnapshotPrecision precision) {
    if (snap.channels.empty()) throw Error("write_snapshot: no channels");
    const auto& first = snap.channels.front();
    for (const auto& c : snap.channels)
        if (!c.same_shape(first)) throw Error("write_snapshot: channel shapes disagree");

    os.write(kMagic, 4);
    write_le<std::uint16_t>(os, static_cast<std::uint16_t>(precision));
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(first.nx()));
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(first.ny()));
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(snap.channels.size()));
    write_le<std::uint64_t>(os, snap.step);
    for (const auto& c : snap.channels) {
        for (double x : c.values()) {
            if (precision == SnapshotPrecision::single)
                write_le<float>(os, static_cast<float>(x));
            else
                write_le<double>(os, x);
        }
    }
    if (!os) throw Error("write_snapshot: stream error");
}

Snapshot read_snapshot(std::istream& is) {
    ByteReader in(is, "WFLD snapshot");
    in.expect_magic(kMagic);
    const auto version = in.read<std::uint16_t>("version");
    if (version != static_cast<std::uint16_t>(SnapshotPrecision::single) &&
        version != static_cast<std::uint16_t>(SnapshotPrecision::double_))
        in.fail("unsupported version " + std::to_string(version));
    const auto nx = in.read<std::uint32_t>("nx");
    const auto ny = in.read<std::uint32_t>("ny");
    const auto channels = in.read<std::uint32_t>("n_channels");
    if (nx == 0 || ny == 0 || nx > (1u << 16) || ny > (1u << 16)) in.fail("implausible grid size nx/ny");
    if (channels == 0 || channels > kMaxChannels) in.fail("implausible n_channels " + std::to_string(channels));

    Snapshot snap;
    snap.step = in.read<std::uint64_t>("step");
    snap.channels.reserve(channels);
    for (std::uint32_t c = 0; c < channels; ++c) {
        FieldGrid f(static_cast<int>(nx), static_cast<int>(ny));
        const std::string field = "channel " + std::to_string(c) + " data";
        for (double& x : f.values())
            x = version == 1 ? static_cast<double>(in.read<float>(field.c_str())) : in.read<double>(field.c_str());
        snap.channels.push_back(std::move(f));
    }
    return snap;
}

void save_snapshot(const std::filesystem::path& path, const Snapshot& snap, SnapshotPrecision precision) {
    detail::atomic_write(path, [&](std::ostream& os) { write_snapshot(os, snap, precision); });
}

Snapshot load_snapshot(const std::filesystem::path& path) {
    auto is = detail::open_for_reading(path);
    try {
        return read_snapshot(is);
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

void export_csv(const FieldGrid& field, std::ostream& os) {
    char buf[64];
    for (int i = 0; i < field.nx(); ++i) {
        for (int j = 0; j < field.ny(); ++j) {
            if (j) os.put(',');
            const auto r = std::to_chars(buf, buf + sizeof(buf), field(i, j));
            os.write(buf, r.ptr - buf);
        }
        os.put('\n');
    }
}

void export_pgm(const FieldGrid& field, std::ostream& os) {
    const double peak = field.max_abs();
    os << "P5\n" << field.ny() << ' ' << field.nx() << "\n255\n";
    for (int i = 0; i < field.nx(); ++i) {
        for (int j = 0; j < field.ny(); ++j) {
            double g = 128.0;
            if (peak > 0.0) g = std::round(128.0 + 127.0 * field(i, j) / peak);
            os.put(static_cast<char>(static_cast<unsigned char>(std::clamp(g, 0.0, 255.0))));
        }
    }
}

}  // namespace wavefdrc
