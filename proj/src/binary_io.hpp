#pragma once
// Little-endian primitives for the snapshot and checkpoint formats.

#include "wavefdrc/grid.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>

namespace wavefdrc::detail {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
T byteswap_if_big(T value) {
    if constexpr (std::endian::native == std::endian::little || sizeof(T) == 1) {
        return value;
    } else {
        unsigned char bytes[sizeof(T)];
        std::memcpy(bytes, &value, sizeof(T));
        for (std::size_t k = 0; k < sizeof(T) / 2; ++k) std::swap(bytes[k], bytes[sizeof(T) - 1 - k]);
        std::memcpy(&value, bytes, sizeof(T));
        return value;
    }
}

template <typename T>
void write_le(std::ostream& os, T value) {
    static_assert(std::is_arithmetic_v<T>);
    value = byteswap_if_big(value);
    os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

class ByteReader {
  public:
    ByteReader(std::istream& is, std::string format) : is_(is), format_(std::move(format)) {}

    template <typename T>
    T read(const char* field) {
        static_assert(std::is_arithmetic_v<T>);
        T value{};
        is_.read(reinterpret_cast<char*>(&value), sizeof(T));
        if (is_.gcount() != static_cast<std::streamsize>(sizeof(T)))
            throw Error(format_ + ": truncated while reading " + field);
        return byteswap_if_big(value);
    }

    void expect_magic(const char (&magic)[5]) {
        char got[4] = {};
        is_.read(got, 4);
        if (is_.gcount() != 4) throw Error(format_ + ": truncated while reading magic");
        if (std::memcmp(got, magic, 4) != 0)
            throw Error(format_ + ": bad magic (expected \"" + std::string(magic, 4) + "\")");
    }

    [[noreturn]] void fail(const std::string& msg) const { throw Error(format_ + ": " + msg); }

  private:
    std::istream& is_;
    std::string format_;
};

// Writes through a temporary file and renames it into place so that a failed
// write never leaves a partial file at `path`.
template <typename Fn>
void atomic_write(const std::filesystem::path& path, Fn&& write_body) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw Error("cannot open " + tmp.string() + " for writing");
        write_body(os);
        os.flush();
        if (!os) throw Error("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

inline std::ifstream open_for_reading(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open " + path.string() + " for reading");
    return is;
}

}  // namespace wavefdrc::detail
