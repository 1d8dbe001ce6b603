// Copyright 2026 The ppc-lidar Authors
// SPDX-License-Identifier: Apache-2.0
//
// Little-endian primitive encoding shared by the binary file formats.

#ifndef PPC_SRC_BINARY_IO_HPP_
#define PPC_SRC_BINARY_IO_HPP_

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <type_traits>

#include "ppc/common.hpp"

namespace ppc::detail {

template <typename T>
void put_le(std::ostream& os, T value) {
    static_assert(std::is_arithmetic_v<T>);
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                                 std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint16_t>>;
    const U bits = std::bit_cast<U>(value);
    std::array<char, sizeof(T)> bytes{};
    for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xFFu);
    os.write(bytes.data(), bytes.size());
}

template <typename T>
T get_le(std::istream& is) {
    static_assert(std::is_arithmetic_v<T>);
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                                 std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint16_t>>;
    std::array<unsigned char, sizeof(T)> bytes{};
    if (!is.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) throw IoError("unexpected end of file");
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<U>(bytes[i]) << (8 * i);
    return std::bit_cast<T>(bits);
}

inline std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
    return os;
}

inline std::ifstream open_for_read(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open '" + path.string() + "' for reading");
    return is;
}

inline void write_magic(std::ostream& os, std::string_view magic) { os.write(magic.data(), static_cast<std::streamsize>(magic.size())); }

inline std::string read_magic(std::istream& is) {
    std::string magic(8, '\0');
    if (!is.read(magic.data(), 8)) throw IoError("file too short for header");
    return magic;
}

inline void expect_magic(std::istream& is, std::string_view expected, const std::filesystem::path& path) {
    if (read_magic(is) != expected)
        throw IoError("'" + path.string() + "' is not a " + std::string(expected) + " file");
}

inline void finish_write(std::ofstream& os, const std::filesystem::path& path) {
    os.flush();
    if (!os) throw IoError("write to '" + path.string() + "' failed");
}

}  // namespace ppc::detail

#endif  // PPC_SRC_BINARY_IO_HPP_
