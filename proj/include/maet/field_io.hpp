#pragma once

#include <filesystem>

#include "maet/field.hpp"

namespace maet {

/// Binary field file: "MAETF1\0\0", u32 n, u8 parity per axis, one pad
/// byte, then n^3 little-endian float64 values in x-fastest order.
void write_field(const std::filesystem::path& path, const ScalarField3& f);
ScalarField3 read_field(const std::filesystem::path& path);

/// Writes `<stem>_x.bin`, `<stem>_y.bin`, `<stem>_z.bin` in `dir` and
/// returns the three paths.
std::array<std::filesystem::path, 3> write_vector_field(const std::filesystem::path& dir, const std::string& stem,
                                                        const VectorField3& v);
VectorField3 read_vector_field(const std::filesystem::path& dir, const std::string& stem);

}  // namespace maet
