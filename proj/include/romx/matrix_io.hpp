// ROMX1 dense matrix persistence.
//
// Layout: the 5 ASCII bytes "ROMX1", rows and cols as little-endian uint64,
// then rows*cols little-endian IEEE-754 doubles in column-major order.
#pragma once

#include "romx/core.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace romx {

std::vector<unsigned char> encode_romx(const Matrix& m);
Matrix decode_romx(const std::vector<unsigned char>& bytes);

void write_romx(const std::filesystem::path& path, const Matrix& m);
Matrix read_romx(const std::filesystem::path& path);

}  // namespace romx
