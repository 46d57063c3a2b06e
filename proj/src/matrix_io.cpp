#include "romx/matrix_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace romx {
namespace {

constexpr char kMagic[5] = {'R', 'O', 'M', 'X', '1'};
constexpr std::size_t kHeader = 5 + 8 + 8;

void put_u64(std::vector<unsigned char>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

}  // namespace

std::vector<unsigned char> encode_romx(const Matrix& m) {
  std::vector<unsigned char> out;
  out.reserve(kHeader + 8 * static_cast<std::size_t>(m.size()));
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_u64(out, static_cast<std::uint64_t>(m.rows()));
  put_u64(out, static_cast<std::uint64_t>(m.cols()));
  // Eigen's default storage is column-major, matching the file layout.
  for (Index i = 0; i < m.size(); ++i) {
    put_u64(out, std::bit_cast<std::uint64_t>(m.data()[i]));
  }
  return out;
}

Matrix decode_romx(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < kHeader || std::memcmp(bytes.data(), kMagic, 5) != 0) {
    throw IoError("not a ROMX1 matrix (bad magic or truncated header)");
  }
  const std::uint64_t rows = get_u64(bytes.data() + 5);
  const std::uint64_t cols = get_u64(bytes.data() + 13);
  if (cols != 0 && rows > (bytes.size() - kHeader) / 8 / cols) {
    throw IoError("ROMX1 payload shorter than declared shape");
  }
  if (bytes.size() != kHeader + 8 * rows * cols) {
    throw IoError("ROMX1 payload size does not match declared shape");
  }
  Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  const unsigned char* p = bytes.data() + kHeader;
  for (Index i = 0; i < m.size(); ++i, p += 8) {
    m.data()[i] = std::bit_cast<double>(get_u64(p));
  }
  return m;
}

void write_romx(const std::filesystem::path& path, const Matrix& m) {
  const auto bytes = encode_romx(m);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

Matrix read_romx(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  try {
    return decode_romx(bytes);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace romx
