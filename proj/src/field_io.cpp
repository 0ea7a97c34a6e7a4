#include "maet/field_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "byte_order.hpp"

namespace maet {

namespace {
constexpr char kMagic[8] = {'M', 'A', 'E', 'T', 'F', '1', '\0', '\0'};
constexpr std::size_t kHeaderSize = 16;
}  // namespace

void write_field(const std::filesystem::path& path, const ScalarField3& f) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::Io, "cannot open " + path.string() + " for writing");
  unsigned char header[kHeaderSize] = {};
  std::memcpy(header, kMagic, 8);
  io::store_u32_le(header + 8, static_cast<std::uint32_t>(f.n()));
  for (int a = 0; a < 3; ++a) header[12 + a] = static_cast<unsigned char>(f.parity()[a]);
  out.write(reinterpret_cast<const char*>(header), kHeaderSize);
  io::write_f64_le(out, f.values());
  require(static_cast<bool>(out), ErrorCode::Io, "write failed for " + path.string());
}

ScalarField3 read_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::Io, "cannot open " + path.string());
  unsigned char header[kHeaderSize];
  in.read(reinterpret_cast<char*>(header), kHeaderSize);
  require(in.gcount() == static_cast<std::streamsize>(kHeaderSize) && std::memcmp(header, kMagic, 8) == 0,
          ErrorCode::Io, path.string() + " is not a field file");
  const std::uint32_t n = io::load_u32_le(header + 8);
  require(n >= 3 && n <= 4096, ErrorCode::Io, path.string() + ": implausible grid size");
  ParitySig p;
  for (int a = 0; a < 3; ++a) {
    require(header[12 + a] <= 1, ErrorCode::Io, path.string() + ": bad parity code");
    p[a] = static_cast<Parity>(header[12 + a]);
  }
  std::vector<double> values(static_cast<std::size_t>(n) * n * n);
  io::read_f64_le(in, values);
  require(static_cast<bool>(in), ErrorCode::Io, path.string() + ": truncated field data");
  ScalarField3 f(n, p, std::move(values));
  require(f.all_finite(), ErrorCode::Io, path.string() + ": non-finite values");
  return f;
}

std::array<std::filesystem::path, 3> write_vector_field(const std::filesystem::path& dir, const std::string& stem,
                                                        const VectorField3& v) {
  static constexpr const char* kSuffix[3] = {"_x.bin", "_y.bin", "_z.bin"};
  std::array<std::filesystem::path, 3> paths;
  for (int a = 0; a < 3; ++a) {
    paths[a] = dir / (stem + kSuffix[a]);
    write_field(paths[a], v[a]);
  }
  return paths;
}

VectorField3 read_vector_field(const std::filesystem::path& dir, const std::string& stem) {
  return VectorField3(read_field(dir / (stem + "_x.bin")), read_field(dir / (stem + "_y.bin")),
                      read_field(dir / (stem + "_z.bin")));
}

}  // namespace maet
