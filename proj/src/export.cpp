#include "maet/export.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>

#include <json.hpp>

namespace maet {

namespace {

void check_coordinate(double x, const char* what) {
  require(std::isfinite(x) && x >= 0.0 && x <= 1.0, ErrorCode::OutOfDomain,
          std::string(what) + ": coordinate outside [0, 1]");
}

void check_axis(int axis, const char* what) {
  require(axis >= 0 && axis < 3, ErrorCode::InvalidArgument, std::string(what) + ": axis must be 0, 1 or 2");
}

// Lower node index and weight of the upper node for coordinate x.
std::pair<std::size_t, double> locate(double x, std::size_t n) {
  const double s = x * static_cast<double>(n - 1);
  std::size_t i = static_cast<std::size_t>(std::floor(s));
  if (i >= n - 1) i = n - 2;
  return {i, s - static_cast<double>(i)};
}

double node(const ScalarField3& f, int axis_a, std::size_t ia, int axis_b, std::size_t ib, int axis_c,
            std::size_t ic) {
  std::size_t idx[3];
  idx[axis_a] = ia;
  idx[axis_b] = ib;
  idx[axis_c] = ic;
  return f(idx[0], idx[1], idx[2]);
}

void write_png(const std::filesystem::path& path, const std::vector<unsigned char>& pixels, std::size_t width,
               std::size_t height) {
  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "wb"), &std::fclose);
  require(fp != nullptr, ErrorCode::Io, "cannot open " + path.string() + " for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  require(png != nullptr, ErrorCode::Internal, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(ErrorCode::Io, "PNG encoding failed for " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::size_t r = 0; r < height; ++r)
    png_write_row(png, const_cast<png_bytep>(pixels.data() + r * width));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

std::vector<double> extract_slice(const ScalarField3& f, const SliceSpec& spec) {
  check_axis(spec.axis, "extract_slice");
  check_coordinate(spec.coordinate, "extract_slice");
  const std::size_t n = f.n();
  const int u = spec.axis == 0 ? 1 : 0;
  const int v = spec.axis == 2 ? 1 : 2;
  const auto [i0, w] = locate(spec.coordinate, n);
  std::vector<double> out(n * n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c)
      out[r * n + c] = (1.0 - w) * node(f, spec.axis, i0, u, c, v, r) + w * node(f, spec.axis, i0 + 1, u, c, v, r);
  return out;
}

void export_slice(const ScalarField3& f, const SliceSpec& spec, SliceFormat format, const std::filesystem::path& path) {
  const std::vector<double> vals = extract_slice(f, spec);
  const std::size_t n = f.n();
  const double h = f.spacing();
  if (format == SliceFormat::Csv) {
    std::ofstream out(path, std::ios::trunc);
    require(static_cast<bool>(out), ErrorCode::Io, "cannot open " + path.string() + " for writing");
    out.precision(17);
    out << "u,v,value\n";
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c)
        out << static_cast<double>(c) * h << ',' << static_cast<double>(r) * h << ',' << vals[r * n + c] << '\n';
    require(static_cast<bool>(out), ErrorCode::Io, "write failed for " + path.string());
    return;
  }

  const auto [mn, mx] = std::minmax_element(vals.begin(), vals.end());
  double lo = *mn, hi = *mx;
  if (spec.range) {
    lo = spec.range->first;
    hi = spec.range->second;
    require(hi > lo, ErrorCode::InvalidArgument, "export_slice: range must satisfy lo < hi");
  }
  std::vector<unsigned char> pixels(n * n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      const double x = vals[r * n + c];
      double t = hi > lo ? (x - lo) / (hi - lo) : 0.5;
      t = std::clamp(t, 0.0, 1.0);
      pixels[(n - 1 - r) * n + c] = static_cast<unsigned char>(std::lround(255.0 * t));
    }
  write_png(path, pixels, n, n);

  nlohmann::ordered_json j;
  j["axis"] = spec.axis;
  j["coordinate"] = spec.coordinate;
  j["width"] = n;
  j["height"] = n;
  j["horizontal_axis"] = spec.axis == 0 ? 1 : 0;
  j["vertical_axis"] = spec.axis == 2 ? 1 : 2;
  j["range"] = {lo, hi};
  j["slice_min"] = *mn;
  j["slice_max"] = *mx;
  std::ofstream side(path.string() + ".json", std::ios::trunc);
  require(static_cast<bool>(side), ErrorCode::Io, "cannot write slice sidecar for " + path.string());
  side << j.dump(2) << '\n';
}

std::vector<std::pair<double, double>> extract_profile(const ScalarField3& f, const LineSpec& spec) {
  check_axis(spec.axis, "extract_profile");
  check_coordinate(spec.fixed.first, "extract_profile");
  check_coordinate(spec.fixed.second, "extract_profile");
  const std::size_t n = f.n();
  const int p = spec.axis == 0 ? 1 : 0;
  const int q = spec.axis == 2 ? 1 : 2;
  const auto [ip, wp] = locate(spec.fixed.first, n);
  const auto [iq, wq] = locate(spec.fixed.second, n);
  std::vector<std::pair<double, double>> out(n);
  for (std::size_t s = 0; s < n; ++s) {
    const double v = (1 - wp) * (1 - wq) * node(f, spec.axis, s, p, ip, q, iq) +
                     wp * (1 - wq) * node(f, spec.axis, s, p, ip + 1, q, iq) +
                     (1 - wp) * wq * node(f, spec.axis, s, p, ip, q, iq + 1) +
                     wp * wq * node(f, spec.axis, s, p, ip + 1, q, iq + 1);
    out[s] = {static_cast<double>(s) * f.spacing(), v};
  }
  return out;
}

void export_profile(const ScalarField3& f, const LineSpec& spec, const std::filesystem::path& path) {
  const auto rows = extract_profile(f, spec);
  std::ofstream out(path, std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::Io, "cannot open " + path.string() + " for writing");
  out.precision(17);
  out << "x,value\n";
  for (const auto& [x, v] : rows) out << x << ',' << v << '\n';
  require(static_cast<bool>(out), ErrorCode::Io, "write failed for " + path.string());
}

}  // namespace maet
