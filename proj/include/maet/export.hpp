#pragma once

#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

#include "maet/field.hpp"

namespace maet {

enum class SliceFormat { Png, Csv };

struct SliceSpec {
  int axis = 2;             // plane x_axis = coordinate
  double coordinate = 0.5;  // in [0, 1]; linear interpolation between node planes
  /// Gray-scale range for PNG output; the slice min/max when unset.
  std::optional<std::pair<double, double>> range;
};

/// Values of the plane as a row-major (n x n) table: the higher in-plane
/// axis selects the row, the lower one the column.
std::vector<double> extract_slice(const ScalarField3& f, const SliceSpec& spec);

/// PNG: 8-bit gray, value lo maps to 0 and hi to 255, row 0 of the image at
/// the largest coordinate of the vertical axis. A sidecar `<path>.json`
/// records the plane and range. CSV: rows "u,v,value".
void export_slice(const ScalarField3& f, const SliceSpec& spec, SliceFormat format, const std::filesystem::path& path);

struct LineSpec {
  int axis = 1;  // the line runs along x_axis
  /// Fixed coordinates of the two remaining axes, lower axis first.
  std::pair<double, double> fixed{0.25, 0.5};
};

/// (coordinate, value) at every node along the line, bilinear across the
/// fixed axes.
std::vector<std::pair<double, double>> extract_profile(const ScalarField3& f, const LineSpec& spec);

/// CSV with header "x,value".
void export_profile(const ScalarField3& f, const LineSpec& spec, const std::filesystem::path& path);

}  // namespace maet
