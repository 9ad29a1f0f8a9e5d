#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vigrid/errors.hpp"

namespace vigrid {

/// Uniform axis: point(0) = lo, point(n-1) = hi.
struct AxisGrid {
  double lo = 0.0;
  double hi = 1.0;
  int n = 2;

  AxisGrid() = default;
  AxisGrid(double lo, double hi, int n);

  double spacing() const { return (hi - lo) / static_cast<double>(n - 1); }
  double point(int i) const {
    return i == n - 1 ? hi : lo + spacing() * static_cast<double>(i);
  }
};

/// Cartesian product of axis grids with row-major (last axis fastest)
/// flattening, plus multilinear interpolation over flattened tables.
class StateGrid {
 public:
  explicit StateGrid(std::vector<AxisGrid> axes);

  const std::vector<AxisGrid>& axes() const { return axes_; }
  std::size_t dim() const { return axes_.size(); }
  std::size_t size() const { return size_; }

  std::size_t index_of(std::span<const int> coords) const;
  void coords_of(std::size_t index, std::span<int> coords) const;
  void point_of(std::size_t index, std::span<double> x) const;

  bool contains(std::span<const double> x) const;
  /// Sum of per-axis distances outside the box; 0 inside.
  double box_distance(std::span<const double> x) const;

  /// Multilinear interpolation; the query must lie inside the grid box
  /// (callers handle out-of-grid policy). Cell indices clamp at the upper
  /// boundary so x == hi is valid.
  double interpolate(std::span<const double> table, std::span<const double> x) const;

  /// Interpolation that drops corners whose mask entry is false and
  /// renormalizes the remaining weights; falls back to plain multilinear when
  /// every corner is masked out.
  double interpolate_masked(std::span<const double> table,
                            std::span<const char> corner_ok,
                            std::span<const double> x) const;

 private:
  struct CellLocator {
    int base[8];
    double frac[8];
  };
  void locate(std::span<const double> x, int* base, double* frac) const;

  std::vector<AxisGrid> axes_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 1;
};

}  // namespace vigrid
