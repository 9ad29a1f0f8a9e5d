#include "vigrid/grid.hpp"

#include <algorithm>
#include <cmath>

namespace vigrid {

AxisGrid::AxisGrid(double lo, double hi, int n) : lo(lo), hi(hi), n(n) {
  if (n < 2) throw ValidationError("axis grid needs at least 2 points");
  if (!(lo < hi)) throw ValidationError("axis grid needs lo < hi");
}

StateGrid::StateGrid(std::vector<AxisGrid> axes) : axes_(std::move(axes)) {
  if (axes_.empty()) throw ValidationError("state grid needs at least one axis");
  if (axes_.size() > 8) throw ValidationError("state grid supports up to 8 axes");
  strides_.assign(axes_.size(), 1);
  for (int d = static_cast<int>(axes_.size()) - 2; d >= 0; --d) {
    strides_[d] = strides_[d + 1] * static_cast<std::size_t>(axes_[d + 1].n);
  }
  for (const AxisGrid& a : axes_) size_ *= static_cast<std::size_t>(a.n);
}

std::size_t StateGrid::index_of(std::span<const int> coords) const {
  std::size_t idx = 0;
  for (std::size_t d = 0; d < axes_.size(); ++d) {
    idx += strides_[d] * static_cast<std::size_t>(coords[d]);
  }
  return idx;
}

void StateGrid::coords_of(std::size_t index, std::span<int> coords) const {
  for (std::size_t d = 0; d < axes_.size(); ++d) {
    coords[d] = static_cast<int>(index / strides_[d]);
    index %= strides_[d];
  }
}

void StateGrid::point_of(std::size_t index, std::span<double> x) const {
  for (std::size_t d = 0; d < axes_.size(); ++d) {
    const int c = static_cast<int>(index / strides_[d]);
    index %= strides_[d];
    x[d] = axes_[d].point(c);
  }
}

bool StateGrid::contains(std::span<const double> x) const {
  for (std::size_t d = 0; d < axes_.size(); ++d) {
    if (x[d] < axes_[d].lo || x[d] > axes_[d].hi) return false;
  }
  return true;
}

double StateGrid::box_distance(std::span<const double> x) const {
  double dist = 0.0;
  for (std::size_t d = 0; d < axes_.size(); ++d) {
    dist += std::max(axes_[d].lo - x[d], 0.0) + std::max(x[d] - axes_[d].hi, 0.0);
  }
  return dist;
}

void StateGrid::locate(std::span<const double> x, int* base, double* frac) const {
  for (std::size_t d = 0; d < axes_.size(); ++d) {
    const AxisGrid& a = axes_[d];
    double pos = (x[d] - a.lo) / a.spacing();
    pos = std::clamp(pos, 0.0, static_cast<double>(a.n - 1));
    int i0 = std::min(static_cast<int>(pos), a.n - 2);
    base[d] = i0;
    frac[d] = pos - static_cast<double>(i0);
  }
}

double StateGrid::interpolate(std::span<const double> table,
                              std::span<const double> x) const {
  int base[8];
  double frac[8];
  locate(x, base, frac);
  const std::size_t d = axes_.size();
  const std::size_t corners = std::size_t{1} << d;
  double value = 0.0;
  for (std::size_t c = 0; c < corners; ++c) {
    double w = 1.0;
    std::size_t idx = 0;
    for (std::size_t k = 0; k < d; ++k) {
      const bool hi = (c >> k) & 1u;
      w *= hi ? frac[k] : 1.0 - frac[k];
      idx += strides_[k] * static_cast<std::size_t>(base[k] + (hi ? 1 : 0));
    }
    if (w != 0.0) value += w * table[idx];
  }
  return value;
}

double StateGrid::interpolate_masked(std::span<const double> table,
                                     std::span<const char> corner_ok,
                                     std::span<const double> x) const {
  int base[8];
  double frac[8];
  locate(x, base, frac);
  const std::size_t d = axes_.size();
  const std::size_t corners = std::size_t{1} << d;
  double value = 0.0;
  double wsum = 0.0;
  double plain = 0.0;
  for (std::size_t c = 0; c < corners; ++c) {
    double w = 1.0;
    std::size_t idx = 0;
    for (std::size_t k = 0; k < d; ++k) {
      const bool hi = (c >> k) & 1u;
      w *= hi ? frac[k] : 1.0 - frac[k];
      idx += strides_[k] * static_cast<std::size_t>(base[k] + (hi ? 1 : 0));
    }
    if (w == 0.0) continue;
    plain += w * table[idx];
    if (corner_ok[idx]) {
      value += w * table[idx];
      wsum += w;
    }
  }
  if (wsum <= 0.0) return plain;
  return value / wsum;
}

}  // namespace vigrid
