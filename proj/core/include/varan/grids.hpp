#pragma once

#include "varan/types.hpp"

#include <cstddef>
#include <vector>

namespace varan {

/// ±e_i and ±(e_i ± e_j)/√2.
std::vector<Vec> probe_directions(int n);

/// Antipodally symmetric unit directions. n = 1 gives {1, -1}; n = 2 gives
/// `count` equally spaced angles starting on the first axis; n >= 3 gives the
/// probe directions padded with seeded random pairs up to `count`.
std::vector<Vec> sphere_grid(int n, int count);

/// Offsets of norm in [1, 2) used to populate one sampling shell. In 1D the
/// count is spread over radii on both sides; otherwise it is sphere_grid.
std::vector<Vec> shell_offsets(int n, int count);

/// Regular grid with `per_axis` points per coordinate over a box.
class TensorGrid {
 public:
  TensorGrid(const Box& box, int per_axis);
  std::size_t size() const { return total_; }
  int per_axis() const { return per_axis_; }
  Vec step() const { return step_; }
  Vec point(std::size_t index) const;
  /// Multi-index of a flat index.
  std::vector<int> coords(std::size_t index) const;
  std::size_t flat(const std::vector<int>& coords) const;

 private:
  Box box_;
  int per_axis_;
  std::size_t total_;
  Vec step_;
};

/// Grid points within a Euclidean ball.
std::vector<Vec> ball_grid(const Vec& center, double radius, int per_axis);

}  // namespace varan
