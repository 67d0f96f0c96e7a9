#include "varan/grids.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace varan {

std::vector<Vec> probe_directions(int n) {
  std::vector<Vec> out;
  for (int i = 0; i < n; ++i) {
    for (double s : {1.0, -1.0}) {
      Vec d = Vec::Zero(n);
      d[i] = s;
      out.push_back(d);
    }
  }
  const double r = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      for (double si : {1.0, -1.0}) {
        for (double sj : {1.0, -1.0}) {
          Vec d = Vec::Zero(n);
          d[i] = si * r;
          d[j] = sj * r;
          out.push_back(d);
        }
      }
    }
  }
  return out;
}

std::vector<Vec> sphere_grid(int n, int count) {
  std::vector<Vec> out;
  if (n == 1) {
    out.push_back(Vec::Constant(1, 1.0));
    out.push_back(Vec::Constant(1, -1.0));
    return out;
  }
  if (n == 2) {
    const int m = std::max(4, count + (count % 2));
    for (int k = 0; k < m; ++k) {
      const double a = 2.0 * std::numbers::pi * k / m;
      Vec d(2);
      d << std::cos(a), std::sin(a);
      // exact zeros keep axis directions on the axes
      for (Eigen::Index i = 0; i < 2; ++i) {
        if (std::abs(d[i]) < 1e-15) d[i] = 0.0;
      }
      out.push_back(d);
    }
    return out;
  }
  out = probe_directions(n);
  std::mt19937_64 rng(0x5eed + n);
  std::normal_distribution<double> normal(0.0, 1.0);
  while (static_cast<int>(out.size()) < count) {
    Vec d(n);
    for (int i = 0; i < n; ++i) d[i] = normal(rng);
    d.normalize();
    out.push_back(d);
    out.push_back(-d);
  }
  return out;
}

std::vector<Vec> shell_offsets(int n, int count) {
  if (n != 1) return sphere_grid(n, count);
  std::vector<Vec> out;
  const int half = std::max(1, count / 2);
  for (int k = 0; k < half; ++k) {
    const double r = 1.0 + static_cast<double>(k) / half;
    out.push_back(Vec::Constant(1, r));
    out.push_back(Vec::Constant(1, -r));
  }
  return out;
}

TensorGrid::TensorGrid(const Box& box, int per_axis)
    : box_(box), per_axis_(std::max(2, per_axis)) {
  const int n = box.dim();
  total_ = 1;
  for (int i = 0; i < n; ++i) total_ *= static_cast<std::size_t>(per_axis_);
  step_ = (box.hi - box.lo) / static_cast<double>(per_axis_ - 1);
}

std::vector<int> TensorGrid::coords(std::size_t index) const {
  const int n = box_.dim();
  std::vector<int> c(n);
  for (int i = 0; i < n; ++i) {
    c[i] = static_cast<int>(index % per_axis_);
    index /= per_axis_;
  }
  return c;
}

std::size_t TensorGrid::flat(const std::vector<int>& c) const {
  std::size_t index = 0;
  for (int i = static_cast<int>(c.size()) - 1; i >= 0; --i) {
    index = index * per_axis_ + static_cast<std::size_t>(c[i]);
  }
  return index;
}

Vec TensorGrid::point(std::size_t index) const {
  const int n = box_.dim();
  Vec x(n);
  for (int i = 0; i < n; ++i) {
    const int c = static_cast<int>(index % per_axis_);
    index /= per_axis_;
    // endpoints exact, interior by affine map
    x[i] = (c == per_axis_ - 1) ? box_.hi[i] : box_.lo[i] + c * step_[i];
  }
  return x;
}

std::vector<Vec> ball_grid(const Vec& center, double radius, int per_axis) {
  TensorGrid grid(Box::around(center, radius), per_axis);
  std::vector<Vec> out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    Vec p = grid.point(i);
    if ((p - center).norm() <= radius * (1.0 + 1e-12)) out.push_back(std::move(p));
  }
  return out;
}

}  // namespace varan
