#pragma once

#include "varan/types.hpp"

#include <functional>
#include <vector>

namespace varan {

/// Objective for the grid + pattern-search minimizer. Gradient and Hessian
/// are optional; when both are present a guarded Newton polish runs after the
/// pattern search.
struct Objective {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  std::function<Mat(const Vec&)> hessian;
};

struct MinimizeConfig {
  int grid_points = 401;
  std::size_t max_grid_total = 170000;
  double refine_step = 1e-10;
  double multistart_tol = 1e-6;
  double value_tol = 1e-8;
  double dedup_radius = 1e-5;
  int max_starts = 8;
  bool polish = true;
};

struct GridMinResult {
  std::vector<Vec> minimizers;  // sorted lexicographically
  double value = kInf;
  double grid_step = 0.0;
  int grid_points = 0;
  int starts = 0;
  int halvings = 0;
  /// Best grid point lies on the lower/upper face of the search box, per axis.
  std::vector<int> face_lo;
  std::vector<int> face_hi;
  bool all_infinite = false;
};

/// Grid scan of `search` followed by pattern-search refinement inside
/// `feasible`. Extra starts are evaluated as given and preferred on ties.
GridMinResult grid_minimize(const Objective& obj, const Box& search,
                            const Box& feasible, const MinimizeConfig& cfg,
                            const std::vector<Vec>& extra_starts = {});

struct RefineResult {
  Vec x;
  double value = kInf;
  int halvings = 0;
};

/// Pattern search from `start` with initial step `step0` down to `min_step`.
RefineResult pattern_refine(const Objective& obj, const Vec& start, double step0,
                            double min_step, const Box& feasible, bool polish);

}  // namespace varan
