#include "varan/minimize.hpp"

#include "varan/grids.hpp"
#include "varan/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace varan {
namespace {

double safe_value(const Objective& obj, const Box& feasible, const Vec& x) {
  if (!feasible.contains(x, 0.0)) return kInf;
  return obj.value(x);
}

bool lex_less(const Vec& a, const Vec& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(),
                                      b.data() + b.size());
}

}  // namespace

RefineResult pattern_refine(const Objective& obj, const Vec& start, double step0,
                            double min_step, const Box& feasible, bool polish) {
  RefineResult r;
  r.x = start;
  r.value = safe_value(obj, feasible, start);
  const auto dirs = probe_directions(static_cast<int>(start.size()));
  double step = std::max(step0, min_step);
  const double step_cap = step * 1024.0;
  int streak = 0;
  while (step >= min_step) {
    double best = r.value;
    Vec best_x = r.x;
    for (const Vec& d : dirs) {
      const Vec y = r.x + step * d;
      const double fy = safe_value(obj, feasible, y);
      if (fy < best) {
        best = fy;
        best_x = y;
      }
    }
    if (best < r.value) {
      r.x = best_x;
      r.value = best;
      if (++streak >= 3 && step * 2 <= step_cap) {
        step *= 2;
        streak = 0;
      }
    } else {
      step *= 0.5;
      ++r.halvings;
      streak = 0;
    }
  }
  if (polish && obj.gradient && obj.hessian && std::isfinite(r.value)) {
    for (int it = 0; it < 8; ++it) {
      const Vec g = obj.gradient(r.x);
      const Mat H = obj.hessian(r.x);
      Eigen::LLT<Mat> llt(0.5 * (H + H.transpose()));
      if (llt.info() != Eigen::Success) break;
      const Vec dx = llt.solve(-g);
      if (!dx.allFinite() || dx.norm() > std::max(1e-6, 100 * min_step)) break;
      const Vec y = r.x + dx;
      const double fy = safe_value(obj, feasible, y);
      const double slack = 4e-16 * std::max(1.0, std::abs(r.value));
      if (!(fy <= r.value + slack) || obj.gradient(y).norm() > g.norm()) break;
      r.x = y;
      r.value = std::min(fy, r.value);
      if (dx.norm() <= 1e-16 * std::max(1.0, r.x.norm())) break;
    }
  }
  return r;
}

GridMinResult grid_minimize(const Objective& obj, const Box& search,
                            const Box& feasible, const MinimizeConfig& cfg,
                            const std::vector<Vec>& extra_starts) {
  const int n = search.dim();
  int G = cfg.grid_points;
  if (std::pow(static_cast<double>(G), n) > static_cast<double>(cfg.max_grid_total)) {
    G = static_cast<int>(std::floor(std::pow(static_cast<double>(cfg.max_grid_total), 1.0 / n)));
  }
  if (G % 2 == 0) --G;
  G = std::max(G, 3);
  const TensorGrid grid(search, G);
  std::vector<double> values(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    values[i] = safe_value(obj, feasible, grid.point(i));
  });

  GridMinResult out;
  out.grid_points = G;
  out.grid_step = grid.step().maxCoeff();
  out.face_lo.assign(n, 0);
  out.face_hi.assign(n, 0);

  std::size_t best = grid.size();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (std::isfinite(values[i]) && (best == grid.size() || values[i] < values[best])) best = i;
  }
  std::vector<std::pair<Vec, double>> found;
  for (const Vec& s : extra_starts) {
    found.emplace_back(s, safe_value(obj, feasible, s));
  }
  if (best == grid.size()) {
    out.all_infinite = true;
  } else {
    const auto bc = grid.coords(best);
    for (int d = 0; d < n; ++d) {
      out.face_lo[d] = bc[d] == 0;
      out.face_hi[d] = bc[d] == G - 1;
    }
    auto neighbours = [&](std::size_t i) {
      std::vector<std::size_t> nb;
      auto c = grid.coords(i);
      for (int d = 0; d < n; ++d) {
        for (int s : {-1, 1}) {
          const int cd = c[d] + s;
          if (cd < 0 || cd >= G) continue;
          auto cc = c;
          cc[d] = cd;
          nb.push_back(grid.flat(cc));
        }
      }
      return nb;
    };
    double spread = 0.0;
    for (std::size_t j : neighbours(best)) {
      if (std::isfinite(values[j])) spread = std::max(spread, values[j] - values[best]);
    }
    const double window = std::max(cfg.multistart_tol, 4.0 * spread);
    std::vector<std::size_t> cand;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (!std::isfinite(values[i]) || values[i] > values[best] + window) continue;
      bool local = true;
      for (std::size_t j : neighbours(i)) {
        if (values[j] < values[i]) {
          local = false;
          break;
        }
      }
      if (local) cand.push_back(i);
    }
    std::stable_sort(cand.begin(), cand.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    if (static_cast<int>(cand.size()) > cfg.max_starts) cand.resize(cfg.max_starts);
    out.starts = static_cast<int>(cand.size());
    std::vector<RefineResult> refined(cand.size());
    parallel_for(cand.size(), [&](std::size_t k) {
      refined[k] = pattern_refine(obj, grid.point(cand[k]), out.grid_step, cfg.refine_step,
                                  feasible, cfg.polish);
    });
    std::stable_sort(refined.begin(), refined.end(),
                     [](const RefineResult& a, const RefineResult& b) { return a.value < b.value; });
    for (const auto& r : refined) {
      out.halvings = std::max(out.halvings, r.halvings);
      found.emplace_back(r.x, r.value);
    }
  }

  double best_value = kInf;
  for (const auto& [x, v] : found) best_value = std::min(best_value, v);
  out.value = best_value;
  if (!std::isfinite(best_value)) return out;
  for (const auto& [x, v] : found) {
    if (v > best_value + cfg.value_tol) continue;
    bool distinct = true;
    for (const Vec& k : out.minimizers) {
      if ((k - x).norm() <= cfg.dedup_radius) {
        distinct = false;
        break;
      }
    }
    if (distinct) out.minimizers.push_back(x);
  }
  std::sort(out.minimizers.begin(), out.minimizers.end(), lex_less);
  return out;
}

}  // namespace varan
