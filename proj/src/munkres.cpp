#include "atlas/munkres.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "atlas/errors.hpp"

namespace atlas {

Assignment munkres_assign(const Eigen::MatrixXd& costs) {
  const auto rows = static_cast<int>(costs.rows());
  const auto cols = static_cast<int>(costs.cols());
  if (rows == 0 || cols == 0) return {};
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double v = costs(r, c);
      if (!std::isfinite(v) || v < 0.0) {
        throw ArgumentError(fmt::format("munkres_assign: cost({}, {}) = {} is not a finite non-negative value", r, c, v));
      }
    }
  }

  // Padding cells share one constant, so every perfect matching pays the
  // same padding total and the optimum on the real cells is unchanged.
  const int n = std::max(rows, cols);
  const double pad = 0.0;
  auto cost = [&](int r, int c) { return (r < rows && c < cols) ? costs(r, c) : pad; };

  // 1-based potentials formulation; p[j] is the row matched to column j.
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  Assignment out;
  for (int j = 1; j <= n; ++j) {
    const int r = p[j] - 1;
    const int c = j - 1;
    if (r < rows && c < cols && costs(r, c) < kForbiddenCost) out.emplace_back(r, c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

double assignment_cost(const Eigen::MatrixXd& costs, const Assignment& assignment) {
  double total = 0.0;
  for (const auto& [r, c] : assignment) total += costs(r, c);
  return total;
}

}  // namespace atlas
