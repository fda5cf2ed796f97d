#pragma once

#include <utility>
#include <vector>

#include <Eigen/Core>

namespace atlas {

/// Cost used for pairs that must never be matched; assignments at or above it are dropped.
inline constexpr double kForbiddenCost = 1e12;

using Assignment = std::vector<std::pair<int, int>>;

/**
 * Minimum-cost assignment (Hungarian method with potentials, O(n^3)).
 *
 * Rectangular inputs are padded to square with a constant; padded pairs are
 * not reported. Pairs whose cost is >= kForbiddenCost are dropped as well.
 * Output is sorted by row. Throws ArgumentError on non-finite or negative costs.
 */
Assignment munkres_assign(const Eigen::MatrixXd& costs);

/// Sum of costs(r, c) over the assignment.
double assignment_cost(const Eigen::MatrixXd& costs, const Assignment& assignment);

}  // namespace atlas
