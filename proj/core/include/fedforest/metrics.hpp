#pragma once

#include <span>

namespace fedforest {

// Mean squared error. Sizes must match and be nonzero.
double mse(std::span<const double> predicted, std::span<const double> actual);

// Coefficient of determination, 1 - SSE/SST. A constant actual vector
// has SST = 0; then the result is 1 when SSE = 0 and 0 otherwise.
double r_squared(std::span<const double> predicted, std::span<const double> actual);

// Fraction of exact label matches (labels compared after rounding).
double accuracy(std::span<const double> predicted, std::span<const double> actual);

// Area under the ROC curve from scores and binary labels (0/1), computed
// by the rank-sum formula with midranks, so ties contribute 1/2. Returns
// 0.5 when a class is absent.
double auc(std::span<const double> scores, std::span<const double> labels);

}  // namespace fedforest
