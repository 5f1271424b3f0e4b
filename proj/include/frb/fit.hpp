#pragma once

#include <string>
#include <vector>

#include "frb/engine.hpp"
#include "frb/superop.hpp"

namespace frb {

// Weighted least-squares fit of a single exponential decay a * r^m.
struct DecayFit {
  double a = 0.0, r = 0.0;
  double stderr_a = 0.0, stderr_r = 0.0;
  double cov_ar = 0.0;           // parameter covariance off-diagonal
  double residual_norm = 0.0;    // sqrt(chi^2) of weighted residuals
  int m_min = 0, m_max = 0;      // fitted window
  int n_points = 0;
  int iterations = 0;
  bool degenerate = false;       // flat / ill-conditioned problem
};

// Rate clamp: fits are constrained to r in (-1 - kFitRateSlack, 1 + kFitRateSlack).
inline constexpr double kFitRateSlack = 0.1;

// Fit on explicit points.  Weights are 1 / stderr^2; zero standard errors
// (exact data) fall back to the largest finite weight.  Needs at least three
// distinct m at or above m_min.  Initialization is linear in log space when
// enough points are positive, otherwise a grid scan over r.
DecayFit fit_decay(const std::vector<int>& ms, const VectorXd& values,
                   const VectorXd& stderrs, int m_min = 0);

// Fit one estimator column of a protocol dataset.
DecayFit fit_decay(const RBDataset& ds, const std::string& column, int m_min = 0);

}  // namespace frb
