#include "frb/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <Eigen/Dense>

#include "frb/errors.hpp"

namespace frb {

namespace {

constexpr double kRateLo = -1.0 - kFitRateSlack;
constexpr double kRateHi = 1.0 + kFitRateSlack;

double clamp_rate(double r) {
  const double eps = 1e-9;
  return std::min(kRateHi - eps, std::max(kRateLo + eps, r));
}

double chi2_of(const std::vector<int>& ms, const VectorXd& y, const VectorXd& w,
               double a, double r) {
  double c = 0.0;
  for (size_t i = 0; i < ms.size(); ++i) {
    double res = y[Index(i)] - a * std::pow(r, ms[i]);
    c += w[Index(i)] * res * res;
  }
  return c;
}

// Closed-form amplitude minimizing chi^2 at fixed rate.
double best_amp(const std::vector<int>& ms, const VectorXd& y, const VectorXd& w,
                double r) {
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < ms.size(); ++i) {
    double rm = std::pow(r, ms[i]);
    num += w[Index(i)] * y[Index(i)] * rm;
    den += w[Index(i)] * rm * rm;
  }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace

DecayFit fit_decay(const std::vector<int>& ms, const VectorXd& values,
                   const VectorXd& stderrs, int m_min) {
  if (Index(ms.size()) != values.size() || values.size() != stderrs.size())
    throw std::invalid_argument("fit_decay: mismatched input lengths");

  // Restrict to the window and require three distinct sequence lengths.
  std::vector<int> m_;
  std::vector<double> y_, s_;
  for (size_t i = 0; i < ms.size(); ++i)
    if (ms[i] >= m_min) {
      m_.push_back(ms[i]);
      y_.push_back(values[Index(i)]);
      s_.push_back(stderrs[Index(i)]);
    }
  if (std::set<int>(m_.begin(), m_.end()).size() < 3)
    throw std::invalid_argument("fit_decay: need at least three distinct m >= m_min");
  const Index n = Index(m_.size());
  VectorXd y(n), w(n);
  for (Index i = 0; i < n; ++i) y[i] = y_[size_t(i)];
  double wmax = 0.0;
  for (Index i = 0; i < n; ++i) {
    w[i] = s_[size_t(i)] > 0.0 ? 1.0 / (s_[size_t(i)] * s_[size_t(i)]) : 0.0;
    wmax = std::max(wmax, w[i]);
  }
  if (wmax == 0.0) wmax = 1.0;
  for (Index i = 0; i < n; ++i)
    if (w[i] == 0.0) w[i] = wmax;  // exact points get the sharpest weight

  DecayFit fit;
  fit.n_points = int(n);
  fit.m_min = *std::min_element(m_.begin(), m_.end());
  fit.m_max = *std::max_element(m_.begin(), m_.end());

  // Init: weighted line in (m, log y) over the positive points; fall back to
  // a rate grid when the signal is not positive enough for logs.
  double a0 = 0.0, r0 = 0.0;
  {
    double sw = 0, sm = 0, sl = 0, smm = 0, sml = 0;
    Index pos = 0;
    for (Index i = 0; i < n; ++i) {
      if (y[i] <= 0.0) continue;
      // delta method: var(log y) = var(y) / y^2
      double wi = w[i] * y[i] * y[i], li = std::log(y[i]), mi = m_[size_t(i)];
      sw += wi;
      sm += wi * mi;
      sl += wi * li;
      smm += wi * mi * mi;
      sml += wi * mi * li;
      ++pos;
    }
    double det = sw * smm - sm * sm;
    if (pos >= 2 && std::abs(det) > 1e-300) {
      double slope = (sw * sml - sm * sl) / det;
      double icept = (smm * sl - sm * sml) / det;
      r0 = clamp_rate(std::exp(slope));
      a0 = std::exp(icept);
    } else {
      double best = std::numeric_limits<double>::infinity();
      for (double r = -0.99; r <= 0.995; r += 0.01) {
        double a = best_amp(m_, y, w, r);
        double c = chi2_of(m_, y, w, a, r);
        if (c < best) {
          best = c;
          a0 = a;
          r0 = r;
        }
      }
    }
  }

  // Gauss-Newton with step halving on the two-parameter residual.
  double a = a0, r = r0;
  double chi = chi2_of(m_, y, w, a, r);
  Eigen::Matrix2d jtj = Eigen::Matrix2d::Zero();
  for (int it = 0; it < 200; ++it) {
    jtj.setZero();
    Eigen::Vector2d jtr = Eigen::Vector2d::Zero();
    for (Index i = 0; i < n; ++i) {
      const int mi = m_[size_t(i)];
      const double rm = std::pow(r, mi);
      const double ja = rm;
      const double jr = mi == 0 ? 0.0 : a * mi * std::pow(r, mi - 1);
      const double res = y[i] - a * rm;
      jtj(0, 0) += w[i] * ja * ja;
      jtj(0, 1) += w[i] * ja * jr;
      jtj(1, 1) += w[i] * jr * jr;
      jtr[0] += w[i] * ja * res;
      jtr[1] += w[i] * jr * res;
    }
    jtj(1, 0) = jtj(0, 1);
    fit.iterations = it + 1;
    if (std::abs(jtj.determinant()) < 1e-14 * std::max(1.0, jtj(0, 0) * jtj(1, 1))) {
      fit.degenerate = true;
      break;
    }
    Eigen::Vector2d step = jtj.ldlt().solve(jtr);
    double scale = 1.0;
    double na = a, nr = r, nchi = chi;
    bool improved = false;
    for (int h = 0; h < 40; ++h) {
      na = a + scale * step[0];
      nr = clamp_rate(r + scale * step[1]);
      nchi = chi2_of(m_, y, w, na, nr);
      if (nchi <= chi * (1.0 + 1e-15) + 1e-300) {
        improved = true;
        break;
      }
      scale *= 0.5;
    }
    if (!improved) break;
    double moved = std::abs(na - a) + std::abs(nr - r);
    a = na;
    r = nr;
    chi = nchi;
    if (moved <= 1e-13 * (std::abs(a) + std::abs(r) + 1.0)) break;
  }

  fit.a = a;
  fit.r = r;
  fit.residual_norm = std::sqrt(chi);
  Eigen::Matrix2d cov = jtj.inverse();
  if (!cov.allFinite()) {
    fit.degenerate = true;
    cov.setZero();
  }
  fit.stderr_a = std::sqrt(std::max(0.0, cov(0, 0)));
  fit.stderr_r = std::sqrt(std::max(0.0, cov(1, 1)));
  fit.cov_ar = cov(0, 1);
  if (std::abs(a) < 1e-14 || r >= kRateHi - 1e-8 || r <= kRateLo + 1e-8)
    fit.degenerate = true;
  return fit;
}

DecayFit fit_decay(const RBDataset& ds, const std::string& column, int m_min) {
  std::vector<int> ms;
  std::vector<double> val, err;
  for (const EstimateRow& row : ds.estimates)
    if (row.column == column) {
      ms.push_back(row.m);
      val.push_back(row.estimate);
      err.push_back(row.stderr_);
    }
  if (ms.empty())
    throw std::invalid_argument("fit_decay: no column '" + column + "' in dataset");
  VectorXd v(Index(val.size())), s(Index(err.size()));
  for (Index i = 0; i < v.size(); ++i) {
    v[i] = val[size_t(i)];
    s[i] = err[size_t(i)];
  }
  return fit_decay(ms, v, s, m_min);
}

}  // namespace frb
