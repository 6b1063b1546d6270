#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>

namespace mcpc {

inline constexpr double kZ95 = 1.96;    // two-sided 95% normal quantile
inline constexpr double kZ99 = 2.5758;  // two-sided 99% normal quantile

/// Half-width of the normal-approximation binomial confidence interval.
inline double binomial_ci_halfwidth(double p, std::size_t n, double z = kZ95) {
  if (n == 0) throw std::invalid_argument("binomial CI needs n >= 1");
  return z * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

/// Upper-tail probability of the standard normal.
inline double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

/// One-sided z statistic for "observed proportion exceeds p0".
inline double binomial_z_score(double p_hat, double p0, std::size_t n) {
  if (n == 0) throw std::invalid_argument("z score needs n >= 1");
  return (p_hat - p0) / std::sqrt(p0 * (1.0 - p0) / static_cast<double>(n));
}

/// One-sided p-value for "observed proportion exceeds p0".
inline double binomial_pvalue_above(double p_hat, double p0, std::size_t n) {
  return normal_sf(binomial_z_score(p_hat, p0, n));
}

/// True if p_hat lies inside p0 +/- z*sqrt(p0(1-p0)/n).
inline bool within_binomial_band(double p_hat, double p0, std::size_t n, double z) {
  return std::abs(p_hat - p0) <= binomial_ci_halfwidth(p0, n, z);
}

/// Pearson chi-square statistic for observed counts vs expected counts.
inline double chi_square_statistic(std::span<const std::size_t> observed,
                                   std::span<const double> expected) {
  if (observed.size() != expected.size() || observed.empty()) {
    throw std::invalid_argument("chi-square: counts and expectations must align");
  }
  double stat = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (expected[i] <= 0.0) throw std::invalid_argument("chi-square: expected count <= 0");
    const double d = static_cast<double>(observed[i]) - expected[i];
    stat += d * d / expected[i];
  }
  return stat;
}

/// Chi-square statistic against a uniform expectation over all cells.
inline double chi_square_uniform(std::span<const std::size_t> observed) {
  std::size_t total = 0;
  for (std::size_t c : observed) total += c;
  const double expected = static_cast<double>(total) / static_cast<double>(observed.size());
  double stat = 0.0;
  for (std::size_t c : observed) {
    const double d = static_cast<double>(c) - expected;
    stat += d * d / expected;
  }
  return stat;
}

}  // namespace mcpc
