#pragma once
// Straightforward reference implementations the library is checked against.
// Deliberately naive: direct sums, full sorts, no reuse between positions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "heatpat/meterdata.hpp"

namespace oracle {

inline double mean(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

inline double population_std(std::span<const double> x) {
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size()));
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Cross-correlation at lag s = w - (m - 1), summed term by term.
inline std::vector<double> cross_correlation(std::span<const double> x, std::span<const double> y) {
  const long m = static_cast<long>(x.size());
  std::vector<double> cc;
  for (long s = -(m - 1); s <= m - 1; ++s) {
    double sum = 0.0;
    for (long l = 0; l < m; ++l) {
      const long j = l - s;
      if (j >= 0 && j < m) sum += x[static_cast<std::size_t>(l)] * y[static_cast<std::size_t>(j)];
    }
    cc.push_back(sum);
  }
  return cc;
}

inline std::vector<double> ncc(std::span<const double> x, std::span<const double> y) {
  auto cc = cross_correlation(x, y);
  double xx = 0.0, yy = 0.0;
  for (double v : x) xx += v * v;
  for (double v : y) yy += v * v;
  const double denom = std::sqrt(xx * yy);
  for (double& v : cc) v /= denom;
  return cc;
}

inline double sbd(std::span<const double> x, std::span<const double> y) {
  const auto c = ncc(x, y);
  return 1.0 - *std::max_element(c.begin(), c.end());
}

// Window [i - h, i + h] clipped to the series, missing values dropped.
inline std::vector<std::size_t> jumps(std::span<const double> x, int window, double eps_mad, double k) {
  const long n = static_cast<long>(x.size());
  const long h = window / 2;
  std::vector<std::size_t> out;
  for (long i = 0; i < n; ++i) {
    if (heatpat::is_missing(x[static_cast<std::size_t>(i)])) continue;
    std::vector<double> w;
    for (long j = std::max(0L, i - h); j <= std::min(n - 1, i + h); ++j) {
      if (!heatpat::is_missing(x[static_cast<std::size_t>(j)])) w.push_back(x[static_cast<std::size_t>(j)]);
    }
    const double med = median(w);
    std::vector<double> dev;
    for (double v : w) dev.push_back(std::abs(v - med));
    const double mad = median(dev);
    if (std::abs(x[static_cast<std::size_t>(i)] - med) > k * std::max(mad, eps_mad)) {
      out.push_back(static_cast<std::size_t>(i));
    }
  }
  return out;
}

// Mean silhouette from the textbook definition on an explicit distance table.
inline double silhouette(const std::vector<std::vector<double>>& d, const std::vector<int>& labels, int k) {
  const std::size_t n = labels.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> sum(static_cast<std::size_t>(k), 0.0);
    std::vector<int> count(static_cast<std::size_t>(k), 0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      sum[static_cast<std::size_t>(labels[j])] += d[i][j];
      ++count[static_cast<std::size_t>(labels[j])];
    }
    const auto own = static_cast<std::size_t>(labels[i]);
    if (count[own] == 0) continue;
    const double a = sum[own] / count[own];
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
      if (c != own && count[c] > 0) b = std::min(b, sum[c] / count[c]);
    }
    if (!std::isfinite(b) || std::max(a, b) == 0.0) continue;
    total += (b - a) / std::max(a, b);
  }
  return total / static_cast<double>(n);
}

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t m) {
  std::normal_distribution<double> nd;
  std::vector<double> v(m);
  for (double& x : v) x = nd(rng);
  return v;
}

}  // namespace oracle
