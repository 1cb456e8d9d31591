#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "core.hpp"

namespace audioleak {

struct ConfusionCounts {
  std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;

  // 0/0 yields NaN rather than an exception so degenerate single-class
  // evaluations stay representable.
  double tpr() const {
    return tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn)
                   : std::numeric_limits<double>::quiet_NaN();
  }
  double fpr() const {
    return fp + tn ? static_cast<double>(fp) / static_cast<double>(fp + tn)
                   : std::numeric_limits<double>::quiet_NaN();
  }

  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fp += o.fp;
    tn += o.tn;
    fn += o.fn;
    return *this;
  }
  friend ConfusionCounts operator+(ConfusionCounts a, const ConfusionCounts& b) { return a += b; }
};

// Per-window confusion against labeled intervals. A window counts as actually
// positive when it overlaps any label; `predicted` runs parallel to `windows`.
inline ConfusionCounts window_confusion(std::span<const TimeWindow> windows,
                                        std::span<const std::uint8_t> predicted,
                                        std::span<const TimeSpan> labels) {
  if (windows.size() != predicted.size())
    throw ParameterError("prediction vector does not match the windowing");
  for (std::size_t i = 1; i < windows.size(); ++i)
    if (windows[i].start_us != windows[i - 1].start_us + windows[i - 1].duration_us)
      throw ParameterError("windows must tile contiguously");

  ConfusionCounts c;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const TimeSpan ws = windows[i].span();
    bool actual = false;
    for (const TimeSpan& l : labels)
      if (ws.overlaps(l)) {
        actual = true;
        break;
      }
    if (actual)
      predicted[i] ? ++c.tp : ++c.fn;
    else
      predicted[i] ? ++c.fp : ++c.tn;
  }
  return c;
}

enum class Averaging : std::uint8_t { Micro, Macro };

struct RatePoint {
  double parameter = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
};

// Micro pools the counts before computing rates; macro averages per-group
// rates, skipping groups whose rate is undefined (NaN).
inline RatePoint rate_point(double parameter, std::span<const ConfusionCounts> groups,
                            Averaging avg = Averaging::Micro) {
  RatePoint p;
  p.parameter = parameter;
  if (avg == Averaging::Micro) {
    ConfusionCounts pooled;
    for (const auto& g : groups) pooled += g;
    p.tpr = pooled.tpr();
    p.fpr = pooled.fpr();
    return p;
  }
  double tpr_sum = 0, fpr_sum = 0;
  std::size_t tpr_n = 0, fpr_n = 0;
  for (const auto& g : groups) {
    if (double t = g.tpr(); !std::isnan(t)) {
      tpr_sum += t;
      ++tpr_n;
    }
    if (double f = g.fpr(); !std::isnan(f)) {
      fpr_sum += f;
      ++fpr_n;
    }
  }
  p.tpr = tpr_n ? tpr_sum / static_cast<double>(tpr_n) : std::numeric_limits<double>::quiet_NaN();
  p.fpr = fpr_n ? fpr_sum / static_cast<double>(fpr_n) : std::numeric_limits<double>::quiet_NaN();
  return p;
}

namespace detail {

inline std::vector<double> average_ranks(std::span<const double> xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace detail

// Spearman rank correlation with average ranks for ties.
inline double spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw ParameterError("spearman needs two equally sized samples");
  auto rx = detail::average_ranks(xs);
  auto ry = detail::average_ranks(ys);
  const double m = (static_cast<double>(rx.size()) + 1.0) / 2.0;
  const double mx = m, my = m;  // average ranks always mean (n+1)/2
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mx, dy = ry[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace audioleak
