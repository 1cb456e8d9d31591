#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "core.hpp"

namespace audioleak {

enum class Feature : std::uint8_t { PacketSize, InterArrival };

struct DistributionVector {
  std::vector<double> bin_edges;        // k+1 edges; equal pair when k == 1 and range is zero
  std::vector<std::uint64_t> counts;    // k bins
  Feature feature = Feature::PacketSize;

  std::size_t bin_count() const { return counts.size(); }
  std::uint64_t total() const {
    std::uint64_t s = 0;
    for (auto c : counts) s += c;
    return s;
  }
  std::vector<double> counts_as_doubles() const {
    return std::vector<double>(counts.begin(), counts.end());
  }
};

// Quantile with linear interpolation between order statistics.
inline double quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw ParameterError("quantile of empty sample");
  if (sorted.size() == 1) return sorted[0];
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

// Equal-width edges with the bin count k = max(Sturges, Freedman-Diaconis):
//   k_sturges = ceil(log2 m) + 1,   k_fd = ceil(range / (2 * IQR * m^(-1/3)))
// Falls back to Sturges when the IQR is zero; a zero range (or a single
// sample) collapses to one degenerate [v, v] bin.
inline std::vector<double> auto_bin_edges(std::span<const double> samples) {
  const std::size_t m = samples.size();
  if (m == 0) throw ParameterError("cannot bin an empty sample");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double lo = sorted.front();
  const double hi = sorted.back();
  const double range = hi - lo;
  if (m == 1 || range == 0.0) return {lo, hi};

  const std::size_t k_sturges =
      static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(m)))) + 1;
  std::size_t k = k_sturges;
  const double iqr = quantile(sorted, 0.75) - quantile(sorted, 0.25);
  if (iqr > 0.0) {
    const double h = 2.0 * iqr * std::pow(static_cast<double>(m), -1.0 / 3.0);
    const std::size_t k_fd = static_cast<std::size_t>(std::ceil(range / h));
    k = std::max(k_sturges, k_fd);
  }
  std::vector<double> edges(k + 1);
  for (std::size_t i = 0; i <= k; ++i)
    edges[i] = lo + range * static_cast<double>(i) / static_cast<double>(k);
  edges[k] = hi;  // guard against accumulated rounding
  return edges;
}

// Bins are half-open [e_i, e_{i+1}) with the last bin closed; out-of-range
// samples clamp into the end bins so the counts always sum to the sample size.
inline DistributionVector histogram(std::span<const double> samples,
                                    std::vector<double> edges,
                                    Feature feature = Feature::PacketSize) {
  if (edges.size() < 2) throw ParameterError("histogram needs at least two edges");
  for (std::size_t i = 1; i + 1 < edges.size(); ++i)
    if (!(edges[i] > edges[i - 1]))
      throw ParameterError("histogram edges must increase");
  if (edges.back() < edges[edges.size() - 2])
    throw ParameterError("histogram edges must increase");

  DistributionVector d;
  d.counts.assign(edges.size() - 1, 0);
  d.feature = feature;
  for (double v : samples) {
    std::size_t bin;
    if (v < edges.front()) {
      bin = 0;
    } else if (v >= edges.back()) {
      bin = d.counts.size() - 1;
    } else {
      const auto it = std::upper_bound(edges.begin(), edges.end(), v);
      bin = static_cast<std::size_t>(it - edges.begin()) - 1;
    }
    d.counts[bin] += 1;
  }
  d.bin_edges = std::move(edges);
  return d;
}

inline DistributionVector auto_histogram(std::span<const double> samples,
                                         Feature feature = Feature::PacketSize) {
  return histogram(samples, auto_bin_edges(samples), feature);
}

}  // namespace audioleak
