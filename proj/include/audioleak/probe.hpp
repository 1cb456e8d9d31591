#pragma once

#include <optional>
#include <span>
#include <vector>

#include "core.hpp"
#include "histogram.hpp"
#include "metrics.hpp"
#include "stats.hpp"

namespace audioleak {

struct ProbeOptions {
  double threshold = 0.42;
  bool combine_iat = false;  // also test inter-arrival times, Fisher-combined
  VarianceModel variance = VarianceModel::Unequal;
  DirectionFilter filter = DirectionFilter::Outbound;

  void validate() const {
    if (!(threshold > 0.0) || !(threshold < 1.0))
      throw ParameterError("threshold must lie strictly between 0 and 1");
  }
};

struct ProbeComparison {
  double p_size = 1.0;
  std::optional<double> p_iat;  // absent when either window lacks arrivals
  double p_combined = 1.0;
  double t_size = 0.0;
  double df_size = 0.0;
  bool reactive = false;
};

inline std::vector<double> packet_sizes_in(const DeviceTrace& trace, const TimeSpan& span,
                                           DirectionFilter filter) {
  std::vector<double> v;
  for (const auto& p : trace.packets())
    if (span.contains(p.t_us) && matches(filter, p.dir)) v.push_back(static_cast<double>(p.size));
  return v;
}

inline std::vector<double> inter_arrivals_in(const DeviceTrace& trace, const TimeSpan& span,
                                             DirectionFilter filter) {
  std::vector<double> v;
  std::int64_t prev = -1;
  for (const auto& p : trace.packets()) {
    if (!span.contains(p.t_us) || !matches(filter, p.dir)) continue;
    if (prev >= 0) v.push_back(to_seconds(p.t_us - prev));
    prev = p.t_us;
  }
  return v;
}

// Compares the probe window's traffic distribution against the idle window's.
// Bin edges come from the idle window alone; the probe histogram reuses them
// with out-of-range sizes clamped, so a silent-to-loud change shows up as mass
// piling into the edge bins. Throws InsufficientDataError when the idle window
// cannot support a binned test (fewer than two packets, or all sizes equal).
inline ProbeComparison compare_windows(const DeviceTrace& trace, const TimeSpan& idle,
                                       const TimeSpan& probe, const ProbeOptions& opts = {}) {
  opts.validate();
  const auto idle_sizes = packet_sizes_in(trace, idle, opts.filter);
  if (idle_sizes.size() < 2)
    throw InsufficientDataError("idle window has fewer than two packets");
  auto edges = auto_bin_edges(idle_sizes);
  if (edges.size() < 3)
    throw InsufficientDataError("idle packet sizes are degenerate, cannot bin");

  const auto probe_sizes = packet_sizes_in(trace, probe, opts.filter);
  const auto f_idle = histogram(idle_sizes, edges, Feature::PacketSize);
  const auto f_probe = histogram(probe_sizes, std::move(edges), Feature::PacketSize);

  ProbeComparison c;
  const auto r = t_test(f_idle.counts_as_doubles(), f_probe.counts_as_doubles(), opts.variance);
  c.p_size = r.p;
  c.t_size = r.t;
  c.df_size = r.df;
  c.p_combined = c.p_size;

  if (opts.combine_iat) {
    const auto idle_iat = inter_arrivals_in(trace, idle, opts.filter);
    if (idle_iat.size() >= 2) {
      auto iat_edges = auto_bin_edges(idle_iat);
      if (iat_edges.size() >= 3) {
        const auto probe_iat = inter_arrivals_in(trace, probe, opts.filter);
        const auto g_idle = histogram(idle_iat, iat_edges, Feature::InterArrival);
        const auto g_probe = histogram(probe_iat, std::move(iat_edges), Feature::InterArrival);
        const auto ri = t_test(g_idle.counts_as_doubles(), g_probe.counts_as_doubles(), opts.variance);
        c.p_iat = ri.p;
        c.p_combined = fisher_combine(c.p_size, ri.p);
      }
    }
  }
  c.reactive = c.p_combined < opts.threshold;
  return c;
}

// Whole-trace variant: one distribution comparison per trace pair, with the
// reference (idle) trace providing the binning.
inline ProbeComparison compare_traces(const DeviceTrace& idle_trace, const DeviceTrace& other,
                                      const ProbeOptions& opts = {}) {
  opts.validate();
  const auto idle_sizes = packet_sizes_in(idle_trace, idle_trace.span(), opts.filter);
  if (idle_sizes.size() < 2)
    throw InsufficientDataError("reference trace has fewer than two packets");
  auto edges = auto_bin_edges(idle_sizes);
  if (edges.size() < 3)
    throw InsufficientDataError("reference packet sizes are degenerate, cannot bin");
  const auto other_sizes = packet_sizes_in(other, other.span(), opts.filter);
  const auto a = histogram(idle_sizes, edges, Feature::PacketSize);
  const auto b = histogram(other_sizes, std::move(edges), Feature::PacketSize);
  ProbeComparison c;
  const auto r = t_test(a.counts_as_doubles(), b.counts_as_doubles(), opts.variance);
  c.p_size = r.p;
  c.t_size = r.t;
  c.df_size = r.df;
  c.p_combined = r.p;
  c.reactive = c.p_combined < opts.threshold;
  return c;
}

struct ScanPoint {
  TimeSpan first;
  TimeSpan second;
  ProbeComparison cmp;
  bool skipped = false;  // leading window could not support a test
};

// Slides a pair of adjacent fixed-length windows across the trace and tests
// each pair. Only complete windows participate; a trailing partial window is
// ignored.
inline std::vector<ScanPoint> sliding_scan(const DeviceTrace& trace, double window_seconds,
                                           const ProbeOptions& opts = {}) {
  opts.validate();
  const std::int64_t w_us = to_us(window_seconds);
  if (w_us <= 0) throw ParameterError("scan window must be positive");
  const std::int64_t full =
      trace.span().length_us() >= w_us ? trace.span().length_us() / w_us : 0;

  std::vector<ScanPoint> points;
  for (std::int64_t k = 0; k + 1 < full; ++k) {
    ScanPoint sp;
    sp.first = {trace.span().start_us + k * w_us, trace.span().start_us + (k + 1) * w_us};
    sp.second = {sp.first.end_us, sp.first.end_us + w_us};
    try {
      sp.cmp = compare_windows(trace, sp.first, sp.second, opts);
    } catch (const InsufficientDataError&) {
      sp.skipped = true;
      sp.cmp.p_size = std::numeric_limits<double>::quiet_NaN();
      sp.cmp.p_combined = sp.cmp.p_size;
      sp.cmp.reactive = false;
    }
    points.push_back(std::move(sp));
  }
  return points;
}

// Confusion over scan pairs at an arbitrary threshold: a pair is actually
// positive when either of its windows overlaps a label, predicted positive
// when its combined p falls below the threshold.
inline ConfusionCounts scan_confusion(std::span<const ScanPoint> points,
                                      std::span<const TimeSpan> labels, double threshold) {
  ConfusionCounts c;
  for (const auto& sp : points) {
    bool actual = false;
    for (const auto& l : labels)
      if (sp.first.overlaps(l) || sp.second.overlaps(l)) {
        actual = true;
        break;
      }
    const bool predicted = !sp.skipped && sp.cmp.p_combined < threshold;
    if (actual)
      predicted ? ++c.tp : ++c.fn;
    else
      predicted ? ++c.fp : ++c.tn;
  }
  return c;
}

}  // namespace audioleak
