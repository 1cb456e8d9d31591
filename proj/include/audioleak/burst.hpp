#pragma once

#include <span>
#include <string>
#include <vector>

#include "core.hpp"
#include "metrics.hpp"

namespace audioleak {

struct BurstParams {
  double s_w = 1.0;             // window length, seconds
  double b_audio_bps = 23000.0;  // flag windows strictly above this rate
  int n = 5;                    // consecutive flagged windows per event
  DirectionFilter filter = DirectionFilter::Outbound;

  void validate() const {
    if (!(s_w > 0)) throw ParameterError("s_w must be positive");
    if (!(b_audio_bps >= 0)) throw ParameterError("b_audio must be non-negative");
    if (n < 1) throw ParameterError("n must be at least 1");
  }
};

struct BurstEvent {
  DeviceAddress device;
  TimeSpan span;          // window-aligned, half-open
  double peak_rate_bps = 0;
  int window_count = 0;
};

struct LabelInterval {
  DeviceAddress device;
  TimeSpan span;
  std::string cause;  // e.g. the wake word; informational
};

// Maximal runs of at least n consecutive windows whose rate strictly exceeds
// b_audio become events. Runs shorter than n are discarded whole.
inline std::vector<BurstEvent> detect_bursts(const DeviceTrace& trace, const BurstParams& params) {
  params.validate();
  const auto windows = split_windows(trace, params.s_w, params.filter);

  std::vector<BurstEvent> events;
  std::size_t run_start = 0;
  std::size_t run_len = 0;
  double peak = 0;
  auto close_run = [&](std::size_t end_idx) {
    if (run_len >= static_cast<std::size_t>(params.n)) {
      BurstEvent e;
      e.device = trace.device();
      e.span = {windows[run_start].start_us,
                windows[end_idx - 1].start_us + windows[end_idx - 1].duration_us};
      e.peak_rate_bps = peak;
      e.window_count = static_cast<int>(run_len);
      events.push_back(std::move(e));
    }
    run_len = 0;
    peak = 0;
  };
  for (std::size_t i = 0; i < windows.size(); ++i) {
    if (windows[i].rate_bps() > params.b_audio_bps) {
      if (run_len == 0) run_start = i;
      ++run_len;
      peak = std::max(peak, windows[i].rate_bps());
    } else if (run_len) {
      close_run(i);
    }
  }
  if (run_len) close_run(windows.size());
  return events;
}

struct SweepPoint {
  int n = 0;
  std::vector<ConfusionCounts> per_device;  // window-level, one entry per trace
  std::uint64_t event_tp = 0;  // events overlapping a label
  std::uint64_t event_fp = 0;  // events overlapping none
  std::uint64_t event_fn = 0;  // labels never hit by an event

  ConfusionCounts pooled() const {
    ConfusionCounts c;
    for (const auto& d : per_device) c += d;
    return c;
  }
};

// Detection sweep over the run-length parameter. Window-level confusion is
// the primary measure; event-level hits are tallied alongside.
inline std::vector<SweepPoint> sweep_n(std::span<const DeviceTrace> traces,
                                       std::span<const LabelInterval> labels,
                                       const BurstParams& base, int n_min, int n_max) {
  base.validate();
  if (n_min < 1 || n_min > n_max) throw ParameterError("bad n sweep range");

  std::vector<SweepPoint> points(static_cast<std::size_t>(n_max - n_min + 1));
  for (std::size_t i = 0; i < points.size(); ++i) points[i].n = n_min + static_cast<int>(i);

  for (const DeviceTrace& trace : traces) {
    std::vector<TimeSpan> device_labels;
    for (const auto& l : labels)
      if (l.device == trace.device()) device_labels.push_back(l.span);

    const auto windows = split_windows(trace, base.s_w, base.filter);
    for (auto& point : points) {
      BurstParams p = base;
      p.n = point.n;
      const auto events = detect_bursts(trace, p);

      std::vector<std::uint8_t> predicted(windows.size(), 0);
      for (const auto& e : events) {
        const auto first = static_cast<std::size_t>(
            (e.span.start_us - trace.span().start_us) / to_us(base.s_w));
        for (std::size_t w = 0; w < static_cast<std::size_t>(e.window_count); ++w)
          predicted[first + w] = 1;
      }
      point.per_device.push_back(window_confusion(windows, predicted, device_labels));

      std::vector<bool> label_hit(device_labels.size(), false);
      for (const auto& e : events) {
        bool hit = false;
        for (std::size_t li = 0; li < device_labels.size(); ++li)
          if (e.span.overlaps(device_labels[li])) {
            hit = true;
            label_hit[li] = true;
          }
        hit ? ++point.event_tp : ++point.event_fp;
      }
      for (bool h : label_hit)
        if (!h) ++point.event_fn;
    }
  }
  return points;
}

}  // namespace audioleak
