#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <audioleak/burst.hpp>
#include <audioleak/core.hpp>
#include <audioleak/pcap.hpp>
#include <audioleak/probe.hpp>
#include <audioleak/simulator.hpp>

// Probing campaigns: schedule alternating idle/probe windows, emit audio
// probes through a pluggable sink, keep the capture aligned with the
// timeline, and turn repeated window comparisons into per-device verdicts.

namespace audioleak {

struct ProbeWord {
  std::string text;
  std::string audio_path;  // pre-rendered utterance for the live sink
};

struct ProbePlan {
  std::vector<ProbeWord> words;
  double window_d = 60.0;      // seconds per idle or probe window
  double repeat_every = 10.0;  // emission spacing inside a probe window
  int repetitions = 3;         // idle/probe pairs per word
  double threshold = 0.42;
  std::vector<DeviceAddress> devices;  // empty = judge every captured device

  void validate() const {
    if (words.empty()) throw ParameterError("probe plan needs at least one word");
    for (const auto& w : words)
      if (w.text.empty()) throw ParameterError("probe word must be non-empty");
    if (!(repeat_every > 0.0) || !(window_d > repeat_every))
      throw ParameterError("need window_d > repeat_every > 0");
    if (repetitions < 1) throw ParameterError("repetitions must be >= 1");
    if (!(threshold > 0.0) || !(threshold < 1.0))
      throw ParameterError("threshold must lie strictly between 0 and 1");
  }
};

enum class WindowKind { Idle, Probe };

struct SessionWindow {
  WindowKind kind = WindowKind::Idle;
  std::string word;  // empty for idle windows
  TimeSpan span;
  std::vector<std::int64_t> emissions;  // probe windows: utterance start times
};

struct ProbeSession {
  ProbePlan plan;
  std::vector<SessionWindow> timeline;
  std::vector<DeviceTrace> capture;
  bool partial = false;
  int words_completed = 0;
};

// Timeline is word-major: for each word, `repetitions` idle/probe pairs.
// Planned emissions are filled in; live runs overwrite them with measured
// playback timestamps.
inline std::vector<SessionWindow> plan_timeline(const ProbePlan& plan,
                                                std::int64_t t0_us = 0) {
  plan.validate();
  std::vector<SessionWindow> timeline;
  const std::int64_t d = to_us(plan.window_d);
  const std::int64_t step = to_us(plan.repeat_every);
  std::int64_t t = t0_us;
  for (const auto& word : plan.words) {
    for (int rep = 0; rep < plan.repetitions; ++rep) {
      timeline.push_back({WindowKind::Idle, "", {t, t + d}, {}});
      SessionWindow probe{WindowKind::Probe, word.text, {t + d, t + 2 * d}, {}};
      for (std::int64_t e = t + d; e < t + 2 * d; e += step)
        probe.emissions.push_back(e);
      timeline.push_back(std::move(probe));
      t += 2 * d;
    }
  }
  return timeline;
}

inline ProbeSession run_session_sim(const ProbePlan& plan,
                                    std::span<const DeviceModel> fleet,
                                    std::uint64_t seed) {
  plan.validate();
  ProbeSession session;
  session.plan = plan;
  session.timeline = plan_timeline(plan);

  Scenario sc;
  sc.seed = seed;
  sc.duration_s = to_seconds(session.timeline.back().span.end_us) + 2.0;
  sc.devices.assign(fleet.begin(), fleet.end());
  for (const auto& w : session.timeline)
    if (w.kind == WindowKind::Probe)
      for (std::int64_t e : w.emissions)
        sc.events.push_back({to_seconds(e), EventKind::WakeWord, w.word});

  auto set = simulate(sc);
  for (auto& trace : set.traces) {
    if (!plan.devices.empty() &&
        std::find(plan.devices.begin(), plan.devices.end(), trace.device()) ==
            plan.devices.end())
      continue;
    session.capture.push_back(std::move(trace));
  }
  session.words_completed = static_cast<int>(plan.words.size());
  return session;
}

// Live plumbing. The sink blocks while an utterance plays; the clock must be
// the same timebase the capture source stamps frames with (epoch offset
// configurable below).
class AudioSink {
 public:
  virtual ~AudioSink() = default;
  virtual bool play(const ProbeWord& word) = 0;
};

// Shells out to an external player. The template's {file} placeholder is
// replaced with the word's audio path.
class CommandSink : public AudioSink {
 public:
  explicit CommandSink(std::string command_template)
      : template_(std::move(command_template)) {}

  bool play(const ProbeWord& word) override {
    std::string cmd = template_;
    auto pos = cmd.find("{file}");
    if (pos != std::string::npos) cmd.replace(pos, 6, word.audio_path);
    return std::system(cmd.c_str()) == 0;
  }

 private:
  std::string template_;
};

class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::int64_t now_us() = 0;
  virtual void sleep_until_us(std::int64_t t) = 0;
};

// Wall-clock implementation. now_us() is system time (pcap frames are
// stamped with it); sleeps are bounded waits on the same readings.
class SystemClock : public Clock {
 public:
  std::int64_t now_us() override {
    return std::chrono::duration_cast<std::chrono::microseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
  }
  void sleep_until_us(std::int64_t t) override {
    std::int64_t now = now_us();
    if (t > now) std::this_thread::sleep_for(std::chrono::microseconds(t - now));
  }
};

struct LiveConfig {
  std::vector<CidrPrefix> local_networks;
  std::int64_t epoch_us = -1;    // capture timestamp of session start; -1 = t0
  double poll_interval_s = 0.2;  // how often to drain the capture source
};

namespace orch_detail {

inline void drain(FrameSource& source, std::vector<RawFrame>& frames) {
  RawFrame f;
  while (source.next(f)) frames.push_back(std::move(f));
}

inline void wait_drain(Clock& clock, FrameSource& source, std::int64_t until_us,
                       double poll_s, std::vector<RawFrame>& frames) {
  const std::int64_t poll = to_us(poll_s);
  std::int64_t now = clock.now_us();
  while (now < until_us) {
    drain(source, frames);
    clock.sleep_until_us(std::min(now + poll, until_us));
    now = clock.now_us();
  }
  drain(source, frames);
}

}  // namespace orch_detail

// Runs the plan against real hardware (or anything speaking the same
// interfaces). On sink failure the session is marked partial: windows of
// fully completed words are kept, the failed word's windows are dropped.
inline ProbeSession run_session_live(const ProbePlan& plan, AudioSink& sink,
                                     FrameSource& source, Clock& clock,
                                     const LiveConfig& config) {
  plan.validate();
  ProbeSession session;
  session.plan = plan;

  const std::int64_t t0 = clock.now_us();
  const std::int64_t d = to_us(plan.window_d);
  const std::int64_t step = to_us(plan.repeat_every);
  std::vector<RawFrame> frames;
  std::vector<SessionWindow> timeline;

  for (const auto& word : plan.words) {
    std::vector<SessionWindow> word_windows;
    bool failed = false;
    for (int rep = 0; rep < plan.repetitions && !failed; ++rep) {
      std::int64_t idle_start = clock.now_us();
      orch_detail::wait_drain(clock, source, idle_start + d,
                              config.poll_interval_s, frames);
      word_windows.push_back(
          {WindowKind::Idle, "", {idle_start - t0, clock.now_us() - t0}, {}});

      std::int64_t probe_start = clock.now_us();
      SessionWindow probe{WindowKind::Probe, word.text, {probe_start - t0, 0}, {}};
      for (std::int64_t e = probe_start; e < probe_start + d && !failed;
           e += step) {
        orch_detail::wait_drain(clock, source, e, config.poll_interval_s, frames);
        probe.emissions.push_back(clock.now_us() - t0);
        if (!sink.play(word)) failed = true;
      }
      if (!failed) {
        orch_detail::wait_drain(clock, source, probe_start + d,
                                config.poll_interval_s, frames);
        probe.span.end_us = clock.now_us() - t0;
        word_windows.push_back(std::move(probe));
      }
    }
    if (failed) {
      session.partial = true;
      break;
    }
    for (auto& w : word_windows) timeline.push_back(std::move(w));
    ++session.words_completed;
  }

  orch_detail::drain(source, frames);
  session.timeline = std::move(timeline);

  const std::int64_t session_end =
      session.timeline.empty() ? 0 : session.timeline.back().span.end_us;
  const std::int64_t epoch = config.epoch_us >= 0 ? config.epoch_us : t0;
  for (auto& f : frames) f.t_us -= epoch;

  MemoryFrameSource replay(std::move(frames));
  auto result = ingest(replay, config.local_networks);
  for (auto& trace : result.traces) {
    std::vector<PacketRecord> kept;
    for (const auto& p : trace.packets())
      if (p.t_us >= 0 && p.t_us <= session_end) kept.push_back(p);
    session.capture.push_back(DeviceTrace::build(
        trace.device(), std::move(kept), TimeSpan{0, session_end}));
  }
  return session;
}

struct VerdictEvidence {
  std::vector<BurstEvent> bursts;  // burst events inside this word's probe windows
  std::vector<ProbeComparison> comparisons;
};

struct DetectionVerdict {
  DeviceAddress device;
  std::string word;
  std::vector<double> p_values;  // one per repetition, NaN = not evaluable
  bool reactive = false;
  bool silent = false;        // no packets at all during the session
  bool insufficient = false;  // too few evaluable repetitions for a majority
  VerdictEvidence evidence;
};

// Comparisons run on windows inset by this guard so playback ramp-up and
// trailing cloud chatter do not bleed across window edges.
inline constexpr double kWindowGuardSeconds = 0.5;

inline int majority_needed(int repetitions) { return repetitions / 2 + 1; }

inline std::vector<DetectionVerdict> judge(const ProbeSession& session,
                                           double threshold) {
  if (!(threshold > 0.0) || !(threshold < 1.0))
    throw ParameterError("threshold must lie strictly between 0 and 1");
  if (session.timeline.size() % 2 != 0)
    throw ParameterError("session timeline must pair idle and probe windows");

  struct WordPair {
    std::string word;
    TimeSpan idle, probe;
  };
  std::vector<WordPair> pairs;
  for (std::size_t i = 0; i + 1 < session.timeline.size(); i += 2) {
    const auto& idle = session.timeline[i];
    const auto& probe = session.timeline[i + 1];
    if (idle.kind != WindowKind::Idle || probe.kind != WindowKind::Probe)
      throw ParameterError("session timeline must alternate idle/probe");
    pairs.push_back({probe.word, idle.span, probe.span});
  }

  const std::int64_t guard = to_us(kWindowGuardSeconds);
  auto trimmed = [guard](const TimeSpan& s) {
    return TimeSpan{s.start_us + guard, std::max(s.start_us + guard, s.end_us - guard)};
  };

  ProbeOptions opts;
  opts.threshold = threshold;

  std::vector<DetectionVerdict> verdicts;
  for (const auto& trace : session.capture) {
    const bool silent = trace.packets().empty();
    auto bursts = silent ? std::vector<BurstEvent>{}
                         : detect_bursts(trace, BurstParams{});

    // keep plan word order, one verdict per distinct word with pairs
    std::vector<std::string> words;
    for (const auto& p : pairs)
      if (std::find(words.begin(), words.end(), p.word) == words.end())
        words.push_back(p.word);

    for (const auto& word : words) {
      DetectionVerdict v;
      v.device = trace.device();
      v.word = word;
      v.silent = silent;

      int evaluable = 0, below = 0, reps = 0;
      for (const auto& p : pairs) {
        if (p.word != word) continue;
        ++reps;
        double pv = std::numeric_limits<double>::quiet_NaN();
        if (!silent) {
          try {
            auto cmp = compare_windows(trace, trimmed(p.idle), trimmed(p.probe), opts);
            pv = cmp.p_combined;
            ++evaluable;
            if (cmp.p_combined < threshold) ++below;
            v.evidence.comparisons.push_back(cmp);
          } catch (const InsufficientDataError&) {
            // window too quiet to compare; counted as not evaluable
          }
        }
        v.p_values.push_back(pv);
      }
      for (const auto& b : bursts) {
        bool in_probe = false;
        for (const auto& p : pairs)
          if (p.word == word && b.span.overlaps(p.probe)) in_probe = true;
        if (in_probe) v.evidence.bursts.push_back(b);
      }

      const int need = majority_needed(reps);
      v.reactive = !silent && below >= need;
      v.insufficient = !silent && evaluable < need;
      verdicts.push_back(std::move(v));
    }
  }
  return verdicts;
}

inline std::vector<DetectionVerdict> judge(const ProbeSession& session) {
  return judge(session, session.plan.threshold);
}

}  // namespace audioleak
