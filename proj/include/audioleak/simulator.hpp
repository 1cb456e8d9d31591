#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <audioleak/burst.hpp>
#include <audioleak/core.hpp>

// Synthetic per-device traffic generation with ground-truth labels.
// Devices emit periodic idle traffic (keepalives plus small/medium bursts)
// and, when an event matches their activation model, an outbound audio
// stream at a fixed bitrate. Everything is a pure function of the seed.

namespace audioleak {

namespace sim_detail {

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent engine per (scenario seed, device, stream). Keeps idle
// traffic byte-identical whether or not events fire.
inline std::mt19937_64 engine_for(std::uint64_t seed, std::uint64_t device_key,
                                  std::uint64_t stream_key) {
  return std::mt19937_64(mix64(seed ^ mix64(device_key ^ mix64(stream_key))));
}

inline double clamped_normal(std::mt19937_64& eng, double mean, double sd,
                             double lo, double hi) {
  if (sd <= 0.0) return std::clamp(mean, lo, hi);
  std::normal_distribution<double> dist(mean, sd);
  return std::clamp(dist(eng), lo, hi);
}

}  // namespace sim_detail

struct SizeProfile {
  double mean = 0.0;
  double sd = 0.0;
};

// One periodic idle stream: bursts of roughly bytes_mean bytes arrive every
// period_s seconds (uniform jitter as a fraction of the period), split into
// packets drawn from the packet profile and spread over duration_s.
struct IdleBurstSpec {
  double period_s = 0.0;
  double jitter = 0.0;
  double bytes_mean = 0.0;
  double bytes_sd = 0.0;
  double duration_s = 0.0;
  SizeProfile packet;
  double reply_size = 0.0;  // >0 emits one inbound packet per burst
};

struct AudioStreamSpec {
  double bitrate_bps = 256000.0;
  SizeProfile packet{1200.0, 150.0};
  double pre_roll_s = 0.35;
  int ack_every = 4;  // inbound ack after every Nth outbound packet, 0 = none
};

struct DeviceModel {
  std::string name;
  DeviceAddress address;  // zero MAC lets simulate() derive one from the name
  std::vector<IdleBurstSpec> idle_bursts;
  AudioStreamSpec audio;
  std::vector<std::string> wake_words;
  std::map<std::string, double> activation_model;  // lowercase key -> P(react)

  void validate() const {
    if (name.empty()) throw ParameterError("device model needs a name");
    if (audio.bitrate_bps <= 0.0)
      throw ParameterError("audio bitrate must be positive");
    if (audio.packet.mean <= 0.0)
      throw ParameterError("audio packet size must be positive");
    if (audio.pre_roll_s < 0.0)
      throw ParameterError("audio pre-roll must be non-negative");
    for (const auto& b : idle_bursts) {
      if (b.period_s <= 0.0)
        throw ParameterError("idle burst period must be positive");
      if (b.jitter < 0.0 || b.jitter >= 1.0)
        throw ParameterError("idle burst jitter must be in [0,1)");
      if (b.bytes_mean <= 0.0 || b.packet.mean <= 0.0)
        throw ParameterError("idle burst sizes must be positive");
      if (b.duration_s < 0.0)
        throw ParameterError("idle burst duration must be non-negative");
    }
    for (const auto& [word, p] : activation_model) {
      if (word.empty()) throw ParameterError("activation word must be non-empty");
      if (p < 0.0 || p > 1.0)
        throw ParameterError("activation probability must be in [0,1]");
    }
  }

  double activation_probability(std::string_view word) const {
    std::string key(word);
    std::transform(key.begin(), key.end(), key.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    auto it = activation_model.find(key);
    return it == activation_model.end() ? 0.0 : it->second;
  }
};

enum class EventKind { WakeWord, Noise };

// Noise events are matched against this activation-model key.
inline constexpr const char* kNoiseKey = "noise";

struct ScenarioEvent {
  double time_s = 0.0;
  EventKind kind = EventKind::WakeWord;
  std::string word;  // empty for Noise

  std::string activation_key() const {
    if (kind == EventKind::Noise) return kNoiseKey;
    std::string key = word;
    std::transform(key.begin(), key.end(), key.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return key;
  }
};

struct Scenario {
  double duration_s = 0.0;
  std::vector<DeviceModel> devices;
  std::vector<ScenarioEvent> events;
  std::uint64_t seed = 0;

  void validate() const {
    if (duration_s < 0.0) throw ParameterError("scenario duration must be >= 0");
    for (const auto& ev : events) {
      if (ev.time_s < 0.0 || ev.time_s > duration_s)
        throw ParameterError("scenario event outside [0, duration]");
      if (ev.kind == EventKind::WakeWord && ev.word.empty())
        throw ParameterError("wake-word event needs a word");
    }
    for (const auto& d : devices) d.validate();
  }
};

struct LabeledTraceSet {
  std::vector<DeviceTrace> traces;  // one per scenario device, same order
  std::vector<LabelInterval> labels;

  const DeviceTrace* find(const DeviceAddress& addr) const {
    for (const auto& t : traces)
      if (t.device() == addr) return &t;
    return nullptr;
  }
};

// Streamed audio runs for the utterance plus a fixed trailer while the
// device finishes uploading. Utterance length is a stable per-word value.
inline constexpr double kAudioTrailerSeconds = 1.5;

inline double utterance_seconds(std::string_view word) {
  return 4.3 + 0.15 * static_cast<double>(sim_detail::fnv1a(word) % 8);
}

inline DeviceAddress address_for(std::string_view name, int index) {
  std::uint64_t h = sim_detail::fnv1a(name);
  DeviceAddress addr;
  addr.mac = {0x02,
              static_cast<std::uint8_t>(h >> 24),
              static_cast<std::uint8_t>(h >> 16),
              static_cast<std::uint8_t>(h >> 8),
              static_cast<std::uint8_t>(h),
              static_cast<std::uint8_t>(index & 0xff)};
  addr.ip = "192.168.0." + std::to_string(10 + (index % 240));
  return addr;
}

namespace sim_detail {

inline constexpr std::uint64_t kIdleStream = 0x1D1E0000ULL;
inline constexpr std::uint64_t kEventStream = 0xA0D10000ULL;

inline void emit_idle_stream(const IdleBurstSpec& spec, double horizon_s,
                             std::mt19937_64& eng,
                             std::vector<PacketRecord>& out) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> offset(0.0, std::max(spec.duration_s, 1e-9));
  double t = spec.period_s * (1.0 + spec.jitter * unit(eng));
  while (t < horizon_s) {
    double total = clamped_normal(eng, spec.bytes_mean, spec.bytes_sd,
                                  spec.packet.mean * 0.5, spec.bytes_mean * 4.0);
    int count = std::max(1, static_cast<int>(std::lround(total / spec.packet.mean)));
    std::vector<double> offs(static_cast<std::size_t>(count), 0.0);
    if (spec.duration_s > 0.0)
      for (auto& o : offs) o = offset(eng);
    std::sort(offs.begin(), offs.end());
    for (double o : offs) {
      double at = t + o;
      if (at >= horizon_s) break;
      int size = static_cast<int>(
          std::lround(clamped_normal(eng, spec.packet.mean, spec.packet.sd, 40.0, 1460.0)));
      out.push_back(
          {to_us(at), static_cast<std::uint32_t>(size), Direction::Outbound});
    }
    if (spec.reply_size > 0.0) {
      double at = t + spec.duration_s + 0.02;
      if (at < horizon_s) {
        int size = static_cast<int>(
            std::lround(clamped_normal(eng, spec.reply_size, spec.reply_size * 0.05, 40.0, 1460.0)));
        out.push_back(
            {to_us(at), static_cast<std::uint32_t>(size), Direction::Inbound});
      }
    }
    t += spec.period_s * (1.0 + spec.jitter * unit(eng));
  }
}

inline void emit_audio_stream(const AudioStreamSpec& spec, double start_s,
                              double end_s, std::mt19937_64& eng,
                              std::vector<PacketRecord>& out) {
  double t = start_s;
  int sent = 0;
  while (t < end_s) {
    int size = static_cast<int>(
        std::lround(clamped_normal(eng, spec.packet.mean, spec.packet.sd, 100.0, 1460.0)));
    out.push_back(
        {to_us(t), static_cast<std::uint32_t>(size), Direction::Outbound});
    ++sent;
    if (spec.ack_every > 0 && sent % spec.ack_every == 0 && t + 0.002 < end_s)
      out.push_back({to_us(t + 0.002), 60, Direction::Inbound});
    t += static_cast<double>(size) * 8.0 / spec.bitrate_bps;
  }
}

}  // namespace sim_detail

inline LabeledTraceSet simulate(const Scenario& scenario) {
  scenario.validate();
  LabeledTraceSet out;
  const std::int64_t span_end = to_us(scenario.duration_s);

  for (std::size_t di = 0; di < scenario.devices.size(); ++di) {
    DeviceModel dm = scenario.devices[di];
    bool zero_mac = std::all_of(dm.address.mac.begin(), dm.address.mac.end(),
                                [](std::uint8_t b) { return b == 0; });
    if (zero_mac) dm.address = address_for(dm.name, static_cast<int>(di) + 1);

    std::uint64_t dev_key =
        sim_detail::fnv1a(dm.name) ^ sim_detail::mix64(di + 1);
    std::vector<PacketRecord> pkts;

    for (std::size_t bi = 0; bi < dm.idle_bursts.size(); ++bi) {
      auto eng = sim_detail::engine_for(scenario.seed, dev_key,
                                        sim_detail::kIdleStream + bi);
      sim_detail::emit_idle_stream(dm.idle_bursts[bi], scenario.duration_s, eng, pkts);
    }

    for (std::size_t ei = 0; ei < scenario.events.size(); ++ei) {
      const auto& ev = scenario.events[ei];
      std::string key = ev.activation_key();
      double p = dm.activation_probability(key);
      auto eng = sim_detail::engine_for(scenario.seed, dev_key,
                                        sim_detail::kEventStream + ei);
      if (std::bernoulli_distribution(p)(eng)) {
        double start = ev.time_s + dm.audio.pre_roll_s;
        double end = std::min(start + utterance_seconds(key) + kAudioTrailerSeconds,
                              scenario.duration_s);
        if (start < end) {
          sim_detail::emit_audio_stream(dm.audio, start, end, eng, pkts);
          out.labels.push_back({dm.address, {to_us(start), to_us(end)}, key});
        }
      }
    }

    std::stable_sort(pkts.begin(), pkts.end(),
                     [](const PacketRecord& a, const PacketRecord& b) {
                       return a.t_us < b.t_us;
                     });
    out.traces.push_back(DeviceTrace::build(dm.address, std::move(pkts),
                                            TimeSpan{0, span_end}));
  }
  return out;
}

// Lead-in before the first event so the trace starts with settled idle
// traffic; also used as tail room after the last event.
inline constexpr double kScenarioLeadSeconds = 30.0;

inline Scenario controlled_scenario(const DeviceModel& device, double interval_s,
                                    int count, std::uint64_t seed) {
  if (interval_s <= 0.0) throw ParameterError("interval must be positive");
  if (count < 0) throw ParameterError("event count must be non-negative");
  Scenario sc;
  sc.seed = seed;
  sc.devices = {device};
  sc.duration_s = kScenarioLeadSeconds * 2.0 + interval_s * count;
  std::string word = device.wake_words.empty() ? std::string(kNoiseKey)
                                               : device.wake_words.front();
  EventKind kind = device.wake_words.empty() ? EventKind::Noise : EventKind::WakeWord;
  for (int i = 0; i < count; ++i)
    sc.events.push_back({kScenarioLeadSeconds + interval_s * i, kind,
                         kind == EventKind::WakeWord ? word : std::string()});
  return sc;
}

// Fixed-duration variant: events keep coming at the given interval until the
// horizon. Used to compare reaction strength across invocation frequencies.
inline std::vector<Scenario> interval_family(const DeviceModel& device,
                                             std::span<const double> intervals_s,
                                             double duration_s,
                                             std::uint64_t seed) {
  if (duration_s <= 0.0) throw ParameterError("family duration must be positive");
  std::vector<Scenario> family;
  for (std::size_t i = 0; i < intervals_s.size(); ++i) {
    double interval = intervals_s[i];
    if (interval <= 0.0) throw ParameterError("interval must be positive");
    Scenario sc;
    sc.seed = sim_detail::mix64(seed + i);
    sc.devices = {device};
    sc.duration_s = duration_s;
    std::string word = device.wake_words.empty() ? std::string(kNoiseKey)
                                                 : device.wake_words.front();
    EventKind kind =
        device.wake_words.empty() ? EventKind::Noise : EventKind::WakeWord;
    for (double t = kScenarioLeadSeconds; t + 10.0 < duration_s; t += interval)
      sc.events.push_back({t, kind,
                           kind == EventKind::WakeWord ? word : std::string()});
    family.push_back(std::move(sc));
  }
  return family;
}

// Stock device fleet. Idle signatures differ per device but share the same
// structure: a dense keepalive stream (narrow sizes, keeps histogram bins
// stable), a telemetry burst every tens of seconds, a sparse large-packet
// sync stream (pins the upper end of the size range), and a rare medium
// burst that exceeds the audio rate threshold for a single window.
inline std::vector<DeviceModel> make_device_library() {
  std::vector<DeviceModel> lib;
  auto add = [&lib](DeviceModel m) {
    m.address = address_for(m.name, static_cast<int>(lib.size()) + 1);
    m.validate();
    lib.push_back(std::move(m));
  };

  DeviceModel echo;
  echo.name = "EchoDot";
  echo.idle_bursts = {
      {1.5, 0.2, 100.0, 4.0, 0.0, {100.0, 4.0}, 0.0},
      {20.0, 0.1, 990.0, 90.0, 0.35, {330.0, 60.0}, 140.0},
      {15.0, 0.12, 1292.0, 18.0, 0.0, {1292.0, 18.0}, 0.0},
      {300.0, 0.08, 6200.0, 350.0, 0.8, {880.0, 70.0}, 0.0},
  };
  echo.audio = {256000.0, {1200.0, 150.0}, 0.35, 4};
  echo.wake_words = {"alexa"};
  echo.activation_model = {{"alexa", 1.0}};
  add(echo);

  DeviceModel ghome;
  ghome.name = "GoogleHome";
  ghome.idle_bursts = {
      {2.0, 0.2, 120.0, 5.0, 0.0, {120.0, 5.0}, 0.0},
      {25.0, 0.1, 1040.0, 80.0, 0.3, {260.0, 50.0}, 150.0},
      {18.0, 0.12, 1255.0, 20.0, 0.0, {1255.0, 20.0}, 0.0},
      {240.0, 0.08, 6400.0, 300.0, 0.7, {910.0, 60.0}, 0.0},
  };
  ghome.audio = {192000.0, {1150.0, 140.0}, 0.3, 4};
  ghome.wake_words = {"hey google", "ok google"};
  ghome.activation_model = {{"hey google", 1.0}, {"ok google", 1.0}};
  add(ghome);

  DeviceModel hpod;
  hpod.name = "HomePod";
  hpod.idle_bursts = {
      {1.2, 0.2, 92.0, 4.0, 0.0, {92.0, 4.0}, 0.0},
      {30.0, 0.1, 900.0, 70.0, 0.4, {300.0, 55.0}, 130.0},
      {12.0, 0.12, 1270.0, 16.0, 0.0, {1270.0, 16.0}, 0.0},
      {360.0, 0.08, 5900.0, 280.0, 0.9, {840.0, 65.0}, 0.0},
  };
  hpod.audio = {224000.0, {1230.0, 140.0}, 0.4, 4};
  hpod.wake_words = {"hey siri"};
  hpod.activation_model = {{"hey siri", 1.0}};
  add(hpod);

  DeviceModel hive;
  hive.name = "HiveHub360";
  hive.idle_bursts = {
      {1.8, 0.2, 108.0, 5.0, 0.0, {108.0, 5.0}, 0.0},
      {22.0, 0.1, 1020.0, 85.0, 0.3, {340.0, 60.0}, 145.0},
      {16.0, 0.12, 1282.0, 18.0, 0.0, {1282.0, 18.0}, 0.0},
      {300.0, 0.08, 6100.0, 300.0, 0.8, {870.0, 70.0}, 0.0},
  };
  hive.audio = {160000.0, {1190.0, 150.0}, 0.3, 4};
  hive.wake_words = {};  // reacts to noise, not speech
  hive.activation_model = {{kNoiseKey, 1.0}};
  add(hive);

  DeviceModel welcome;
  welcome.name = "NetatmoWelcome";
  welcome.idle_bursts = {
      {1.6, 0.2, 96.0, 4.0, 0.0, {96.0, 4.0}, 0.0},
      {26.0, 0.1, 960.0, 80.0, 0.35, {320.0, 55.0}, 0.0},
      {14.0, 0.12, 1268.0, 16.0, 0.0, {1268.0, 16.0}, 0.0},
      {330.0, 0.08, 5700.0, 260.0, 0.7, {860.0, 60.0}, 0.0},
  };
  welcome.audio = {200000.0, {1210.0, 140.0}, 0.3, 4};
  welcome.activation_model = {{kNoiseKey, 0.95}};
  add(welcome);

  DeviceModel presence;
  presence.name = "NetatmoPresence";
  presence.idle_bursts = {
      {1.7, 0.2, 102.0, 4.0, 0.0, {102.0, 4.0}, 0.0},
      {24.0, 0.1, 1000.0, 85.0, 0.3, {310.0, 55.0}, 0.0},
      {17.0, 0.12, 1275.0, 17.0, 0.0, {1275.0, 17.0}, 0.0},
      {345.0, 0.08, 5800.0, 270.0, 0.75, {850.0, 65.0}, 0.0},
  };
  presence.audio = {200000.0, {1205.0, 140.0}, 0.3, 4};
  presence.activation_model = {{kNoiseKey, 0.95}};
  add(presence);

  DeviceModel hview;
  hview.name = "HiveView";
  hview.idle_bursts = {
      {1.4, 0.2, 94.0, 4.0, 0.0, {94.0, 4.0}, 0.0},
      {28.0, 0.1, 930.0, 75.0, 0.4, {290.0, 50.0}, 0.0},
      {13.0, 0.12, 1262.0, 15.0, 0.0, {1262.0, 15.0}, 0.0},
      {320.0, 0.08, 5600.0, 250.0, 0.8, {830.0, 60.0}, 0.0},
  };
  hview.audio = {224000.0, {1215.0, 145.0}, 0.3, 4};
  hview.activation_model = {{kNoiseKey, 0.9}};
  add(hview);

  // Stays quiet for hours at a time; a probe session sees no packets at all.
  DeviceModel nest;
  nest.name = "NestProtect";
  nest.idle_bursts = {
      {36000.0, 0.05, 4000.0, 250.0, 2.0, {800.0, 120.0}, 0.0},
  };
  nest.audio = {96000.0, {900.0, 100.0}, 0.5, 0};
  nest.activation_model = {};
  add(nest);

  return lib;
}

inline const std::vector<DeviceModel>& device_library() {
  static const std::vector<DeviceModel> lib = make_device_library();
  return lib;
}

inline const DeviceModel& device_model(std::string_view name) {
  for (const auto& m : device_library())
    if (m.name == name) return m;
  std::string msg = "unknown device model '" + std::string(name) + "'; have:";
  for (const auto& m : device_library()) msg += " " + m.name;
  throw ParameterError(msg);
}

}  // namespace audioleak
