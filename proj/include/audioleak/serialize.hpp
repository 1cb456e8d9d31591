#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include <audioleak/fuzzer.hpp>
#include <audioleak/orchestrator.hpp>
#include <audioleak/pcap.hpp>
#include <audioleak/toml_lite.hpp>

// JSON/CSV schemas for everything the command-line tools exchange, plus the
// TOML bindings for plan and scenario files. Kept in one place so the file
// formats stay consistent across subcommands.

namespace audioleak {

using ordered_json = nlohmann::ordered_json;

namespace ser_detail {

inline const char* dir_name(Direction d) {
  return d == Direction::Outbound ? "out" : "in";
}

inline Direction dir_from(const std::string& s) {
  if (s == "out") return Direction::Outbound;
  if (s == "in") return Direction::Inbound;
  throw FormatError("unknown packet direction: " + s);
}

[[noreturn]] inline void rethrow(const char* what, const std::exception& e) {
  throw FormatError(std::string("malformed ") + what + ": " + e.what());
}

}  // namespace ser_detail

inline ordered_json to_json(const DeviceAddress& a) {
  ordered_json j{{"mac", a.mac_string()}};
  if (!a.ip.empty()) j["ip"] = a.ip;
  return j;
}

inline DeviceAddress address_from_json(const ordered_json& j) {
  return DeviceAddress::from_mac(j.at("mac").get<std::string>(),
                                 j.value("ip", std::string{}));
}

inline ordered_json to_json(const TimeSpan& s) {
  return ordered_json{{"start_us", s.start_us}, {"end_us", s.end_us}};
}

inline TimeSpan span_from_json(const ordered_json& j) {
  return TimeSpan{j.at("start_us").get<std::int64_t>(),
                  j.at("end_us").get<std::int64_t>()};
}

inline ordered_json to_json(const DeviceTrace& t) {
  ordered_json packets = ordered_json::array();
  for (const auto& p : t.packets())
    packets.push_back(ordered_json{
        {"t_us", p.t_us}, {"size", p.size}, {"dir", ser_detail::dir_name(p.dir)}});
  return ordered_json{{"device", to_json(t.device())},
                      {"span", to_json(t.span())},
                      {"packets", std::move(packets)}};
}

inline DeviceTrace trace_from_json(const ordered_json& j) {
  std::vector<PacketRecord> packets;
  for (const auto& p : j.at("packets")) {
    PacketRecord r;
    r.t_us = p.at("t_us").get<std::int64_t>();
    r.size = p.at("size").get<std::uint32_t>();
    r.dir = ser_detail::dir_from(p.at("dir").get<std::string>());
    packets.push_back(r);
  }
  return DeviceTrace::build(address_from_json(j.at("device")), std::move(packets),
                            span_from_json(j.at("span")));
}

inline ordered_json traces_to_json(std::span<const DeviceTrace> traces) {
  ordered_json arr = ordered_json::array();
  for (const auto& t : traces) arr.push_back(to_json(t));
  return arr;
}

inline std::vector<DeviceTrace> traces_from_json(const ordered_json& j) {
  try {
    std::vector<DeviceTrace> traces;
    for (const auto& t : j) traces.push_back(trace_from_json(t));
    return traces;
  } catch (const ordered_json::exception& e) {
    ser_detail::rethrow("trace file", e);
  }
}

inline ordered_json labels_to_json(std::span<const LabelInterval> labels) {
  ordered_json arr = ordered_json::array();
  for (const auto& l : labels)
    arr.push_back(ordered_json{{"device", to_json(l.device)},
                               {"span", to_json(l.span)},
                               {"cause", l.cause}});
  return arr;
}

inline std::vector<LabelInterval> labels_from_json(const ordered_json& j) {
  try {
    std::vector<LabelInterval> labels;
    for (const auto& l : j) {
      LabelInterval li;
      li.device = address_from_json(l.at("device"));
      li.span = span_from_json(l.at("span"));
      li.cause = l.value("cause", std::string{});
      labels.push_back(std::move(li));
    }
    return labels;
  } catch (const ordered_json::exception& e) {
    ser_detail::rethrow("label file", e);
  }
}

inline ordered_json to_json(const BurstEvent& b) {
  return ordered_json{{"device", to_json(b.device)},
                      {"span", to_json(b.span)},
                      {"peak_rate_bps", b.peak_rate_bps},
                      {"window_count", b.window_count}};
}

inline ordered_json bursts_to_json(std::span<const BurstEvent> events) {
  ordered_json arr = ordered_json::array();
  for (const auto& b : events) arr.push_back(to_json(b));
  return arr;
}

inline ordered_json to_json(const IngestReport& r) {
  return ordered_json{{"devices", r.device_count},
                      {"packets", r.packet_count},
                      {"dropped", r.dropped},
                      {"span", to_json(r.span)},
                      {"truncated", r.truncated}};
}

inline ordered_json to_json(const ProbePlan& plan) {
  ordered_json words = ordered_json::array();
  for (const auto& w : plan.words)
    words.push_back(ordered_json{{"text", w.text}, {"audio", w.audio_path}});
  ordered_json devices = ordered_json::array();
  for (const auto& d : plan.devices) devices.push_back(d.mac_string());
  return ordered_json{{"words", std::move(words)},
                      {"window_d", plan.window_d},
                      {"repeat_every", plan.repeat_every},
                      {"repetitions", plan.repetitions},
                      {"threshold", plan.threshold},
                      {"devices", std::move(devices)}};
}

inline ProbePlan plan_from_json(const ordered_json& j) {
  ProbePlan plan;
  for (const auto& w : j.at("words")) {
    ProbeWord pw;
    pw.text = w.at("text").get<std::string>();
    pw.audio_path = w.value("audio", std::string{});
    plan.words.push_back(std::move(pw));
  }
  plan.window_d = j.at("window_d").get<double>();
  plan.repeat_every = j.at("repeat_every").get<double>();
  plan.repetitions = j.at("repetitions").get<int>();
  plan.threshold = j.at("threshold").get<double>();
  for (const auto& mac : j.value("devices", ordered_json::array()))
    plan.devices.push_back(DeviceAddress::from_mac(mac.get<std::string>()));
  return plan;
}

inline ordered_json to_json(const SessionWindow& w) {
  return ordered_json{
      {"kind", w.kind == WindowKind::Idle ? "idle" : "probe"},
      {"word", w.word},
      {"span", to_json(w.span)},
      {"emissions", w.emissions}};
}

inline ordered_json session_to_json(const ProbeSession& s) {
  ordered_json timeline = ordered_json::array();
  for (const auto& w : s.timeline) timeline.push_back(to_json(w));
  return ordered_json{{"plan", to_json(s.plan)},
                      {"timeline", std::move(timeline)},
                      {"capture", traces_to_json(s.capture)},
                      {"partial", s.partial},
                      {"words_completed", s.words_completed}};
}

inline ProbeSession session_from_json(const ordered_json& j) {
  try {
    ProbeSession s;
    s.plan = plan_from_json(j.at("plan"));
    for (const auto& w : j.at("timeline")) {
      SessionWindow win;
      const auto kind = w.at("kind").get<std::string>();
      if (kind == "idle") win.kind = WindowKind::Idle;
      else if (kind == "probe") win.kind = WindowKind::Probe;
      else throw FormatError("unknown window kind: " + kind);
      win.word = w.value("word", std::string{});
      win.span = span_from_json(w.at("span"));
      win.emissions = w.value("emissions", std::vector<std::int64_t>{});
      s.timeline.push_back(std::move(win));
    }
    s.capture = traces_from_json(j.at("capture"));
    s.partial = j.value("partial", false);
    s.words_completed = j.value("words_completed", 0);
    return s;
  } catch (const ordered_json::exception& e) {
    ser_detail::rethrow("session file", e);
  }
}

inline ordered_json to_json(const ProbeComparison& c) {
  ordered_json j;
  j["p_size"] = c.p_size;
  j["p_iat"] = c.p_iat ? ordered_json(*c.p_iat) : ordered_json(nullptr);
  j["p_combined"] = c.p_combined;
  j["t_size"] = c.t_size;
  j["df_size"] = c.df_size;
  j["reactive"] = c.reactive;
  return j;
}

inline ordered_json to_json(const DetectionVerdict& v) {
  ordered_json ps = ordered_json::array();
  for (double p : v.p_values)
    ps.push_back(std::isnan(p) ? ordered_json(nullptr) : ordered_json(p));
  ordered_json bursts = ordered_json::array();
  for (const auto& b : v.evidence.bursts) bursts.push_back(to_json(b));
  ordered_json comparisons = ordered_json::array();
  for (const auto& c : v.evidence.comparisons) comparisons.push_back(to_json(c));
  return ordered_json{
      {"device", to_json(v.device)},
      {"word", v.word},
      {"p_values", std::move(ps)},
      {"reactive", v.reactive},
      {"silent", v.silent},
      {"insufficient", v.insufficient},
      {"evidence", ordered_json{{"bursts", std::move(bursts)},
                                {"comparisons", std::move(comparisons)}}}};
}

inline ordered_json verdicts_to_json(std::span<const DetectionVerdict> verdicts) {
  ordered_json arr = ordered_json::array();
  for (const auto& v : verdicts) arr.push_back(to_json(v));
  return arr;
}

inline std::vector<double> p_values_from_json(const ordered_json& arr) {
  std::vector<double> ps;
  for (const auto& p : arr)
    ps.push_back(p.is_null() ? std::nan("") : p.get<double>());
  return ps;
}

enum class ReportFormat { Text, Json };

inline std::string verdict_state(const DetectionVerdict& v) {
  if (v.silent) return "silent";
  if (v.insufficient) return "insufficient-data";
  return v.reactive ? "REACTIVE" : "quiet";
}

// Human-readable one-line-per-verdict summary, or the JSON document.
inline std::string report(std::span<const DetectionVerdict> verdicts,
                          ReportFormat format = ReportFormat::Text) {
  if (format == ReportFormat::Json) return verdicts_to_json(verdicts).dump(2) + "\n";
  std::ostringstream out;
  for (const auto& v : verdicts) {
    out << v.device.mac_string() << "  word \"" << v.word << "\"  "
        << verdict_state(v) << "  p =";
    if (v.p_values.empty()) out << " (none)";
    for (double p : v.p_values) {
      if (std::isnan(p)) {
        out << " -";
      } else {
        char buf[16];
        std::snprintf(buf, sizeof buf, " %.4f", p);
        out << buf;
      }
    }
    out << "  bursts = " << v.evidence.bursts.size() << "\n";
  }
  return out.str();
}

inline ordered_json to_json(const WakeWordCandidate& c) {
  return ordered_json{{"word", c.word},
                      {"phonemes", c.phonemes},
                      {"phoneme_count", c.phoneme_count},
                      {"metaphone", c.metaphone_code},
                      {"distance", c.distance},
                      {"trials", c.trials},
                      {"activations", c.activations}};
}

inline ordered_json fuzz_report_to_json(const CampaignResult& r) {
  ordered_json words = ordered_json::array();
  for (const auto& c : r.words) words.push_back(to_json(c));
  ordered_json hist = ordered_json::object();
  for (const auto& [dist, count] : r.histogram)
    hist[std::to_string(dist)] = count;
  return ordered_json{{"target", r.target},
                      {"target_code", r.target_code},
                      {"discovered", r.discovered},
                      {"histogram", std::move(hist)},
                      {"words", std::move(words)}};
}

// csv outputs

inline void write_pvalues_csv(std::ostream& out, const DeviceAddress& device,
                              std::span<const ScanPoint> points,
                              bool header = true) {
  if (header) out << "device,t_start_s,t_end_s,p_size,p_iat,p_combined,reactive\n";
  char buf[64];
  for (const auto& sp : points) {
    if (sp.skipped) continue;
    out << device.mac_string() << ',';
    std::snprintf(buf, sizeof buf, "%.6g,%.6g,", to_seconds(sp.second.start_us),
                  to_seconds(sp.second.end_us));
    out << buf;
    std::snprintf(buf, sizeof buf, "%.6g,", sp.cmp.p_size);
    out << buf;
    if (sp.cmp.p_iat) {
      std::snprintf(buf, sizeof buf, "%.6g", *sp.cmp.p_iat);
      out << buf;
    }
    std::snprintf(buf, sizeof buf, ",%.6g,", sp.cmp.p_combined);
    out << buf << (sp.cmp.reactive ? 1 : 0) << '\n';
  }
}

inline void write_roc_csv(std::ostream& out, std::span<const RatePoint> points) {
  out << "parameter,tpr,fpr\n";
  char buf[80];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof buf, "%.6g,%.6g,%.6g\n", p.parameter, p.tpr, p.fpr);
    out << buf;
  }
}

// file helpers

inline void save_json(const std::string& path, const ordered_json& j) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open output file: " + path);
  out << j.dump(2) << '\n';
}

inline ordered_json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open file: " + path);
  try {
    return ordered_json::parse(in);
  } catch (const ordered_json::exception& e) {
    ser_detail::rethrow(path.c_str(), e);
  }
}

// toml bindings

inline ProbePlan plan_from_toml(const toml::Value& root) {
  ProbePlan plan;
  const toml::Value* words = root.find("words");
  if (!words) throw FormatError("plan needs a [[words]] list");
  for (const auto& w : words->items()) {
    ProbeWord pw;
    pw.text = w.at("text").as_string();
    pw.audio_path = w.string_or("audio", "");
    plan.words.push_back(std::move(pw));
  }
  plan.window_d = root.number_or("window_d", plan.window_d);
  plan.repeat_every = root.number_or("repeat_every", plan.repeat_every);
  plan.repetitions = static_cast<int>(root.int_or("repetitions", plan.repetitions));
  plan.threshold = root.number_or("threshold", plan.threshold);
  for (const auto& mac : root.string_list_or("devices"))
    plan.devices.push_back(DeviceAddress::from_mac(mac));
  plan.validate();
  return plan;
}

// Devices are referenced by library model name; events are wake-word
// emissions or non-speech noise.
inline Scenario scenario_from_toml(const toml::Value& root) {
  Scenario sc;
  sc.duration_s = root.at("duration_s").as_double();
  sc.seed = static_cast<std::uint64_t>(root.int_or("seed", 0));
  for (const auto& name : root.string_list_or("devices"))
    sc.devices.push_back(device_model(name));
  if (const toml::Value* events = root.find("events")) {
    for (const auto& ev : events->items()) {
      ScenarioEvent e;
      e.time_s = ev.at("time_s").as_double();
      const std::string kind = ev.string_or("kind", "wake");
      if (kind == "wake") {
        e.kind = EventKind::WakeWord;
        e.word = ev.at("word").as_string();
      } else if (kind == "noise") {
        e.kind = EventKind::Noise;
      } else {
        throw FormatError("unknown event kind: " + kind);
      }
      sc.events.push_back(std::move(e));
    }
  }
  sc.validate();
  return sc;
}

inline LiveConfig live_config_from_toml(const toml::Value& root) {
  LiveConfig cfg;
  if (const toml::Value* live = root.find("live")) {
    for (const auto& net : live->string_list_or("local_networks"))
      cfg.local_networks.push_back(CidrPrefix::parse(net));
    cfg.poll_interval_s = live->number_or("poll_interval_s", cfg.poll_interval_s);
    cfg.epoch_us = live->int_or("epoch_us", cfg.epoch_us);
  }
  return cfg;
}

}  // namespace audioleak
