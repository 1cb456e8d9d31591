// Command-line frontend: capture ingest, burst detection, statistical
// probing, traffic simulation, wake-word fuzzing, and ROC sweeps over the
// same JSON/CSV formats the library tests use.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <audioleak/burst.hpp>
#include <audioleak/metrics.hpp>
#include <audioleak/serialize.hpp>

using namespace audioleak;

namespace {

DirectionFilter parse_dir(const std::string& s) {
  if (s == "out") return DirectionFilter::Outbound;
  if (s == "in") return DirectionFilter::Inbound;
  if (s == "both") return DirectionFilter::Both;
  throw ParameterError("direction must be out, in, or both");
}

std::vector<CidrPrefix> parse_networks(const std::vector<std::string>& nets) {
  std::vector<CidrPrefix> out;
  for (const auto& n : nets) out.push_back(CidrPrefix::parse(n));
  return out;
}

std::vector<DeviceModel> fleet_from_names(const std::vector<std::string>& names) {
  std::vector<DeviceModel> fleet;
  if (names.empty()) return device_library();
  for (const auto& n : names) fleet.push_back(device_model(n));
  return fleet;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open output file: " + path);
  out << text;
}

struct IngestArgs {
  std::string pcap;
  std::vector<std::string> networks;
  std::string out;
};

int run_ingest(const IngestArgs& args) {
  auto result = ingest_pcap(args.pcap, parse_networks(args.networks));
  save_json(args.out, traces_to_json(result.traces));
  const auto& r = result.report;
  std::printf("%zu device(s), %llu packet(s), %llu dropped, %.1f s span%s\n",
              r.device_count, static_cast<unsigned long long>(r.packet_count),
              static_cast<unsigned long long>(r.dropped),
              to_seconds(r.span.length_us()),
              r.truncated ? " (truncated capture)" : "");
  for (const auto& t : result.traces)
    std::printf("  %s %s  %zu packet(s)\n", t.device().mac_string().c_str(),
                t.device().ip.c_str(), t.packets().size());
  return 0;
}

struct BurstArgs {
  std::string traces;
  double s_w = 1.0;
  double b_audio = 23000.0;
  int n = 5;
  std::string dir = "out";
  std::string labels;
  std::string out;
};

int run_detect_burst(const BurstArgs& args) {
  auto traces = traces_from_json(load_json(args.traces));
  BurstParams params;
  params.s_w = args.s_w;
  params.b_audio_bps = args.b_audio;
  params.n = args.n;
  params.filter = parse_dir(args.dir);

  std::vector<BurstEvent> events;
  for (const auto& t : traces) {
    auto found = detect_bursts(t, params);
    events.insert(events.end(), found.begin(), found.end());
  }
  for (const auto& e : events)
    std::printf("%s  %.1f .. %.1f s  peak %.0f bps  %d window(s)\n",
                e.device.mac_string().c_str(), to_seconds(e.span.start_us),
                to_seconds(e.span.end_us), e.peak_rate_bps, e.window_count);
  std::printf("%zu burst event(s)\n", events.size());
  if (!args.out.empty()) save_json(args.out, bursts_to_json(events));

  if (!args.labels.empty()) {
    auto labels = labels_from_json(load_json(args.labels));
    auto sweep = sweep_n(traces, labels, params, params.n, params.n);
    auto rates = rate_point(params.n, sweep[0].per_device);
    std::printf("window-level tpr %.3f fpr %.3f  events: %llu hit, %llu false, "
                "%llu missed label(s)\n",
                rates.tpr, rates.fpr,
                static_cast<unsigned long long>(sweep[0].event_tp),
                static_cast<unsigned long long>(sweep[0].event_fp),
                static_cast<unsigned long long>(sweep[0].event_fn));
  }
  return 0;
}

struct ScanArgs {
  std::string traces;
  double window = 30.0;
  double threshold = 0.42;
  bool combine_iat = false;
  std::string dir = "out";
  std::string out;
};

int run_stat_scan(const ScanArgs& args) {
  auto traces = traces_from_json(load_json(args.traces));
  ProbeOptions opts;
  opts.threshold = args.threshold;
  opts.combine_iat = args.combine_iat;
  opts.filter = parse_dir(args.dir);

  std::ostringstream csv;
  bool header = true;
  std::size_t flagged = 0, tested = 0;
  for (const auto& t : traces) {
    auto points = sliding_scan(t, args.window, opts);
    for (const auto& sp : points) {
      if (sp.skipped) continue;
      ++tested;
      if (sp.cmp.reactive) ++flagged;
    }
    write_pvalues_csv(csv, t.device(), points, header);
    header = false;
  }
  if (args.out.empty())
    std::fputs(csv.str().c_str(), stdout);
  else
    write_text_file(args.out, csv.str());
  std::fprintf(stderr, "%zu window pair(s) tested, %zu below %.2f\n", tested,
               flagged, args.threshold);
  return 0;
}

struct ProbeArgs {
  std::string plan;
  std::string capture = "sim";
  std::vector<std::string> fleet;
  std::uint64_t seed = 1;
  std::string session_out;
  std::string verdicts_out;
  std::string format = "text";
  std::string config;
  std::string player = "aplay -q {file}";
  std::string stream;
};

int run_probe(const ProbeArgs& args) {
  auto plan = plan_from_toml(toml::parse_file(args.plan));
  ProbeSession session;
  if (args.capture == "sim") {
    auto fleet = fleet_from_names(args.fleet);
    session = run_session_sim(plan, fleet, args.seed);
  } else if (args.capture == "live") {
    if (args.config.empty() || args.stream.empty())
      throw ParameterError("live capture needs --config and --stream");
    auto cfg = live_config_from_toml(toml::parse_file(args.config));
    CommandSink sink(args.player);
    PcapTailSource source(args.stream);
    SystemClock clock;
    session = run_session_live(plan, sink, source, clock, cfg);
  } else {
    throw ParameterError("capture mode must be sim or live");
  }

  if (!args.session_out.empty()) save_json(args.session_out, session_to_json(session));
  auto verdicts = judge(session);
  if (!args.verdicts_out.empty())
    save_json(args.verdicts_out, verdicts_to_json(verdicts));
  std::fputs(report(verdicts, args.format == "json" ? ReportFormat::Json
                                                    : ReportFormat::Text)
                 .c_str(),
             stdout);
  if (session.partial)
    std::fprintf(stderr, "session ended early: %d of %zu word(s) completed\n",
                 session.words_completed, plan.words.size());
  return 0;
}

struct SimulateArgs {
  std::string scenario;
  std::int64_t seed = -1;
  std::string pcap;
  std::string labels;
  std::string traces;
};

int run_simulate(const SimulateArgs& args) {
  auto scenario = scenario_from_toml(toml::parse_file(args.scenario));
  if (args.seed >= 0) scenario.seed = static_cast<std::uint64_t>(args.seed);
  auto set = simulate(scenario);
  std::size_t packets = 0;
  for (const auto& t : set.traces) packets += t.packets().size();
  std::printf("%zu device(s), %zu packet(s), %zu labeled activation(s)\n",
              set.traces.size(), packets, set.labels.size());
  if (!args.pcap.empty()) write_pcap(set.traces, args.pcap);
  if (!args.labels.empty()) save_json(args.labels, labels_to_json(set.labels));
  if (!args.traces.empty()) save_json(args.traces, traces_to_json(set.traces));
  return 0;
}

struct FuzzArgs {
  std::string dict;
  std::string target = "alexa";
  std::vector<int> phonemes;
  int tolerance = 0;
  std::string oracle = "sim";
  std::string probs;
  std::string log;
  int trials = 10;
  int min_activations = 2;
  std::uint64_t seed = 1;
  double timeout_rate = 0.0;
  std::string out;
};

int run_fuzz(const FuzzArgs& args) {
  DictParseReport parse_report;
  auto dict = load_dictionary(args.dict, &parse_report);
  if (parse_report.skipped)
    std::fprintf(stderr, "skipped %zu malformed dictionary line(s)\n",
                 parse_report.skipped);

  std::vector<WakeWordCandidate> candidates;
  if (!args.phonemes.empty()) {
    std::set<int> counts(args.phonemes.begin(), args.phonemes.end());
    candidates = select_candidates_by_counts(dict, args.target, counts);
  } else {
    candidates = select_candidates(dict, args.target, args.tolerance);
  }
  std::printf("%zu candidate(s) for \"%s\" (code %s)\n", candidates.size(),
              args.target.c_str(), metaphone(args.target).c_str());

  std::unique_ptr<ActivationOracle> oracle;
  std::ifstream log_stream;
  if (args.oracle == "sim") {
    std::map<std::string, double> probs;
    if (!args.probs.empty()) {
      auto j = load_json(args.probs);
      for (auto& [word, p] : j.at("probabilities").items())
        probs[word] = p.get<double>();
    }
    oracle = std::make_unique<SimulatorOracle>(std::move(probs), args.seed,
                                               args.timeout_rate);
  } else if (args.oracle == "sensor-log") {
    if (args.log.empty()) throw ParameterError("sensor-log oracle needs --log");
    log_stream.open(args.log);
    if (!log_stream) throw FormatError("cannot open sensor log: " + args.log);
    oracle = std::make_unique<SensorLogOracle>(log_stream);
  } else {
    throw ParameterError("oracle must be sim or sensor-log");
  }

  CampaignOptions options;
  options.trials_per_word = args.trials;
  options.min_activations = args.min_activations;
  auto result = run_campaign(candidates, args.target, *oracle, options);

  std::printf("%zu word(s) probed, %zu activate the device\n",
              result.words.size(), result.discovered.size());
  for (const auto& [dist, count] : result.histogram)
    std::printf("  distance %d: %d word(s)\n", dist, count);
  if (!args.out.empty()) save_json(args.out, fuzz_report_to_json(result));
  return 0;
}

struct RocArgs {
  std::string mode;
  std::string traces;
  std::string labels;
  std::string out;
  double s_w = 1.0;
  double b_audio = 23000.0;
  int n_min = 1;
  int n_max = 8;
  double window = 30.0;
  double t_min = 0.05;
  double t_max = 0.95;
  double t_step = 0.05;
};

int run_roc(const RocArgs& args) {
  auto traces = traces_from_json(load_json(args.traces));
  auto labels = labels_from_json(load_json(args.labels));

  std::vector<RatePoint> points;
  if (args.mode == "burst") {
    BurstParams base;
    base.s_w = args.s_w;
    base.b_audio_bps = args.b_audio;
    auto sweep = sweep_n(traces, labels, base, args.n_min, args.n_max);
    for (const auto& sp : sweep)
      points.push_back(rate_point(sp.n, sp.per_device));
  } else if (args.mode == "stat") {
    std::vector<std::vector<ScanPoint>> scans;
    std::vector<std::vector<TimeSpan>> spans;
    for (const auto& t : traces) {
      scans.push_back(sliding_scan(t, args.window));
      std::vector<TimeSpan> mine;
      for (const auto& l : labels)
        if (l.device == t.device()) mine.push_back(l.span);
      spans.push_back(std::move(mine));
    }
    for (double th = args.t_min; th <= args.t_max + 1e-9; th += args.t_step) {
      std::vector<ConfusionCounts> counts;
      for (std::size_t i = 0; i < scans.size(); ++i)
        counts.push_back(scan_confusion(scans[i], spans[i], th));
      points.push_back(rate_point(th, counts));
    }
  } else {
    throw ParameterError("mode must be burst or stat");
  }

  std::ostringstream csv;
  write_roc_csv(csv, points);
  if (args.out.empty())
    std::fputs(csv.str().c_str(), stdout);
  else
    write_text_file(args.out, csv.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"audio leak detector: finds devices that stream audio home"};
  app.require_subcommand(1);

  IngestArgs ingest_args;
  auto* ingest_cmd = app.add_subcommand("ingest", "convert a pcap into traces.json");
  ingest_cmd->add_option("pcap", ingest_args.pcap, "capture file")->required();
  ingest_cmd->add_option("--local-net", ingest_args.networks,
                         "local network prefix, e.g. 192.168.0.0/24")
      ->required();
  ingest_cmd->add_option("--out", ingest_args.out, "output json path")->required();

  BurstArgs burst_args;
  auto* burst_cmd = app.add_subcommand("detect-burst", "flag sustained traffic bursts");
  burst_cmd->add_option("traces", burst_args.traces, "traces.json")->required();
  burst_cmd->add_option("--sw", burst_args.s_w, "window length, seconds");
  burst_cmd->add_option("--baudio", burst_args.b_audio, "rate threshold, bits/s");
  burst_cmd->add_option("--n", burst_args.n, "consecutive windows per event");
  burst_cmd->add_option("--dir", burst_args.dir, "out, in, or both");
  burst_cmd->add_option("--labels", burst_args.labels, "labels.json for scoring");
  burst_cmd->add_option("--out", burst_args.out, "bursts.json output");

  ScanArgs scan_args;
  auto* scan_cmd = app.add_subcommand("stat-scan", "t-test sliding window scan");
  scan_cmd->add_option("traces", scan_args.traces, "traces.json")->required();
  scan_cmd->add_option("--window", scan_args.window, "window length, seconds");
  scan_cmd->add_option("--threshold", scan_args.threshold, "p-value cutoff");
  scan_cmd->add_flag("--combine-iat", scan_args.combine_iat,
                     "also test inter-arrival times");
  scan_cmd->add_option("--dir", scan_args.dir, "out, in, or both");
  scan_cmd->add_option("--out", scan_args.out, "pvalues.csv output (default stdout)");

  ProbeArgs probe_args;
  auto* probe_cmd = app.add_subcommand("probe", "run a probing session and judge it");
  probe_cmd->add_option("--plan", probe_args.plan, "plan.toml")->required();
  probe_cmd->add_option("--capture", probe_args.capture, "sim or live");
  probe_cmd->add_option("--fleet", probe_args.fleet,
                        "simulated device models (default: whole library)");
  probe_cmd->add_option("--seed", probe_args.seed, "simulation seed");
  probe_cmd->add_option("--session", probe_args.session_out, "session.json output");
  probe_cmd->add_option("--verdicts", probe_args.verdicts_out, "verdicts.json output");
  probe_cmd->add_option("--format", probe_args.format, "text or json");
  probe_cmd->add_option("--config", probe_args.config, "live capture toml");
  probe_cmd->add_option("--player", probe_args.player,
                        "playback command, {file} placeholder");
  probe_cmd->add_option("--stream", probe_args.stream, "growing pcap to follow");

  SimulateArgs sim_args;
  auto* sim_cmd = app.add_subcommand("simulate", "generate traffic from a scenario");
  sim_cmd->add_option("--scenario", sim_args.scenario, "scenario.toml")->required();
  sim_cmd->add_option("--seed", sim_args.seed, "override the scenario seed");
  sim_cmd->add_option("--pcap", sim_args.pcap, "write an Ethernet/IPv4/UDP pcap");
  sim_cmd->add_option("--labels", sim_args.labels, "labels.json output");
  sim_cmd->add_option("--traces", sim_args.traces, "traces.json output");

  FuzzArgs fuzz_args;
  auto* fuzz_cmd = app.add_subcommand("fuzz", "search a dictionary for words that wake a device");
  fuzz_cmd->add_option("--dict", fuzz_args.dict, "pronouncing dictionary")->required();
  fuzz_cmd->add_option("--target", fuzz_args.target, "wake word under test");
  fuzz_cmd->add_option("--phonemes", fuzz_args.phonemes,
                       "candidate phoneme counts, e.g. 5 6");
  fuzz_cmd->add_option("--tolerance", fuzz_args.tolerance,
                       "phoneme count band around the target");
  fuzz_cmd->add_option("--oracle", fuzz_args.oracle, "sim or sensor-log");
  fuzz_cmd->add_option("--probs", fuzz_args.probs, "activation probability json");
  fuzz_cmd->add_option("--log", fuzz_args.log, "recorded sensor log");
  fuzz_cmd->add_option("--trials", fuzz_args.trials, "utterances per word");
  fuzz_cmd->add_option("--min-activations", fuzz_args.min_activations,
                       "activations needed to report a word");
  fuzz_cmd->add_option("--seed", fuzz_args.seed, "oracle seed");
  fuzz_cmd->add_option("--timeout-rate", fuzz_args.timeout_rate,
                       "simulated flaky trial rate");
  fuzz_cmd->add_option("--out", fuzz_args.out, "fuzz_report.json output");

  RocArgs roc_args;
  auto* roc_cmd = app.add_subcommand("roc", "sweep a detector parameter against labels");
  roc_cmd->add_option("--mode", roc_args.mode, "burst or stat")->required();
  roc_cmd->add_option("--traces", roc_args.traces, "traces.json")->required();
  roc_cmd->add_option("--labels", roc_args.labels, "labels.json")->required();
  roc_cmd->add_option("--out", roc_args.out, "roc.csv output (default stdout)");
  roc_cmd->add_option("--sw", roc_args.s_w, "burst: window length, seconds");
  roc_cmd->add_option("--baudio", roc_args.b_audio, "burst: rate threshold");
  roc_cmd->add_option("--n-min", roc_args.n_min, "burst: smallest run length");
  roc_cmd->add_option("--n-max", roc_args.n_max, "burst: largest run length");
  roc_cmd->add_option("--window", roc_args.window, "stat: scan window, seconds");
  roc_cmd->add_option("--t-min", roc_args.t_min, "stat: lowest threshold");
  roc_cmd->add_option("--t-max", roc_args.t_max, "stat: highest threshold");
  roc_cmd->add_option("--t-step", roc_args.t_step, "stat: threshold step");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest_cmd) return run_ingest(ingest_args);
    if (*burst_cmd) return run_detect_burst(burst_args);
    if (*scan_cmd) return run_stat_scan(scan_args);
    if (*probe_cmd) return run_probe(probe_args);
    if (*sim_cmd) return run_simulate(sim_args);
    if (*fuzz_cmd) return run_fuzz(fuzz_args);
    if (*roc_cmd) return run_roc(roc_args);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
