// Acceptance gate: one pass/fail line per shipping criterion, nonzero exit
// when any fails. Tolerances are pinned here, not in flags, so a run always
// answers the same question.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include <audioleak/burst.hpp>
#include <audioleak/fuzzer.hpp>
#include <audioleak/histogram.hpp>
#include <audioleak/metrics.hpp>
#include <audioleak/orchestrator.hpp>
#include <audioleak/probe.hpp>
#include <audioleak/simulator.hpp>
#include <audioleak/stats.hpp>

using namespace audioleak;

namespace {

int failures = 0;

void verdict(int idx, bool ok, const std::string& detail) {
  std::printf("[%s] criterion %2d: %s\n", ok ? "PASS" : "FAIL", idx,
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

struct Stopwatch {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string data_path(const char* name) {
  return std::string(AUDIOLEAK_DATA_DIR) + "/" + name;
}

const char* kSpeakers[] = {"EchoDot", "GoogleHome", "HomePod", "HiveHub360"};

// ---- 1. burst-detection ROC on controlled injection scenarios ----
// 100 injections per device model split over 1/5/10 minute spacings; the
// n = 5 sweep point must reach TPR >= 0.90 at FPR <= 0.10 within 60 s.

void criterion_1() {
  Stopwatch clock;
  std::vector<DeviceTrace> traces;
  std::vector<LabelInterval> labels;
  const struct { double interval; int count; } runs[] = {
      {60.0, 60}, {300.0, 25}, {600.0, 15}};
  std::uint64_t seed = 4100;
  int run_idx = 0;
  for (const char* name : kSpeakers) {
    for (const auto& run : runs) {
      auto sc = controlled_scenario(device_model(name), run.interval, run.count, ++seed);
      // one trace per scenario run, so each needs its own address or labels
      // from sibling runs of the same model would bleed across traces
      sc.devices[0].address = address_for(name, 100 + ++run_idx);
      auto set = simulate(sc);
      traces.push_back(std::move(set.traces[0]));
      labels.insert(labels.end(), set.labels.begin(), set.labels.end());
    }
  }
  auto sweep = sweep_n(traces, labels, BurstParams{}, 1, 8);
  const auto& at5 = sweep[4];
  auto rates = rate_point(5, at5.per_device);
  const double secs = clock.seconds();
  const bool ok = rates.tpr >= 0.90 && rates.fpr <= 0.10 && secs <= 60.0 &&
                  labels.size() == 400;
  verdict(1, ok,
          fmt("burst roc, n=5 of 1..8 sweep: tpr=%.3f (>=0.90) fpr=%.5f "
              "(<=0.10), %zu injections, %.1fs (<=60)",
              rates.tpr, rates.fpr, labels.size(), secs));
}

// ---- 2. statistical-probing ROC over 30 s sliding scans ----
// Some threshold in [0.40, 0.45] must reach TPR >= 0.88 at FPR <= 0.12
// within 120 s.

void criterion_2() {
  Stopwatch clock;
  const double intervals[] = {120, 300, 600, 1800, 3600, 7200};
  std::vector<std::vector<ScanPoint>> scans;
  std::vector<std::vector<TimeSpan>> label_spans;
  for (const char* name : kSpeakers) {
    for (double iv : intervals) {
      auto set = simulate(controlled_scenario(
          device_model(name), iv, 6, 4200 + static_cast<std::uint64_t>(iv)));
      scans.push_back(sliding_scan(set.traces[0], 30.0));
      std::vector<TimeSpan> spans;
      for (const auto& l : set.labels) spans.push_back(l.span);
      label_spans.push_back(std::move(spans));
    }
  }
  double best_t = 0, best_tpr = 0, best_fpr = 1;
  bool ok = false;
  for (double t : {0.40, 0.41, 0.42, 0.43, 0.44, 0.45}) {
    ConfusionCounts pooled;
    for (std::size_t i = 0; i < scans.size(); ++i)
      pooled += scan_confusion(scans[i], label_spans[i], t);
    if (!ok && pooled.tpr() >= 0.88 && pooled.fpr() <= 0.12) {
      ok = true;
      best_t = t;
      best_tpr = pooled.tpr();
      best_fpr = pooled.fpr();
    }
  }
  const double secs = clock.seconds();
  ok = ok && secs <= 120.0;
  verdict(2, ok,
          ok ? fmt("statistical roc: threshold %.2f gives tpr=%.3f fpr=%.4f, "
                   "%.1fs (<=120)",
                   best_t, best_tpr, best_fpr, secs)
             : fmt("statistical roc: no threshold in [0.40,0.45] reaches "
                   "tpr>=0.88 fpr<=0.12 (%.1fs)",
                   secs));
}

// ---- 3. p-values fall as invocation frequency rises ----
// Spearman correlation between frequency and median p across six spacings
// from 2 minutes to 2 hours must be <= -0.8 for every device model.

void criterion_3() {
  const double intervals[] = {120, 300, 600, 1800, 3600, 7200};
  const double duration = 7200.0;
  bool ok = true;
  std::string detail = "spearman(frequency, median p):";
  for (const char* name : kSpeakers) {
    const auto& dm = device_model(name);
    std::vector<double> med_p, freq;
    for (double iv : intervals) {
      std::vector<double> ps;
      for (std::uint64_t s = 0; s < 5; ++s) {
        auto fams = interval_family(dm, std::span(&iv, 1), duration, 900 + s * 37);
        auto probed = simulate(fams[0]);
        Scenario idle_sc;
        idle_sc.duration_s = duration;
        idle_sc.devices = {dm};
        idle_sc.seed = 5000 + s * 13 + static_cast<std::uint64_t>(iv);
        auto idle = simulate(idle_sc);
        ps.push_back(compare_traces(idle.traces[0], probed.traces[0]).p_combined);
      }
      med_p.push_back(median(ps));
      freq.push_back(1.0 / iv);
    }
    const double rho = spearman(freq, med_p);
    ok = ok && rho <= -0.8;
    detail += fmt(" %s=%.2f", name, rho);
  }
  verdict(3, ok, detail + " (each <= -0.80)");
}

// ---- 4. probe windows separate from idle windows on the Echo model ----
// 100 idle/probe pairs, wake word every 10 s: median probe p < 0.3 and
// median idle-vs-idle p > 0.3.

void criterion_4() {
  ProbePlan plan;
  plan.words = {{"alexa", ""}};
  plan.window_d = 60.0;
  plan.repeat_every = 10.0;
  plan.repetitions = 100;
  std::vector<DeviceModel> fleet{device_model("EchoDot")};
  auto session = run_session_sim(plan, fleet, 441);
  const auto& trace = session.capture[0];
  const std::int64_t guard = to_us(kWindowGuardSeconds);
  auto inset = [&](const TimeSpan& s) {
    return TimeSpan{s.start_us + guard, s.end_us - guard};
  };

  std::vector<double> probe_p, idle_p;
  for (int i = 0; i < plan.repetitions; ++i) {
    const auto& idle = session.timeline[static_cast<std::size_t>(2 * i)];
    const auto& probe = session.timeline[static_cast<std::size_t>(2 * i + 1)];
    probe_p.push_back(
        compare_windows(trace, inset(idle.span), inset(probe.span)).p_combined);
    if (i + 1 < plan.repetitions) {
      const auto& next_idle = session.timeline[static_cast<std::size_t>(2 * i + 2)];
      idle_p.push_back(
          compare_windows(trace, inset(idle.span), inset(next_idle.span)).p_combined);
    }
  }
  const double mp = median(probe_p);
  const double mi = median(idle_p);
  verdict(4, mp < 0.3 && mi > 0.3,
          fmt("echo separation over %zu pairs: median probe p=%.4f (<0.3), "
              "median idle p=%.4f (>0.3)",
              probe_p.size(), mp, mi));
}

// ---- 5. fleet specificity across 20 seeded runs ----
// "hey google" marks only the GoogleHome model reactive; "major" marks
// nothing; NestProtect is reported silent; zero cross-device false verdicts.

void criterion_5() {
  int wrong = 0, runs = 0;
  const auto& fleet = device_library();
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    for (const char* word : {"hey google", "major"}) {
      ProbePlan plan;
      plan.words = {{word, ""}};
      plan.window_d = 60.0;
      plan.repeat_every = 10.0;
      plan.repetitions = 3;
      auto verdicts = judge(run_session_sim(plan, fleet, seed * 131));
      ++runs;
      for (const auto& v : verdicts) {
        const bool is_google = v.device == fleet[1].address;
        const bool expect_reactive =
            std::string(word) == "hey google" && is_google;
        if (v.reactive != expect_reactive) ++wrong;
        if (v.device == fleet[7].address && !v.silent) ++wrong;
        if (v.insufficient) ++wrong;
      }
    }
  }
  verdict(5, wrong == 0,
          fmt("fleet specificity: %d wrong verdict(s) across %d runs of 8 "
              "devices (need 0)",
              wrong, runs));
}

// ---- 6. t-test agrees with an independent reference ----
// The reference integrates the t density with adaptive Simpson instead of
// the library's continued-fraction incomplete beta.

double ref_t_pdf(double u, double df) {
  const double lc = std::lgamma((df + 1.0) / 2.0) - std::lgamma(df / 2.0) -
                    0.5 * std::log(df * M_PI);
  return std::exp(lc - (df + 1.0) / 2.0 * std::log1p(u * u / df));
}

double simpson_rec(const std::function<double(double)>& f, double a, double m,
                   double b, double fa, double fm, double fb, double whole,
                   double eps, int depth) {
  const double lm = (a + m) / 2, rm = (m + b) / 2;
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6 * (fa + 4 * flm + fm);
  const double right = (b - m) / 6 * (fm + 4 * frm + fb);
  if (depth <= 0 || std::fabs(left + right - whole) < 15 * eps)
    return left + right + (left + right - whole) / 15;
  return simpson_rec(f, a, lm, m, fa, flm, fm, left, eps / 2, depth - 1) +
         simpson_rec(f, m, rm, b, fm, frm, fb, right, eps / 2, depth - 1);
}

double ref_two_tailed_p(double t, double df) {
  const double big = std::fabs(t);
  auto g = [&](double s) {
    if (s >= 1.0) return 0.0;
    const double u = big + s / (1.0 - s);
    return ref_t_pdf(u, df) / ((1.0 - s) * (1.0 - s));
  };
  const double fa = g(0.0), fm = g(0.5), fb = 0.0;
  const double whole = 1.0 / 6.0 * (fa + 4 * fm + fb);
  return 2.0 * simpson_rec(g, 0.0, 0.5, 1.0, fa, fm, fb, whole, 1e-13, 48);
}

double ref_welch_p(std::span<const double> a, std::span<const double> b) {
  auto moments = [](std::span<const double> v, double& m, double& var) {
    m = 0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    var = 0;
    for (double x : v) var += (x - m) * (x - m);
    var /= static_cast<double>(v.size() - 1);
  };
  double ma, va, mb, vb;
  moments(a, ma, va);
  moments(b, mb, vb);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double se2 = va / na + vb / nb;
  const double t = (ma - mb) / std::sqrt(se2);
  const double df = se2 * se2 /
                    (va * va / (na * na * (na - 1)) + vb * vb / (nb * nb * (nb - 1)));
  if (ma == mb) return 1.0;
  return ref_two_tailed_p(t, df);
}

void criterion_6() {
  std::mt19937_64 eng(0x6e57u);
  std::uniform_int_distribution<std::size_t> len(5, 400);
  std::uniform_int_distribution<int> count(0, 40);
  auto draw = [&](std::size_t n) {
    std::vector<double> v(n);
    bool varied = false;
    do {
      for (auto& x : v) x = static_cast<double>(count(eng));
      varied = false;
      for (double x : v) varied = varied || x != v[0];
    } while (!varied);
    return v;
  };
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    auto a = draw(len(eng));
    auto b = draw(len(eng));
    const double p_lib = t_test(a, b).p;
    const double p_ref = ref_welch_p(a, b);
    worst = std::max(worst, std::fabs(p_lib - p_ref));
  }
  std::vector<double> same{3, 1, 4, 1, 5, 9, 2, 6};
  const bool exact_one = t_test(same, same).p == 1.0;
  verdict(6, worst <= 1e-9 && exact_one,
          fmt("welch t-test vs simpson-integrated reference: max |dp|=%.2e "
              "(<=1e-9) over 1000 pairs, identical input p==1 %s",
              worst, exact_one ? "exactly" : "VIOLATED"));
}

// ---- 7. bin count formula ----
// k = max(ceil(log2 m)+1, ceil(range / (2 IQR m^(-1/3)))), exact match on
// 100 random samples.

double ref_quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

std::size_t ref_bin_count(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const double m = static_cast<double>(v.size());
  const double range = v.back() - v.front();
  const std::size_t sturges =
      static_cast<std::size_t>(std::ceil(std::log2(m))) + 1;
  const double iqr = ref_quantile(v, 0.75) - ref_quantile(v, 0.25);
  if (iqr <= 0.0) return sturges;
  const double width = 2.0 * iqr * std::pow(m, -1.0 / 3.0);
  return std::max(sturges, static_cast<std::size_t>(std::ceil(range / width)));
}

void criterion_7() {
  std::mt19937_64 eng(0xb175u);
  std::uniform_int_distribution<std::size_t> len(3, 4000);
  std::uniform_int_distribution<int> family(0, 3);
  std::uniform_real_distribution<double> uni(0.0, 1000.0);
  std::normal_distribution<double> norm(500.0, 50.0);
  std::uniform_int_distribution<int> ints(0, 1500);
  int matches = 0;
  const int total = 100;
  for (int i = 0; i < total; ++i) {
    std::vector<double> v(len(eng));
    const int f = family(eng);
    for (auto& x : v) {
      switch (f) {
        case 0: x = uni(eng); break;
        case 1: x = norm(eng); break;
        case 2: x = static_cast<double>(ints(eng)); break;
        default: x = std::exp(norm(eng) / 150.0); break;
      }
    }
    std::sort(v.begin(), v.end());
    if (v.front() == v.back()) {
      --i;  // degenerate range is covered by unit tests, not this criterion
      continue;
    }
    const std::size_t k_lib = auto_bin_edges(v).size() - 1;
    if (k_lib == ref_bin_count(v)) ++matches;
  }
  verdict(7, matches == total,
          fmt("bin count max(sturges, freedman-diaconis): %d/%d exact "
              "matches",
              matches, total));
}

// ---- 8. idle-vs-idle calibration ----
// At threshold 0.42 the false-reactive rate over >= 500 idle window pairs
// must stay at or below 0.47.

void criterion_8() {
  std::size_t trials = 0, reactive = 0;
  double min_p = 1.0;
  for (const auto& dm : device_library()) {
    if (dm.wake_words.empty() && dm.activation_model.empty()) continue;
    for (std::uint64_t seed = 1; seed <= 2; ++seed) {
      Scenario sc;
      sc.duration_s = 3660.0;
      sc.devices = {dm};
      sc.seed = seed * 977;
      auto set = simulate(sc);
      for (const auto& pt : sliding_scan(set.traces[0], 60.0)) {
        if (pt.skipped) continue;
        ++trials;
        min_p = std::min(min_p, pt.cmp.p_combined);
        if (pt.cmp.reactive) ++reactive;
      }
    }
  }
  const double rate = static_cast<double>(reactive) / static_cast<double>(trials);
  verdict(8, trials >= 500 && rate <= 0.47,
          fmt("idle calibration at 0.42: %zu/%zu reactive (rate %.4f <= "
              "0.47), min p=%.4f",
              reactive, trials, rate, min_p));
}

// ---- 9. fuzzing campaign recovers the measured cohort ----
// All 89 cohort words must activate at least twice; the histogram over
// phonetic distance totals 89 with 47..57 words at distance >= 3. Trials
// per word are raised from the field protocol's 10 to 50 because at 10 the
// weakest cohort words (activation probability 0.2) are found with
// probability 0.62 each, putting a full sweep near 1%; the activation floor
// of 2 is unchanged. The binomial analysis prints alongside.

void criterion_9() {
  auto dict = load_dictionary(data_path("cmudict_small.txt"));
  auto candidates = select_candidates_by_counts(dict, "alexa", {5, 6});

  std::map<std::string, double> probs;
  {
    std::ifstream in(data_path("echo_activation_probs.json"));
    nlohmann::json j;
    in >> j;
    for (auto& [word, p] : j.at("probabilities").items())
      probs[word] = p.get<double>();
  }

  auto p_discovered = [](int n, double p) {
    return 1.0 - std::pow(1.0 - p, n) - n * p * std::pow(1.0 - p, n - 1);
  };
  double run50 = 1.0, run10 = 1.0;
  std::set<std::string> seen;
  for (const auto& c : candidates) {
    if (c.word == "alexa" || !seen.insert(c.word).second) continue;
    run50 *= p_discovered(50, probs.at(c.word));
    run10 *= p_discovered(10, probs.at(c.word));
  }

  SimulatorOracle oracle(probs, 0xa1e4au);
  CampaignOptions options;
  options.trials_per_word = 50;
  auto result = run_campaign(candidates, "alexa", oracle, options);
  int total = 0, far = 0;
  for (const auto& [dist, n] : result.histogram) {
    total += n;
    if (dist >= 3) far += n;
  }
  const bool ok = result.discovered.size() == 89 && total == 89 && far >= 47 &&
                  far <= 57 && run50 >= 0.95;
  verdict(9, ok,
          fmt("fuzzer: %zu/89 words found, %d at distance >=3 (47..57); "
              "P(full sweep)=%.4f at 50 trials (>=0.95; would be %.4f at "
              "the field protocol's 10)",
              result.discovered.size(), far, run50, run10));
}

// ---- 10. pcap round trip at the million-packet scale ----

void criterion_10() {
  Stopwatch clock;
  DeviceModel dm;
  dm.name = "FloodCam";
  dm.idle_bursts = {{0.02, 0.0, 100.0, 4.0, 0.0, {100.0, 4.0}, 0.0}};
  Scenario sc;
  sc.duration_s = 20000.0;
  sc.devices = {dm};
  sc.seed = 99;
  auto set = simulate(sc);
  const auto& original = set.traces[0];

  namespace fs = std::filesystem;
  const auto path = (fs::temp_directory_path() / "audioleak_accept_1m.pcap").string();
  write_pcap(set.traces, path);
  const std::vector<CidrPrefix> nets{CidrPrefix::parse("192.168.0.0/24")};
  auto result = ingest_pcap(path, nets);
  fs::remove(path);

  auto key = [](const PacketRecord& p) {
    return std::tuple(p.t_us, p.size, p.dir == Direction::Outbound);
  };
  bool equal = result.traces.size() == 1 &&
               result.traces[0].packets().size() == original.packets().size();
  if (equal) {
    auto a = original.packets();
    auto b = result.traces[0].packets();
    auto by_key = [&](const PacketRecord& x, const PacketRecord& y) {
      return key(x) < key(y);
    };
    std::sort(a.begin(), a.end(), by_key);
    std::sort(b.begin(), b.end(), by_key);
    for (std::size_t i = 0; i < a.size(); ++i)
      if (key(a[i]) != key(b[i])) {
        equal = false;
        break;
      }
  }
  const double secs = clock.seconds();
  verdict(10, equal && original.packets().size() >= 990'000 && secs <= 30.0,
          fmt("pcap round trip: %zu packets, multiset %s, %.1fs (<=30)",
              original.packets().size(), equal ? "identical" : "DIFFERS", secs));
}

// ---- 11. property spot checks (full suites live in the module tests) ----

void criterion_11() {
  bool ok = true;
  std::string bad;

  Scenario sc;
  sc.duration_s = 600.0;
  sc.devices = {device_model("EchoDot")};
  sc.seed = 31;
  auto set = simulate(sc);
  const auto& trace = set.traces[0];

  for (double w : {1.0, 2.5}) {
    auto windows = split_windows(trace, w, DirectionFilter::Both);
    std::uint64_t bytes = 0;
    std::uint32_t packets = 0;
    for (const auto& win : windows) {
      bytes += win.byte_total;
      packets += win.packet_count;
    }
    std::uint64_t want_bytes = 0;
    for (const auto& p : trace.packets()) want_bytes += p.size;
    if (bytes != want_bytes || packets != trace.packets().size()) {
      ok = false;
      bad += " tiling";
    }
  }

  auto coverage = [&](const BurstParams& p) {
    std::int64_t covered = 0;
    for (const auto& e : detect_bursts(trace, p)) covered += e.span.length_us();
    return covered;
  };
  BurstParams base;
  base.b_audio_bps = 2000.0;  // low bar so idle traffic produces runs
  std::int64_t prev = std::numeric_limits<std::int64_t>::max();
  for (int n = 1; n <= 8; ++n) {
    BurstParams p = base;
    p.n = n;
    const auto c = coverage(p);
    if (c > prev) {
      ok = false;
      bad += " burst-n";
    }
    prev = c;
  }
  BurstParams high = base;
  high.b_audio_bps = 8000.0;
  high.n = 1;
  BurstParams low = base;
  low.n = 1;
  if (coverage(high) > coverage(low)) {
    ok = false;
    bad += " burst-rate";
  }

  std::mt19937_64 eng(0x11abcu);
  std::uniform_int_distribution<int> len(0, 10);
  std::uniform_int_distribution<int> ch('a', 'e');
  auto word = [&] {
    std::string s;
    for (int i = len(eng); i > 0; --i) s += static_cast<char>(ch(eng));
    return s;
  };
  for (int i = 0; i < 50; ++i) {
    const std::string a = word(), b = word(), c = word();
    if (levenshtein(a, a) != 0 || levenshtein(a, b) != levenshtein(b, a) ||
        levenshtein(a, c) > levenshtein(a, b) + levenshtein(b, c)) {
      ok = false;
      bad += " levenshtein";
      break;
    }
  }

  auto rerun = simulate(sc);
  if (rerun.traces[0].packets().size() != trace.packets().size()) {
    ok = false;
    bad += " determinism";
  } else {
    for (std::size_t i = 0; i < trace.packets().size(); ++i) {
      const auto& x = trace.packets()[i];
      const auto& y = rerun.traces[0].packets()[i];
      if (x.t_us != y.t_us || x.size != y.size || x.dir != y.dir) {
        ok = false;
        bad += " determinism";
        break;
      }
    }
  }

  verdict(11, ok,
          ok ? std::string("window tiling, burst monotonicity, edit-distance "
                           "axioms, seeded determinism (full suites in module "
                           "tests)")
             : "property violations:" + bad);
}

}  // namespace

int main() {
  const std::pair<int, void (*)()> criteria[] = {
      {1, criterion_1}, {2, criterion_2},  {3, criterion_3},
      {4, criterion_4}, {5, criterion_5},  {6, criterion_6},
      {7, criterion_7}, {8, criterion_8},  {9, criterion_9},
      {10, criterion_10}, {11, criterion_11}};
  for (const auto& [idx, fn] : criteria) {
    try {
      fn();
    } catch (const std::exception& e) {
      verdict(idx, false, std::string("unhandled exception: ") + e.what());
    }
  }
  std::printf("%d of 11 criteria passed\n", 11 - failures);
  return failures ? 1 : 0;
}
