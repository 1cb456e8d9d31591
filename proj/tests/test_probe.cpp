#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "audioleak/probe.hpp"

using namespace audioleak;

namespace {

DeviceAddress dev() { return DeviceAddress::from_mac("02:00:00:00:00:02"); }

// Places the given payload sizes evenly inside [start, start+len).
void emit(std::vector<PacketRecord>& out, double start, double len,
          const std::vector<std::uint32_t>& sizes, Direction d = Direction::Outbound) {
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    double t = start + len * static_cast<double>(i) / static_cast<double>(sizes.size());
    out.push_back({to_us(t), sizes[i], d});
  }
}

}  // namespace

TEST_CASE("compare_windows reproduces the frozen pipeline result") {
  // Idle sizes bin to edges [100, 250, 400, 550, 700] (Sturges 4 beats FD 2),
  // giving counts (2,2,2,2) vs (1,1,0,5) and a Welch p of 0.8360832258
  // (reference pipeline run independently in scipy/mpmath).
  std::vector<PacketRecord> pkts;
  emit(pkts, 0.0, 10.0, {100, 120, 250, 300, 420, 500, 620, 700});
  emit(pkts, 10.0, 10.0, {1200, 1200, 1200, 1200, 1200, 110, 260});
  std::sort(pkts.begin(), pkts.end(), [](auto& a, auto& b) { return a.t_us < b.t_us; });
  auto trace = DeviceTrace::build(dev(), pkts, TimeSpan{0, to_us(20.0)});

  auto c = compare_windows(trace, {0, to_us(10.0)}, {to_us(10.0), to_us(20.0)});
  CHECK(c.t_size == Catch::Approx(0.22549380840084865).epsilon(1e-12));
  CHECK(c.p_size == Catch::Approx(0.8360832258079627).margin(1e-11));
  CHECK(c.p_combined == c.p_size);
  CHECK_FALSE(c.p_iat.has_value());
  CHECK_FALSE(c.reactive);
}

TEST_CASE("identical windows give p = 1 exactly") {
  std::vector<PacketRecord> pkts;
  emit(pkts, 0.0, 10.0, {100, 300, 500, 700});
  emit(pkts, 10.0, 10.0, {100, 300, 500, 700});
  auto trace = DeviceTrace::build(dev(), pkts, TimeSpan{0, to_us(20.0)});
  auto c = compare_windows(trace, {0, to_us(10.0)}, {to_us(10.0), to_us(20.0)});
  CHECK(c.p_size == 1.0);
  CHECK_FALSE(c.reactive);
}

TEST_CASE("a heavy audio-like shift drives p below the threshold") {
  // Idle traffic: narrow keepalives plus a couple of larger burst packets,
  // which is what gives the binning enough resolution to see a new mode.
  std::mt19937 rng(808);
  std::normal_distribution<double> keepalive(100, 4);
  std::vector<PacketRecord> pkts;
  for (int w = 0; w < 2; ++w) {
    const double base = w * 10.0;
    for (int i = 0; i < 30; ++i)
      pkts.push_back({to_us(base + i * 0.33),
                      static_cast<std::uint32_t>(std::clamp(keepalive(rng), 60.0, 1460.0)),
                      Direction::Outbound});
    for (std::uint32_t s : {250u, 400u, 1300u})
      pkts.push_back({to_us(base + 5.0 + s * 1e-4), s, Direction::Outbound});
  }
  std::normal_distribution<double> audio_size(1200, 150);
  for (int i = 0; i < 200; ++i)
    pkts.push_back({to_us(12.0 + i * 0.025),
                    static_cast<std::uint32_t>(std::clamp(audio_size(rng), 100.0, 1460.0)),
                    Direction::Outbound});
  std::sort(pkts.begin(), pkts.end(), [](auto& a, auto& b) { return a.t_us < b.t_us; });
  auto trace = DeviceTrace::build(dev(), pkts, TimeSpan{0, to_us(20.0)});

  auto c = compare_windows(trace, {0, to_us(10.0)}, {to_us(10.0), to_us(20.0)});
  CHECK(c.p_size < 0.05);
  CHECK(c.reactive);
}

TEST_CASE("insufficient idle data is an error, not a verdict") {
  std::vector<PacketRecord> pkts = {{to_us(1.0), 500, Direction::Outbound}};
  emit(pkts, 10.0, 5.0, {100, 200, 300});
  auto trace = DeviceTrace::build(dev(), pkts, TimeSpan{0, to_us(20.0)});
  CHECK_THROWS_AS(compare_windows(trace, {0, to_us(10.0)}, {to_us(10.0), to_us(20.0)}),
                  InsufficientDataError);
}

TEST_CASE("degenerate idle sizes cannot be binned") {
  std::vector<PacketRecord> pkts;
  emit(pkts, 0.0, 10.0, {64, 64, 64, 64});
  emit(pkts, 10.0, 10.0, {64, 64, 900, 900});
  auto trace = DeviceTrace::build(dev(), pkts, TimeSpan{0, to_us(20.0)});
  CHECK_THROWS_AS(compare_windows(trace, {0, to_us(10.0)}, {to_us(10.0), to_us(20.0)}),
                  InsufficientDataError);
}

TEST_CASE("inter-arrival combination uses Fisher's method") {
  std::vector<PacketRecord> pkts;
  // Idle: ~1 s gaps with spread; probe: tight 40-60 ms gaps.
  double t = 0.0;
  for (double gap : {1.0, 1.1, 0.9, 1.05, 0.95, 1.2, 1.0}) {
    pkts.push_back({to_us(t), static_cast<std::uint32_t>(300 + 50 * pkts.size()), Direction::Outbound});
    t += gap;
  }
  double t2 = 10.0;
  for (double gap : {0.04, 0.05, 0.04, 0.06, 0.05, 0.04, 0.05, 0.04}) {
    pkts.push_back({to_us(t2), 900, Direction::Outbound});
    t2 += gap;
  }
  auto trace = DeviceTrace::build(dev(), pkts, TimeSpan{0, to_us(20.0)});

  ProbeOptions opts;
  opts.combine_iat = true;
  auto c = compare_windows(trace, {0, to_us(10.0)}, {to_us(10.0), to_us(20.0)}, opts);
  REQUIRE(c.p_iat.has_value());
  CHECK(c.p_combined == Catch::Approx(fisher_combine(c.p_size, *c.p_iat)).margin(1e-15));
}

TEST_CASE("iat combination falls back to size-only when arrivals are scarce") {
  std::vector<PacketRecord> pkts;
  emit(pkts, 0.0, 10.0, {100, 900});  // one inter-arrival only
  emit(pkts, 10.0, 10.0, {200, 800, 400});
  auto trace = DeviceTrace::build(dev(), pkts, TimeSpan{0, to_us(20.0)});
  ProbeOptions opts;
  opts.combine_iat = true;
  auto c = compare_windows(trace, {0, to_us(10.0)}, {to_us(10.0), to_us(20.0)}, opts);
  CHECK_FALSE(c.p_iat.has_value());
  CHECK(c.p_combined == c.p_size);
}

TEST_CASE("sliding scan pairs adjacent complete windows") {
  std::vector<PacketRecord> pkts;
  for (int k = 0; k < 9; ++k) emit(pkts, k * 10.0, 10.0, {300, 500, 200, 700, 400});
  auto trace = DeviceTrace::build(dev(), pkts, TimeSpan{0, to_us(90.5)});

  auto points = sliding_scan(trace, 30.0);
  REQUIRE(points.size() == 2);  // three full windows in 90.5 s
  CHECK(points[0].first.start_us == 0);
  CHECK(points[0].second.end_us == to_us(60.0));
  CHECK(points[1].first.start_us == to_us(30.0));
  for (const auto& sp : points) {
    CHECK_FALSE(sp.skipped);
    CHECK(sp.cmp.p_combined >= 0.0);
    CHECK(sp.cmp.p_combined <= 1.0);
  }

  // Exactly 60 s gives exactly one pair.
  std::vector<PacketRecord> within;
  for (auto& p : trace.packets())
    if (p.t_us <= to_us(60.0)) within.push_back(p);
  auto trace60 = DeviceTrace::build(dev(), within, TimeSpan{0, to_us(60.0)});
  CHECK(sliding_scan(trace60, 30.0).size() == 1);

  // Shorter than two windows: nothing to compare.
  std::vector<PacketRecord> head;
  for (auto& p : trace.packets())
    if (p.t_us < to_us(45.0)) head.push_back(p);
  auto trace45 = DeviceTrace::build(dev(), head, TimeSpan{0, to_us(45.0)});
  CHECK(sliding_scan(trace45, 30.0).empty());
}

TEST_CASE("scan marks pairs it cannot test and keeps going") {
  std::vector<PacketRecord> pkts;
  emit(pkts, 2.0, 6.0, {100, 400, 800, 200});   // window 0 fine
  // window 1 empty
  emit(pkts, 22.0, 6.0, {100, 400, 800, 200});  // window 2 fine
  emit(pkts, 32.0, 6.0, {150, 450, 850, 250});  // window 3 fine
  auto trace = DeviceTrace::build(dev(), pkts, TimeSpan{0, to_us(40.0)});
  auto points = sliding_scan(trace, 10.0);
  REQUIRE(points.size() == 3);
  CHECK_FALSE(points[0].skipped);  // window0 vs empty window1 still tests
  CHECK(points[1].skipped);        // empty leading window cannot bin
  CHECK(std::isnan(points[1].cmp.p_combined));
  CHECK_FALSE(points[1].cmp.reactive);
  CHECK_FALSE(points[2].skipped);
}

TEST_CASE("scan confusion applies the either-window overlap rule") {
  std::vector<ScanPoint> pts(3);
  pts[0].first = {0, to_us(30.0)};
  pts[0].second = {to_us(30.0), to_us(60.0)};
  pts[0].cmp.p_combined = 0.01;
  pts[1].first = pts[0].second;
  pts[1].second = {to_us(60.0), to_us(90.0)};
  pts[1].cmp.p_combined = 0.9;
  pts[2].first = pts[1].second;
  pts[2].second = {to_us(90.0), to_us(120.0)};
  pts[2].cmp.p_combined = 0.2;

  std::vector<TimeSpan> labels = {{to_us(40.0), to_us(43.0)}};
  auto c = scan_confusion(pts, labels, 0.42);
  // Pair 0 and pair 1 both touch the label window; pair 2 does not.
  CHECK(c.tp == 1);
  CHECK(c.fn == 1);
  CHECK(c.fp == 1);
  CHECK(c.tn == 0);
}

TEST_CASE("probe options are validated") {
  ProbeOptions opts;
  opts.threshold = 0.0;
  CHECK_THROWS_AS(opts.validate(), ParameterError);
  opts.threshold = 1.0;
  CHECK_THROWS_AS(opts.validate(), ParameterError);

  std::vector<PacketRecord> pkts;
  emit(pkts, 0.0, 10.0, {100, 300, 600});
  auto trace = DeviceTrace::build(dev(), pkts, TimeSpan{0, to_us(20.0)});
  CHECK_THROWS_AS(sliding_scan(trace, 0.0), ParameterError);
}
