#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "audioleak/core.hpp"

using namespace audioleak;

namespace {

DeviceAddress test_device() { return DeviceAddress::from_mac("02:11:22:33:44:55", "192.168.0.9"); }

// Uniform packet schedule: `per_second` packets each second, equally spaced.
DeviceTrace uniform_trace(double seconds, int per_second, std::uint32_t size) {
  std::vector<PacketRecord> pkts;
  const std::int64_t step = to_us(1.0 / per_second);
  for (std::int64_t t = 0; t < to_us(seconds); t += step)
    pkts.push_back({t, size, Direction::Outbound});
  return DeviceTrace::build(test_device(), std::move(pkts), TimeSpan{0, to_us(seconds)});
}

}  // namespace

TEST_CASE("uniform traffic yields the closed-form per-window rate") {
  // 125 packets/s of 23-byte payloads = 23000 bit/s in every 1 s window.
  auto trace = uniform_trace(10.0, 125, 23);
  auto windows = split_windows(trace, 1.0);
  REQUIRE(windows.size() == 10);

  // Independent check: accumulate bytes per window by direct scan.
  std::vector<std::uint64_t> sums(10, 0);
  for (const auto& p : trace.packets()) sums[static_cast<std::size_t>(p.t_us / 1000000)] += p.size;

  for (std::size_t i = 0; i < windows.size(); ++i) {
    CHECK(windows[i].byte_total == sums[i]);
    CHECK(windows[i].byte_total == 125u * 23u);
    CHECK(windows[i].rate_bps() == Catch::Approx(23000.0));
  }
}

TEST_CASE("1 kB/s for 10 s gives ten windows of 8 kbit/s") {
  auto trace = uniform_trace(10.0, 10, 100);
  auto windows = split_windows(trace, 1.0);
  REQUIRE(windows.size() == 10);
  for (const auto& w : windows) CHECK(w.rate_bps() == Catch::Approx(8000.0));
}

TEST_CASE("window count is the ceiling of span over window size") {
  auto trace = DeviceTrace::build(test_device(), {{to_us(10.2), 64, Direction::Outbound}},
                                  TimeSpan{0, to_us(10.5)});
  auto windows = split_windows(trace, 1.0);
  CHECK(windows.size() == 11);
  CHECK(windows.back().byte_total == 64);
}

TEST_CASE("zero-length span produces no windows") {
  auto trace = DeviceTrace::build(test_device(), {}, TimeSpan{to_us(5.0), to_us(5.0)});
  CHECK(split_windows(trace, 1.0).empty());
}

TEST_CASE("packet exactly on a boundary lands in the right-hand window") {
  auto trace = DeviceTrace::build(
      test_device(),
      {{0, 10, Direction::Outbound}, {to_us(1.0), 20, Direction::Outbound}},
      TimeSpan{0, to_us(2.0)});
  auto windows = split_windows(trace, 1.0);
  REQUIRE(windows.size() == 2);
  CHECK(windows[0].byte_total == 10);
  CHECK(windows[1].byte_total == 20);
}

TEST_CASE("packet exactly at the span end is counted in the final window") {
  auto trace = DeviceTrace::build(
      test_device(), {{0, 5, Direction::Outbound}, {to_us(3.0), 7, Direction::Outbound}},
      TimeSpan{0, to_us(3.0)});
  auto windows = split_windows(trace, 1.0);
  REQUIRE(windows.size() == 3);
  CHECK(windows[2].byte_total == 7);
}

TEST_CASE("direction filter selects matching packets only") {
  std::vector<PacketRecord> pkts = {{100, 10, Direction::Outbound},
                                    {200, 20, Direction::Inbound},
                                    {300, 40, Direction::Outbound}};
  auto trace = DeviceTrace::build(test_device(), pkts, TimeSpan{0, to_us(1.0)});
  CHECK(split_windows(trace, 1.0, DirectionFilter::Outbound)[0].byte_total == 50);
  CHECK(split_windows(trace, 1.0, DirectionFilter::Inbound)[0].byte_total == 20);
  CHECK(split_windows(trace, 1.0, DirectionFilter::Both)[0].byte_total == 70);
}

TEST_CASE("windows tile the span and conserve bytes") {
  std::mt19937 rng(424242);
  std::uniform_int_distribution<std::int64_t> when(0, to_us(123.0));
  std::uniform_int_distribution<std::uint32_t> sz(1, 1460);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<PacketRecord> pkts;
    for (int i = 0; i < 500; ++i) {
      Direction d = (rng() & 1) ? Direction::Outbound : Direction::Inbound;
      pkts.push_back({when(rng), sz(rng), d});
    }
    std::sort(pkts.begin(), pkts.end(),
              [](const auto& a, const auto& b) { return a.t_us < b.t_us; });
    auto trace = DeviceTrace::build(test_device(), pkts, TimeSpan{0, to_us(123.0)});
    auto windows = split_windows(trace, 2.5, DirectionFilter::Both);

    std::uint64_t total = 0;
    for (const auto& p : pkts) total += p.size;
    std::uint64_t windowed = 0;
    for (std::size_t i = 0; i < windows.size(); ++i) {
      windowed += windows[i].byte_total;
      CHECK(windows[i].index == i);
      if (i) CHECK(windows[i].start_us == windows[i - 1].start_us + windows[i - 1].duration_us);
    }
    CHECK(windowed == total);
    CHECK(windows.front().start_us == 0);
    CHECK(windows.back().start_us + windows.back().duration_us >= to_us(123.0));
  }
}

TEST_CASE("trace construction validates ordering and span coverage") {
  std::vector<PacketRecord> disordered = {{200, 1, Direction::Outbound},
                                          {100, 1, Direction::Outbound}};
  CHECK_THROWS_AS(DeviceTrace::build(test_device(), disordered), ParameterError);

  std::vector<PacketRecord> pkts = {{100, 1, Direction::Outbound}};
  CHECK_THROWS_AS(DeviceTrace::build(test_device(), pkts, TimeSpan{200, 300}), ParameterError);
  CHECK_THROWS_AS(DeviceTrace::build(test_device(), pkts, TimeSpan{0, 50}), ParameterError);
  CHECK_THROWS_AS(DeviceTrace::build(test_device(), {}, TimeSpan{10, 0}), ParameterError);
}

TEST_CASE("non-positive window size is rejected") {
  auto trace = uniform_trace(2.0, 10, 100);
  CHECK_THROWS_AS(split_windows(trace, 0.0), ParameterError);
  CHECK_THROWS_AS(split_windows(trace, -1.0), ParameterError);
}

TEST_CASE("mac addresses parse and print round-trip") {
  auto a = DeviceAddress::from_mac("A1:b2:C3:00:ff:09");
  CHECK(a.mac_string() == "a1:b2:c3:00:ff:09");
  CHECK_THROWS_AS(DeviceAddress::from_mac("a1:b2:c3:00:ff"), FormatError);
  CHECK_THROWS_AS(DeviceAddress::from_mac("a1:b2:c3:00:ff:0g"), FormatError);
  CHECK_THROWS_AS(DeviceAddress::from_mac("a1b2c300ff09"), FormatError);

  // Identity compares the hardware address only.
  auto b = DeviceAddress::from_mac("a1:b2:c3:00:ff:09", "10.0.0.7");
  CHECK(a == b);
}
