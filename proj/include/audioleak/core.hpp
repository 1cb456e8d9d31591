#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace audioleak {

struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when a window holds too few packets to support a statistical
// comparison. Callers must be able to tell this apart from a verdict.
struct InsufficientDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Direction : std::uint8_t { Outbound, Inbound };

enum class DirectionFilter : std::uint8_t { Outbound, Inbound, Both };

inline bool matches(DirectionFilter f, Direction d) {
  return f == DirectionFilter::Both ||
         (f == DirectionFilter::Outbound && d == Direction::Outbound) ||
         (f == DirectionFilter::Inbound && d == Direction::Inbound);
}

// All timestamps are integer microseconds relative to the capture epoch.
inline std::int64_t to_us(double seconds) {
  return static_cast<std::int64_t>(std::llround(seconds * 1e6));
}

inline double to_seconds(std::int64_t us) { return static_cast<double>(us) * 1e-6; }

// A device is identified by its hardware (MAC) address alone; the network
// address is advisory because DHCP can reassign it mid-capture.
struct DeviceAddress {
  std::array<std::uint8_t, 6> mac{};
  std::string ip;  // optional, empty when unknown

  bool operator==(const DeviceAddress& o) const { return mac == o.mac; }
  bool operator!=(const DeviceAddress& o) const { return !(*this == o); }
  bool operator<(const DeviceAddress& o) const { return mac < o.mac; }

  std::string mac_string() const {
    static const char* hex = "0123456789abcdef";
    std::string s;
    s.reserve(17);
    for (std::size_t i = 0; i < mac.size(); ++i) {
      if (i) s.push_back(':');
      s.push_back(hex[mac[i] >> 4]);
      s.push_back(hex[mac[i] & 0xf]);
    }
    return s;
  }

  static DeviceAddress from_mac(std::string_view text, std::string ip = {}) {
    DeviceAddress a;
    a.ip = std::move(ip);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < 6; ++i) {
      if (i) {
        if (pos >= text.size() || text[pos] != ':')
          throw FormatError("malformed mac address: " + std::string(text));
        ++pos;
      }
      if (pos + 2 > text.size())
        throw FormatError("malformed mac address: " + std::string(text));
      auto nib = [&](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw FormatError("malformed mac address: " + std::string(text));
      };
      a.mac[i] = static_cast<std::uint8_t>(nib(text[pos]) * 16 + nib(text[pos + 1]));
      pos += 2;
    }
    if (pos != text.size())
      throw FormatError("malformed mac address: " + std::string(text));
    return a;
  }
};

struct TimeSpan {
  std::int64_t start_us = 0;
  std::int64_t end_us = 0;

  std::int64_t length_us() const { return end_us - start_us; }
  bool contains(std::int64_t t) const { return t >= start_us && t < end_us; }
  bool overlaps(const TimeSpan& o) const {
    return start_us < o.end_us && o.start_us < end_us;
  }
  bool operator==(const TimeSpan& o) const = default;
};

struct PacketRecord {
  std::int64_t t_us = 0;
  std::uint32_t size = 0;  // transport payload bytes
  Direction dir = Direction::Outbound;
};

// One device's packets over a capture span, ordered by timestamp.
class DeviceTrace {
 public:
  DeviceTrace() = default;

  // Validates ordering and span coverage; a packet exactly at span.end is
  // tolerated and later counted in the final window.
  static DeviceTrace build(DeviceAddress device, std::vector<PacketRecord> packets,
                           std::optional<TimeSpan> span = std::nullopt) {
    for (std::size_t i = 1; i < packets.size(); ++i)
      if (packets[i].t_us < packets[i - 1].t_us)
        throw ParameterError("trace packets not in timestamp order");
    TimeSpan s;
    if (span) {
      s = *span;
      if (s.end_us < s.start_us) throw ParameterError("span ends before it starts");
      if (!packets.empty() &&
          (packets.front().t_us < s.start_us || packets.back().t_us > s.end_us))
        throw ParameterError("span does not cover all packets");
    } else if (!packets.empty()) {
      s = {packets.front().t_us, packets.back().t_us};
    }
    DeviceTrace t;
    t.device_ = std::move(device);
    t.packets_ = std::move(packets);
    t.span_ = s;
    return t;
  }

  const DeviceAddress& device() const { return device_; }
  const std::vector<PacketRecord>& packets() const { return packets_; }
  const TimeSpan& span() const { return span_; }

 private:
  DeviceAddress device_;
  std::vector<PacketRecord> packets_;
  TimeSpan span_;
};

struct TimeWindow {
  std::size_t index = 0;
  std::int64_t start_us = 0;
  std::int64_t duration_us = 0;
  std::uint64_t byte_total = 0;
  std::uint32_t packet_count = 0;

  double rate_bps() const {
    return static_cast<double>(byte_total) * 8.0 / to_seconds(duration_us);
  }
  TimeSpan span() const { return {start_us, start_us + duration_us}; }
};

// Tiles the trace span with half-open windows [k*s_w, (k+1)*s_w) and sums
// payload bytes of packets matching the direction filter. The last window may
// overhang the span end; its duration (and thus rate) is still s_w.
inline std::vector<TimeWindow> split_windows(const DeviceTrace& trace, double s_w_seconds,
                                             DirectionFilter filter = DirectionFilter::Outbound) {
  const std::int64_t sw_us = to_us(s_w_seconds);
  if (sw_us <= 0) throw ParameterError("window size must be positive");
  const std::int64_t span_us = trace.span().length_us();
  if (span_us <= 0) return {};

  const std::size_t n = static_cast<std::size_t>((span_us + sw_us - 1) / sw_us);
  std::vector<TimeWindow> windows(n);
  for (std::size_t i = 0; i < n; ++i) {
    windows[i].index = i;
    windows[i].start_us = trace.span().start_us + static_cast<std::int64_t>(i) * sw_us;
    windows[i].duration_us = sw_us;
  }
  for (const PacketRecord& p : trace.packets()) {
    if (!matches(filter, p.dir)) continue;
    std::size_t idx = static_cast<std::size_t>((p.t_us - trace.span().start_us) / sw_us);
    if (idx == n) idx = n - 1;  // packet exactly at span.end
    windows[idx].byte_total += p.size;
    windows[idx].packet_count += 1;
  }
  return windows;
}

}  // namespace audioleak
