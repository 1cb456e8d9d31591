#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "core.hpp"

namespace audioleak {

// IPv4/IPv6 prefix for deciding which side of a frame is the LAN device.
struct CidrPrefix {
  std::array<std::uint8_t, 16> addr{};
  int bits = 0;
  bool v6 = false;

  static CidrPrefix parse(std::string_view text) {
    const auto slash = text.find('/');
    if (slash == std::string_view::npos)
      throw FormatError("prefix needs a /length: " + std::string(text));
    const std::string host(text.substr(0, slash));
    CidrPrefix p;
    p.bits = std::atoi(std::string(text.substr(slash + 1)).c_str());
    p.v6 = host.find(':') != std::string::npos;
    if (p.v6) {
      if (!parse_v6(host, p.addr)) throw FormatError("bad IPv6 prefix: " + host);
      if (p.bits < 0 || p.bits > 128) throw FormatError("bad prefix length");
    } else {
      if (!parse_v4(host, p.addr)) throw FormatError("bad IPv4 prefix: " + host);
      if (p.bits < 0 || p.bits > 32) throw FormatError("bad prefix length");
    }
    return p;
  }

  bool contains(const std::uint8_t* ip, bool ip_v6) const {
    if (ip_v6 != v6) return false;
    int full = bits / 8, rem = bits % 8;
    if (std::memcmp(addr.data(), ip, static_cast<std::size_t>(full)) != 0) return false;
    if (rem == 0) return true;
    const std::uint8_t mask = static_cast<std::uint8_t>(0xff << (8 - rem));
    return (addr[static_cast<std::size_t>(full)] & mask) == (ip[full] & mask);
  }

  static bool parse_v4(const std::string& s, std::array<std::uint8_t, 16>& out) {
    unsigned a, b, c, d;
    char tail;
    if (std::sscanf(s.c_str(), "%u.%u.%u.%u%c", &a, &b, &c, &d, &tail) != 4) return false;
    if (a > 255 || b > 255 || c > 255 || d > 255) return false;
    out = {};
    out[0] = static_cast<std::uint8_t>(a);
    out[1] = static_cast<std::uint8_t>(b);
    out[2] = static_cast<std::uint8_t>(c);
    out[3] = static_cast<std::uint8_t>(d);
    return true;
  }

  // Minimal IPv6 parser: hex groups with one optional "::" elision.
  static bool parse_v6(const std::string& s, std::array<std::uint8_t, 16>& out) {
    std::vector<std::uint16_t> head, tail;
    bool seen_elision = false;
    std::size_t i = 0;
    auto read_group = [&](std::uint16_t& g) -> bool {
      std::size_t start = i;
      unsigned v = 0;
      while (i < s.size() && s[i] != ':') {
        char c = s[i];
        int nib;
        if (c >= '0' && c <= '9') nib = c - '0';
        else if (c >= 'a' && c <= 'f') nib = c - 'a' + 10;
        else if (c >= 'A' && c <= 'F') nib = c - 'A' + 10;
        else return false;
        v = v * 16 + static_cast<unsigned>(nib);
        if (v > 0xffff) return false;
        ++i;
      }
      if (i == start) return false;
      g = static_cast<std::uint16_t>(v);
      return true;
    };
    while (i < s.size()) {
      if (s.compare(i, 2, "::") == 0 && i + 1 < s.size()) {
        if (seen_elision) return false;
        seen_elision = true;
        i += 2;
        continue;
      }
      if (s[i] == ':') {
        ++i;
        continue;
      }
      std::uint16_t g;
      if (!read_group(g)) return false;
      (seen_elision ? tail : head).push_back(g);
    }
    if (head.size() + tail.size() > 8) return false;
    if (!seen_elision && head.size() + tail.size() != 8) return false;
    out = {};
    for (std::size_t k = 0; k < head.size(); ++k) {
      out[2 * k] = static_cast<std::uint8_t>(head[k] >> 8);
      out[2 * k + 1] = static_cast<std::uint8_t>(head[k] & 0xff);
    }
    for (std::size_t k = 0; k < tail.size(); ++k) {
      std::size_t pos = 16 - 2 * (tail.size() - k);
      out[pos] = static_cast<std::uint8_t>(tail[k] >> 8);
      out[pos + 1] = static_cast<std::uint8_t>(tail[k] & 0xff);
    }
    return true;
  }
};

inline bool in_any(std::span<const CidrPrefix> nets, const std::uint8_t* ip, bool v6) {
  for (const auto& n : nets)
    if (n.contains(ip, v6)) return true;
  return false;
}

struct RawFrame {
  std::int64_t t_us = 0;
  std::uint32_t orig_len = 0;
  std::vector<std::uint8_t> bytes;  // captured bytes, possibly snapped short
};

// Pull-based source of raw frames with monotone timestamps. Implemented by
// the pcap file reader and by the file-tailing live adapter.
class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual bool next(RawFrame& out) = 0;
};

// Replays frames already sitting in memory. Used to feed buffered live
// captures through the same ingest path as files.
class MemoryFrameSource : public FrameSource {
 public:
  explicit MemoryFrameSource(std::vector<RawFrame> frames)
      : frames_(std::move(frames)) {}

  bool next(RawFrame& out) override {
    if (pos_ >= frames_.size()) return false;
    out = frames_[pos_++];
    return true;
  }

 private:
  std::vector<RawFrame> frames_;
  std::size_t pos_ = 0;
};

namespace pcap_detail {

constexpr std::uint32_t kMagicUsec = 0xa1b2c3d4;
constexpr std::uint32_t kMagicUsecSwapped = 0xd4c3b2a1;
constexpr std::uint32_t kMagicNsec = 0xa1b23c4d;
constexpr std::uint32_t kMagicNsecSwapped = 0x4d3cb2a1;

inline std::uint32_t bswap32(std::uint32_t v) { return __builtin_bswap32(v); }
inline std::uint16_t bswap16(std::uint16_t v) { return __builtin_bswap16(v); }

}  // namespace pcap_detail

// Classic pcap reader. Accepts both byte orders and both the microsecond and
// nanosecond timestamp flavors; only Ethernet (link type 1) captures are
// supported. A record cut off mid-file sets truncated() and ends iteration
// instead of throwing, so callers keep the partial result.
class PcapReader : public FrameSource {
 public:
  explicit PcapReader(const std::string& path) : in_(path, std::ios::binary) {
    if (!in_) throw FormatError("cannot open capture file: " + path);
    std::uint8_t hdr[24];
    if (!read_exact(hdr, sizeof hdr)) throw FormatError("capture file too short for header");
    std::uint32_t magic;
    std::memcpy(&magic, hdr, 4);
    using namespace pcap_detail;
    switch (magic) {
      case kMagicUsec: break;
      case kMagicNsec: nanos_ = true; break;
      case kMagicUsecSwapped: swap_ = true; break;
      case kMagicNsecSwapped: swap_ = true; nanos_ = true; break;
      default: throw FormatError("not a classic pcap file");
    }
    std::uint32_t network;
    std::memcpy(&network, hdr + 20, 4);
    if (swap_) network = bswap32(network);
    if (network != 1) throw FormatError("unsupported link type (need Ethernet)");
  }

  bool next(RawFrame& out) override {
    std::uint8_t rec[16];
    if (!read_exact(rec, sizeof rec)) {
      if (partial_) truncated_ = true;
      return false;
    }
    std::uint32_t ts_sec, ts_frac, incl_len, orig_len;
    std::memcpy(&ts_sec, rec, 4);
    std::memcpy(&ts_frac, rec + 4, 4);
    std::memcpy(&incl_len, rec + 8, 4);
    std::memcpy(&orig_len, rec + 12, 4);
    if (swap_) {
      ts_sec = pcap_detail::bswap32(ts_sec);
      ts_frac = pcap_detail::bswap32(ts_frac);
      incl_len = pcap_detail::bswap32(incl_len);
      orig_len = pcap_detail::bswap32(orig_len);
    }
    if (incl_len > (1u << 26)) throw FormatError("implausible record length");
    out.bytes.resize(incl_len);
    if (!read_exact(out.bytes.data(), incl_len)) {
      truncated_ = true;
      return false;
    }
    out.t_us = static_cast<std::int64_t>(ts_sec) * 1000000 +
               (nanos_ ? static_cast<std::int64_t>(ts_frac) / 1000
                       : static_cast<std::int64_t>(ts_frac));
    out.orig_len = orig_len;
    return true;
  }

  bool truncated() const { return truncated_; }

 private:
  bool read_exact(void* dst, std::size_t n) {
    in_.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
    const auto got = in_.gcount();
    if (static_cast<std::size_t>(got) == n) return true;
    partial_ = got > 0;
    return false;
  }

  std::ifstream in_;
  bool swap_ = false;
  bool nanos_ = false;
  bool truncated_ = false;
  bool partial_ = false;
};

// Live adapter for tests and offline monitoring: tails a growing pcap file,
// re-polling for appended records until the file stays quiet for max_polls
// rounds.
class PcapTailSource : public FrameSource {
 public:
  explicit PcapTailSource(std::string path, int max_polls = 3)
      : path_(std::move(path)), max_polls_(max_polls) {}

  bool next(RawFrame& out) override {
    for (int attempt = 0; attempt <= max_polls_; ++attempt) {
      if (try_read(out)) return true;
    }
    return false;
  }

 private:
  bool try_read(RawFrame& out) {
    std::ifstream in(path_, std::ios::binary);
    if (!in) return false;
    if (!header_done_) {
      std::uint8_t hdr[24];
      in.read(reinterpret_cast<char*>(hdr), 24);
      if (in.gcount() != 24) return false;
      std::uint32_t magic;
      std::memcpy(&magic, hdr, 4);
      if (magic != pcap_detail::kMagicUsec) throw FormatError("tail source expects native usec pcap");
      offset_ = 24;
      header_done_ = true;
    }
    in.seekg(offset_);
    std::uint8_t rec[16];
    in.read(reinterpret_cast<char*>(rec), 16);
    if (in.gcount() != 16) return false;
    std::uint32_t ts_sec, ts_frac, incl_len;
    std::memcpy(&ts_sec, rec, 4);
    std::memcpy(&ts_frac, rec + 4, 4);
    std::memcpy(&incl_len, rec + 8, 4);
    out.bytes.resize(incl_len);
    in.read(reinterpret_cast<char*>(out.bytes.data()), incl_len);
    if (in.gcount() != static_cast<std::streamsize>(incl_len)) return false;
    std::memcpy(&out.orig_len, rec + 12, 4);
    out.t_us = static_cast<std::int64_t>(ts_sec) * 1000000 + ts_frac;
    offset_ += 16 + incl_len;
    return true;
  }

  std::string path_;
  int max_polls_;
  std::streamoff offset_ = 0;
  bool header_done_ = false;
};

struct IngestReport {
  std::size_t device_count = 0;
  std::uint64_t packet_count = 0;  // frames attributed to a device
  std::uint64_t dropped = 0;       // non-IP, unattributable, or malformed
  TimeSpan span;
  bool truncated = false;
};

struct IngestResult {
  std::vector<DeviceTrace> traces;
  IngestReport report;
};

namespace pcap_detail {

inline std::uint16_t rd16be(const std::uint8_t* p) {
  return static_cast<std::uint16_t>((p[0] << 8) | p[1]);
}

struct Attribution {
  DeviceAddress device;
  PacketRecord packet;
};

inline std::string v4_string(const std::uint8_t* ip) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%u.%u.%u.%u", ip[0], ip[1], ip[2], ip[3]);
  return buf;
}

// Attributes one Ethernet frame, or returns false if it should be dropped.
// Payload sizes come from the protocol headers (the on-wire lengths), not the
// captured length, so snaplen truncation does not distort byte totals.
inline bool attribute_frame(const RawFrame& f, std::span<const CidrPrefix> local,
                            Attribution& out) {
  const std::uint8_t* b = f.bytes.data();
  std::size_t n = f.bytes.size();
  if (n < 14) return false;
  std::size_t l3 = 14;
  std::uint16_t ethertype = rd16be(b + 12);
  if (ethertype == 0x8100) {  // single 802.1Q tag
    if (n < 18) return false;
    ethertype = rd16be(b + 16);
    l3 = 18;
  }

  const std::uint8_t* src_ip;
  const std::uint8_t* dst_ip;
  bool v6;
  std::uint8_t proto;
  std::size_t l4;
  std::uint32_t ip_payload;  // transport header + data

  if (ethertype == 0x0800) {
    if (n < l3 + 20) return false;
    const std::uint8_t* ip = b + l3;
    const std::size_t ihl = static_cast<std::size_t>(ip[0] & 0x0f) * 4;
    if (ihl < 20 || n < l3 + ihl) return false;
    const std::uint16_t total = rd16be(ip + 2);
    if (total < ihl) return false;
    v6 = false;
    proto = ip[9];
    src_ip = ip + 12;
    dst_ip = ip + 16;
    l4 = l3 + ihl;
    ip_payload = static_cast<std::uint32_t>(total - ihl);
  } else if (ethertype == 0x86dd) {
    if (n < l3 + 40) return false;
    const std::uint8_t* ip = b + l3;
    v6 = true;
    proto = ip[6];
    src_ip = ip + 8;
    dst_ip = ip + 24;
    l4 = l3 + 40;
    ip_payload = rd16be(ip + 4);
  } else {
    return false;  // ARP and friends
  }

  std::uint32_t payload;
  if (proto == 17) {  // UDP
    if (n < l4 + 8) return false;
    const std::uint16_t udp_len = rd16be(b + l4 + 4);
    if (udp_len < 8) return false;
    payload = static_cast<std::uint32_t>(udp_len - 8);
  } else if (proto == 6) {  // TCP
    if (n < l4 + 20) return false;
    const std::size_t off = static_cast<std::size_t>((b[l4 + 12] >> 4)) * 4;
    if (off < 20 || ip_payload < off) return false;
    payload = static_cast<std::uint32_t>(ip_payload - off);
  } else {
    payload = ip_payload;
  }

  const bool src_local = in_any(local, src_ip, v6);
  const bool dst_local = in_any(local, dst_ip, v6);
  if (!src_local && !dst_local) return false;

  out.packet.t_us = f.t_us;
  out.packet.size = payload;
  if (src_local) {  // LAN-to-LAN frames count once, against the sender
    out.packet.dir = Direction::Outbound;
    std::copy(b + 6, b + 12, out.device.mac.begin());
    out.device.ip = v6 ? std::string() : v4_string(src_ip);
  } else {
    out.packet.dir = Direction::Inbound;
    std::copy(b, b + 6, out.device.mac.begin());
    out.device.ip = v6 ? std::string() : v4_string(dst_ip);
  }
  return true;
}

}  // namespace pcap_detail

// Groups attributed frames into per-device traces. All traces share the
// capture-wide span so windowings align across devices.
inline IngestResult ingest(FrameSource& source, std::span<const CidrPrefix> local_networks) {
  if (local_networks.empty())
    throw ParameterError("direction inference needs at least one local network prefix");

  std::map<std::array<std::uint8_t, 6>, std::pair<std::string, std::vector<PacketRecord>>> by_mac;
  IngestReport report;
  std::int64_t t_min = 0, t_max = 0;
  bool any = false;

  RawFrame frame;
  while (source.next(frame)) {
    pcap_detail::Attribution a;
    if (!pcap_detail::attribute_frame(frame, local_networks, a)) {
      ++report.dropped;
      continue;
    }
    ++report.packet_count;
    if (!any || a.packet.t_us < t_min) t_min = a.packet.t_us;
    if (!any || a.packet.t_us > t_max) t_max = a.packet.t_us;
    any = true;
    auto& slot = by_mac[a.device.mac];
    if (slot.first.empty()) slot.first = a.device.ip;
    slot.second.push_back(a.packet);
  }
  if (auto* r = dynamic_cast<PcapReader*>(&source)) report.truncated = r->truncated();
  if (report.truncated) ++report.dropped;  // the partial record counts as dropped

  IngestResult result;
  report.span = any ? TimeSpan{t_min, t_max} : TimeSpan{};
  report.device_count = by_mac.size();
  for (auto& [mac, slot] : by_mac) {
    DeviceAddress dev;
    dev.mac = mac;
    dev.ip = std::move(slot.first);
    // Captures can be mildly out of order across devices; keep arrival order
    // for equal stamps but restore monotonicity before building.
    std::stable_sort(slot.second.begin(), slot.second.end(),
                     [](const PacketRecord& x, const PacketRecord& y) { return x.t_us < y.t_us; });
    result.traces.push_back(
        DeviceTrace::build(std::move(dev), std::move(slot.second), report.span));
  }
  result.report = report;
  return result;
}

inline IngestResult ingest_pcap(const std::string& path,
                                std::span<const CidrPrefix> local_networks) {
  PcapReader reader(path);
  return ingest(reader, local_networks);
}

// Merges two captures of the same device (identified by MAC) into one trace.
inline DeviceTrace merge_traces(const DeviceTrace& a, const DeviceTrace& b) {
  if (!(a.device() == b.device()))
    throw ParameterError("cannot merge traces of different devices");
  std::vector<PacketRecord> merged(a.packets().size() + b.packets().size());
  std::merge(a.packets().begin(), a.packets().end(), b.packets().begin(), b.packets().end(),
             merged.begin(),
             [](const PacketRecord& x, const PacketRecord& y) { return x.t_us < y.t_us; });
  DeviceAddress dev = a.device();
  if (dev.ip.empty()) dev.ip = b.device().ip;
  const TimeSpan hull{std::min(a.span().start_us, b.span().start_us),
                      std::max(a.span().end_us, b.span().end_us)};
  return DeviceTrace::build(std::move(dev), std::move(merged), hull);
}

namespace pcap_detail {

class Writer {
 public:
  explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw FormatError("cannot open output file: " + path);
  }
  void u16(std::uint16_t v) { out_.write(reinterpret_cast<const char*>(&v), 2); }
  void u32(std::uint32_t v) { out_.write(reinterpret_cast<const char*>(&v), 4); }
  void i32(std::int32_t v) { out_.write(reinterpret_cast<const char*>(&v), 4); }
  void bytes(const std::uint8_t* p, std::size_t n) {
    out_.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n));
  }
  bool good() const { return out_.good(); }

 private:
  std::ofstream out_;
};

inline std::uint16_t ipv4_checksum(const std::uint8_t* hdr, std::size_t words) {
  std::uint32_t sum = 0;
  for (std::size_t i = 0; i < words; ++i) sum += rd16be(hdr + 2 * i);
  while (sum >> 16) sum = (sum & 0xffff) + (sum >> 16);
  return static_cast<std::uint16_t>(~sum);
}

}  // namespace pcap_detail

// Writes traces as a native-order microsecond pcap of Ethernet/IPv4/UDP
// frames, interleaved by timestamp. Outbound frames run device -> cloud, and
// inbound frames the reverse. Each device must carry an IPv4 address.
inline void write_pcap(std::span<const DeviceTrace> traces, const std::string& path) {
  struct Assembled {
    std::int64_t t_us;
    std::size_t trace;
    std::size_t pkt;
  };
  std::vector<Assembled> order;
  std::size_t total = 0;
  for (const auto& t : traces) total += t.packets().size();
  order.reserve(total);
  for (std::size_t ti = 0; ti < traces.size(); ++ti)
    for (std::size_t pi = 0; pi < traces[ti].packets().size(); ++pi)
      order.push_back({traces[ti].packets()[pi].t_us, ti, pi});
  std::stable_sort(order.begin(), order.end(),
                   [](const Assembled& x, const Assembled& y) { return x.t_us < y.t_us; });

  std::vector<std::array<std::uint8_t, 4>> device_ips(traces.size());
  for (std::size_t ti = 0; ti < traces.size(); ++ti) {
    std::array<std::uint8_t, 16> tmp;
    if (traces[ti].device().ip.empty() || !CidrPrefix::parse_v4(traces[ti].device().ip, tmp))
      throw ParameterError("write_pcap requires an IPv4 address per device");
    std::copy(tmp.begin(), tmp.begin() + 4, device_ips[ti].begin());
  }

  pcap_detail::Writer w(path);
  w.u32(pcap_detail::kMagicUsec);
  w.u16(2);
  w.u16(4);
  w.i32(0);
  w.u32(0);
  w.u32(65535);
  w.u32(1);  // Ethernet

  constexpr std::array<std::uint8_t, 6> kCloudMac = {0x0e, 0xcc, 0x00, 0x00, 0x00, 0x01};
  constexpr std::array<std::uint8_t, 4> kCloudIp = {52, 94, 0, 1};

  std::vector<std::uint8_t> frame;
  for (const auto& rec : order) {
    const DeviceTrace& trace = traces[rec.trace];
    const PacketRecord& p = trace.packets()[rec.pkt];
    if (p.t_us < 0) throw ParameterError("cannot write negative timestamps");
    const bool out = p.dir == Direction::Outbound;
    const std::uint32_t udp_len = 8 + p.size;
    const std::uint32_t ip_len = 20 + udp_len;
    const std::uint32_t frame_len = 14 + ip_len;

    frame.assign(frame_len, 0);
    const auto& dst_mac = out ? kCloudMac : trace.device().mac;
    const auto& src_mac = out ? trace.device().mac : kCloudMac;
    std::copy(dst_mac.begin(), dst_mac.end(), frame.begin());
    std::copy(src_mac.begin(), src_mac.end(), frame.begin() + 6);
    frame[12] = 0x08;
    frame[13] = 0x00;

    std::uint8_t* ip = frame.data() + 14;
    ip[0] = 0x45;
    ip[2] = static_cast<std::uint8_t>(ip_len >> 8);
    ip[3] = static_cast<std::uint8_t>(ip_len & 0xff);
    ip[8] = 64;  // ttl
    ip[9] = 17;  // udp
    const auto& src_ip = out ? device_ips[rec.trace] : kCloudIp;
    const auto& dst_ip = out ? kCloudIp : device_ips[rec.trace];
    std::copy(src_ip.begin(), src_ip.end(), ip + 12);
    std::copy(dst_ip.begin(), dst_ip.end(), ip + 16);
    const std::uint16_t ck = pcap_detail::ipv4_checksum(ip, 10);
    ip[10] = static_cast<std::uint8_t>(ck >> 8);
    ip[11] = static_cast<std::uint8_t>(ck & 0xff);

    std::uint8_t* udp = ip + 20;
    udp[0] = 0x9c;  // src port 40000
    udp[1] = 0x40;
    udp[2] = 0x01;  // dst port 443
    udp[3] = 0xbb;
    if (!out) std::swap_ranges(udp, udp + 2, udp + 2);
    udp[4] = static_cast<std::uint8_t>(udp_len >> 8);
    udp[5] = static_cast<std::uint8_t>(udp_len & 0xff);

    w.u32(static_cast<std::uint32_t>(p.t_us / 1000000));
    w.u32(static_cast<std::uint32_t>(p.t_us % 1000000));
    w.u32(frame_len);
    w.u32(frame_len);
    w.bytes(frame.data(), frame.size());
  }
  if (!w.good()) throw FormatError("failed writing capture: " + path);
}

}  // namespace audioleak
