#include "cavityg2/click_stream.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

#include "cavityg2/io_util.hpp"

namespace cavityg2 {

namespace {

constexpr std::size_t kHeaderBytes = 16;
constexpr std::size_t kRecordBytes = 13;
constexpr char kMagic[4] = {'P', 'S', 'T', 'M'};

void put_u16(std::vector<unsigned char>& b, uint16_t v) {
  b.push_back(static_cast<unsigned char>(v & 0xff));
  b.push_back(static_cast<unsigned char>(v >> 8));
}

void put_u32(std::vector<unsigned char>& b, uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::vector<unsigned char>& b, uint64_t v) {
  for (int i = 0; i < 8; ++i) b.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}

uint16_t get_u16(const unsigned char* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

uint32_t get_u32(const unsigned char* p) {
  uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

uint64_t get_u64(const unsigned char* p) {
  uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

}  // namespace

std::vector<unsigned char> encode_stream(const ClickStream& s) {
  std::vector<unsigned char> bytes;
  bytes.reserve(kHeaderBytes + kRecordBytes * s.total_clicks());
  bytes.insert(bytes.end(), kMagic, kMagic + 4);
  put_u16(bytes, kStreamFormatVersion);
  put_u16(bytes, 2);
  put_u32(bytes, static_cast<uint32_t>(s.windows.size()));
  put_u32(bytes, 0);  // reserved

  std::size_t o0 = 0, o1 = 0;
  for (const auto& w : s.windows) {
    // Merge the two sorted channel runs by (timestamp, channel).
    std::size_t i = 0, j = 0;
    while (i < w.n0 || j < w.n1) {
      bool take0;
      if (i >= w.n0) take0 = false;
      else if (j >= w.n1) take0 = true;
      else take0 = s.t0[o0 + i] <= s.t1[o1 + j];
      put_u32(bytes, w.id);
      if (take0) {
        bytes.push_back(0);
        put_u64(bytes, s.t0[o0 + i++]);
      } else {
        bytes.push_back(1);
        put_u64(bytes, s.t1[o1 + j++]);
      }
    }
    o0 += w.n0;
    o1 += w.n1;
  }
  return bytes;
}

ClickStream decode_stream(const std::vector<unsigned char>& bytes, double window_seconds) {
  if (bytes.size() < kHeaderBytes) throw FormatError("stream: truncated header");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("stream: bad magic");
  const uint16_t version = get_u16(bytes.data() + 4);
  if (version != kStreamFormatVersion) throw FormatError("stream: unsupported version");
  const uint16_t channels = get_u16(bytes.data() + 6);
  if (channels != 2) throw FormatError("stream: expected two channels");
  const uint32_t n_windows = get_u32(bytes.data() + 8);
  const std::size_t payload = bytes.size() - kHeaderBytes;
  if (payload % kRecordBytes != 0) throw FormatError("stream: truncated record");
  const std::size_t n_records = payload / kRecordBytes;

  ClickStream s;
  s.window_seconds = window_seconds;
  s.windows.resize(n_windows);
  for (uint32_t w = 0; w < n_windows; ++w) s.windows[w].id = w;
  const uint64_t window_ps = static_cast<uint64_t>(window_seconds * 1e12 + 0.5);

  int64_t prev_window = -1;
  uint64_t prev_t = 0;
  bool have_chan_t[2] = {false, false};
  uint64_t chan_t[2] = {0, 0};
  for (std::size_t r = 0; r < n_records; ++r) {
    const unsigned char* p = bytes.data() + kHeaderBytes + r * kRecordBytes;
    const uint32_t win = get_u32(p);
    const uint8_t channel = p[4];
    const uint64_t t = get_u64(p + 5);
    if (win >= n_windows) throw FormatError("stream: window id beyond header count");
    if (channel > 1) throw FormatError("stream: channel out of range");
    if (t >= window_ps) throw FormatError("stream: timestamp beyond window duration");
    if (static_cast<int64_t>(win) < prev_window ||
        (static_cast<int64_t>(win) == prev_window && t < prev_t))
      throw FormatError("stream: records not sorted by (window, timestamp)");
    if (static_cast<int64_t>(win) != prev_window) have_chan_t[0] = have_chan_t[1] = false;
    if (have_chan_t[channel] && t <= chan_t[channel])
      throw FormatError("stream: duplicate timestamp on one channel");
    have_chan_t[channel] = true;
    chan_t[channel] = t;
    prev_window = static_cast<int64_t>(win);
    prev_t = t;
    if (channel == 0) {
      s.t0.push_back(t);
      s.windows[win].n0++;
    } else {
      s.t1.push_back(t);
      s.windows[win].n1++;
    }
  }
  return s;
}

void write_stream(const std::string& path, const ClickStream& s) {
  write_bytes_atomic(path, encode_stream(s));
}

ClickStream read_stream(const std::string& path, double window_seconds) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("stream: cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return decode_stream(bytes, window_seconds);
}

}  // namespace cavityg2
