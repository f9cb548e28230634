#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cavityg2 {

// Malformed timestamp file: bad magic/version, truncation, out-of-range or
// out-of-order records.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Two-channel click record, grouped by acquisition window. Timestamps are
// integer picoseconds from the start of their window and strictly increasing
// per channel inside a window; every window of the run is listed even when it
// recorded nothing, because empty exposure still normalizes correlations.
struct ClickStream {
  struct Window {
    uint32_t id = 0;
    uint32_t n0 = 0;  // clicks on channel 0 in this window
    uint32_t n1 = 0;
  };

  std::vector<Window> windows;   // ascending id
  std::vector<uint64_t> t0;      // channel 0 timestamps, window-major
  std::vector<uint64_t> t1;      // channel 1 timestamps, window-major
  double window_seconds = 8e-3;  // uniform window duration (not stored in the file)
  uint64_t seed = 0;             // RNG seed used to produce the stream (0 if read back)

  std::size_t n_windows() const { return windows.size(); }
  std::size_t total_clicks() const { return t0.size() + t1.size(); }
  double total_duration() const { return window_seconds * static_cast<double>(windows.size()); }
};

// Binary layout (little-endian):
//   header, 16 bytes: magic "PSTM", version u16 (=1), channel count u16 (=2),
//                     window count u32, reserved u32 (=0)
//   records, 13 bytes each: window id u32, channel u8, timestamp u64 (ps)
// Records are sorted by (window, timestamp, channel). Window duration is not
// part of the format and travels out of band.
inline constexpr uint16_t kStreamFormatVersion = 1;

std::vector<unsigned char> encode_stream(const ClickStream& s);
ClickStream decode_stream(const std::vector<unsigned char>& bytes, double window_seconds);

void write_stream(const std::string& path, const ClickStream& s);
ClickStream read_stream(const std::string& path, double window_seconds);

}  // namespace cavityg2
