#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cavityg2/click_stream.hpp"

namespace cavityg2 {

// Channel timestamps not strictly increasing inside a window.
struct UnsortedInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input too big for the all-pairs oracle.
struct TooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Histograms with different binning cannot be merged.
struct ConfigMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct WindowSpan {
  uint32_t id = 0;
  uint64_t length_ps = 0;
};

// Cross-correlation histogram of channel-1 minus channel-0 pair delays over
// [-tau_max, tau_max), bin k covering [(k - n_side)*bin, (k - n_side + 1)*bin)
// in integer picoseconds. tau_max is rounded down to a whole number of bins.
// Raw counts plus the exposure bookkeeping needed to normalize: g2 estimates
// are rate-normalized with a per-window boundary correction, so uncorrelated
// input gives 1 in every bin, boundary bins included.
struct CorrelationHistogram {
  int64_t bin_ps = 0;
  int64_t n_side = 0;  // bins per sign; counts.size() == 2*n_side
  std::vector<int64_t> counts;
  uint64_t n1 = 0, n2 = 0;            // channel totals
  std::vector<WindowSpan> windows;    // every window, including empty ones
  bool empty_channel = false;         // one channel had no clicks at all

  std::size_t n_bins() const { return counts.size(); }
  double bin_width_s() const { return static_cast<double>(bin_ps) * 1e-12; }
  double tau_max_s() const { return static_cast<double>(n_side * bin_ps) * 1e-12; }
  double tau_center_s(std::size_t k) const {
    return (static_cast<double>(static_cast<int64_t>(k) - n_side) + 0.5) * bin_width_s();
  }
  std::vector<double> tau_centers_s() const;
  double total_duration_s() const;
  // Effective coincidence exposure of bin k: sum over windows of the overlap
  // integral of (window_len - |tau|) across the bin, divided by the bin width.
  double t_corr_s(std::size_t k) const;
  std::vector<double> g2() const;
  std::vector<double> sigma() const;  // g2/sqrt(counts), 0 for empty bins

  // One-sided view: pair delays are histogrammed in both orders and the
  // exposure is already |tau|-symmetric, so the +-tau bins estimate the same
  // quantity and merge exactly (summed counts over summed exposure).
  struct Folded {
    std::vector<double> tau_s;  // the n_side positive bin centers
    std::vector<double> g2;
    std::vector<double> sigma;
  };
  Folded folded() const;
};

// Sorted sliding-window pair histogrammer, O(n + pairs). Pairs are taken
// within windows only; |dt| beyond the binned range is excluded.
CorrelationHistogram cross_correlate(const ClickStream& s, double bin_width_s,
                                     double tau_max_s);

// All-pairs oracle, counts bitwise identical to cross_correlate. Refuses
// streams beyond 1e5 clicks.
CorrelationHistogram naive_correlate(const ClickStream& s, double bin_width_s,
                                     double tau_max_s);

// Adds counts, totals and window lists; associative and commutative, and
// correlating disjoint window sets then merging equals correlating the whole
// stream, bit for bit.
CorrelationHistogram merge(const CorrelationHistogram& a, const CorrelationHistogram& b);

// CSV export: "tau_s,counts,g2,sigma".
void write_histogram_csv(const std::string& path, const CorrelationHistogram& h);

}  // namespace cavityg2
