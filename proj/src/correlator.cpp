#include "cavityg2/correlator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "cavityg2/io_util.hpp"

namespace cavityg2 {

namespace {

// Shared by the fast path and the oracle so their counts agree bitwise.
// dt must lie in [-n_side*bin_ps, n_side*bin_ps). The float estimate of the
// division is verified and nudged against exact integer arithmetic.
inline int64_t bin_index(int64_t dt, int64_t bin_ps, int64_t n_side, double inv_bin) {
  const int64_t shifted = dt + n_side * bin_ps;
  auto idx = static_cast<int64_t>(static_cast<double>(shifted) * inv_bin);
  while ((idx + 1) * bin_ps <= shifted) ++idx;
  while (idx * bin_ps > shifted) --idx;
  return idx;
}

struct ChannelView {
  const uint64_t* t = nullptr;
  std::size_t n = 0;
};

void check_sorted(const ChannelView& v, uint32_t window, int channel) {
  for (std::size_t i = 1; i < v.n; ++i)
    if (v.t[i] <= v.t[i - 1])
      throw UnsortedInput("correlate: channel " + std::to_string(channel) + " of window " +
                          std::to_string(window) + " is not strictly increasing");
}

CorrelationHistogram prepare(const ClickStream& s, double bin_width_s, double tau_max_s) {
  if (!(bin_width_s > 0.0)) throw std::invalid_argument("correlate: bin width must be > 0");
  if (!(tau_max_s >= bin_width_s))
    throw std::invalid_argument("correlate: tau_max must be at least one bin");
  CorrelationHistogram h;
  h.bin_ps = std::llround(bin_width_s * 1e12);
  if (h.bin_ps < 1) throw std::invalid_argument("correlate: bin width under 1 ps");
  h.n_side = std::llround(tau_max_s * 1e12) / h.bin_ps;
  h.counts.assign(static_cast<std::size_t>(2 * h.n_side), 0);
  const auto len_ps = static_cast<uint64_t>(std::llround(s.window_seconds * 1e12));
  if (len_ps == 0) throw std::invalid_argument("correlate: window duration under 1 ps");
  h.windows.reserve(s.windows.size());
  for (const auto& w : s.windows) h.windows.push_back({w.id, len_ps});
  h.n1 = s.t0.size();
  h.n2 = s.t1.size();
  h.empty_channel = h.n1 == 0 || h.n2 == 0;

  std::size_t sum0 = 0, sum1 = 0;
  for (const auto& w : s.windows) {
    sum0 += w.n0;
    sum1 += w.n1;
  }
  if (sum0 != s.t0.size() || sum1 != s.t1.size())
    throw std::invalid_argument("correlate: window click counts do not match the data");
  return h;
}

}  // namespace

std::vector<double> CorrelationHistogram::tau_centers_s() const {
  std::vector<double> v(n_bins());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = tau_center_s(k);
  return v;
}

double CorrelationHistogram::total_duration_s() const {
  double t = 0.0;
  for (const auto& w : windows) t += static_cast<double>(w.length_ps) * 1e-12;
  return t;
}

double CorrelationHistogram::t_corr_s(std::size_t k) const {
  const double bw = bin_width_s();
  const double x0 = (static_cast<double>(static_cast<int64_t>(k) - n_side)) * bw;
  const double x1 = x0 + bw;
  // fold to |tau|: the bin lies entirely on one side of zero
  const double a = std::min(std::abs(x0), std::abs(x1));
  const double b = std::max(std::abs(x0), std::abs(x1));
  double total = 0.0;
  for (const auto& w : windows) {
    const double len = static_cast<double>(w.length_ps) * 1e-12;
    const double xa = std::min(a, len), xb = std::min(b, len);
    total += (len * xb - 0.5 * xb * xb) - (len * xa - 0.5 * xa * xa);
  }
  return total / bw;
}

std::vector<double> CorrelationHistogram::g2() const {
  std::vector<double> v(n_bins(), 0.0);
  if (n1 == 0 || n2 == 0) return v;
  const double t_total = total_duration_s();
  if (!(t_total > 0.0)) return v;
  const double scale = t_total * t_total /
                       (static_cast<double>(n1) * static_cast<double>(n2) * bin_width_s());
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double tc = t_corr_s(k);
    if (tc > 0.0) v[k] = static_cast<double>(counts[k]) * scale / tc;
  }
  return v;
}

std::vector<double> CorrelationHistogram::sigma() const {
  std::vector<double> v = g2();
  for (std::size_t k = 0; k < v.size(); ++k)
    v[k] = counts[k] > 0 ? v[k] / std::sqrt(static_cast<double>(counts[k])) : 0.0;
  return v;
}

CorrelationHistogram::Folded CorrelationHistogram::folded() const {
  Folded f;
  const auto n = static_cast<std::size_t>(n_side);
  f.tau_s.resize(n);
  f.g2.assign(n, 0.0);
  f.sigma.assign(n, 0.0);
  const double t_total = total_duration_s();
  const bool live = n1 > 0 && n2 > 0 && t_total > 0.0;
  const double scale =
      live ? t_total * t_total /
                 (static_cast<double>(n1) * static_cast<double>(n2) * bin_width_s())
           : 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t kp = n + j;
    const std::size_t km = n - 1 - j;
    f.tau_s[j] = tau_center_s(kp);
    const double c = static_cast<double>(counts[kp] + counts[km]);
    const double tc = t_corr_s(kp) + t_corr_s(km);
    if (live && tc > 0.0 && c > 0.0) {
      f.g2[j] = c * scale / tc;
      f.sigma[j] = f.g2[j] / std::sqrt(c);
    }
  }
  return f;
}

CorrelationHistogram cross_correlate(const ClickStream& s, double bin_width_s,
                                     double tau_max_s) {
  CorrelationHistogram h = prepare(s, bin_width_s, tau_max_s);
  const int64_t range = h.n_side * h.bin_ps;
  const double inv_bin = 1.0 / static_cast<double>(h.bin_ps);
  std::size_t o0 = 0, o1 = 0;
  for (const auto& w : s.windows) {
    const ChannelView a{s.t0.data() + o0, w.n0};
    const ChannelView b{s.t1.data() + o1, w.n1};
    o0 += w.n0;
    o1 += w.n1;
    check_sorted(a, w.id, 0);
    check_sorted(b, w.id, 1);
    if (h.empty_channel || a.n == 0 || b.n == 0) continue;
    std::size_t lo = 0, hi = 0;
    for (std::size_t i = 0; i < a.n; ++i) {
      const auto ta = static_cast<int64_t>(a.t[i]);
      while (lo < b.n && static_cast<int64_t>(b.t[lo]) < ta - range) ++lo;
      if (hi < lo) hi = lo;
      while (hi < b.n && static_cast<int64_t>(b.t[hi]) < ta + range) ++hi;
      for (std::size_t j = lo; j < hi; ++j) {
        const int64_t dt = static_cast<int64_t>(b.t[j]) - ta;
        ++h.counts[static_cast<std::size_t>(bin_index(dt, h.bin_ps, h.n_side, inv_bin))];
      }
    }
  }
  return h;
}

CorrelationHistogram naive_correlate(const ClickStream& s, double bin_width_s,
                                     double tau_max_s) {
  if (s.total_clicks() > 100000)
    throw TooLarge("naive_correlate: refusing " + std::to_string(s.total_clicks()) +
                   " clicks (cap 100000)");
  CorrelationHistogram h = prepare(s, bin_width_s, tau_max_s);
  const int64_t range = h.n_side * h.bin_ps;
  const double inv_bin = 1.0 / static_cast<double>(h.bin_ps);
  std::size_t o0 = 0, o1 = 0;
  for (const auto& w : s.windows) {
    const ChannelView a{s.t0.data() + o0, w.n0};
    const ChannelView b{s.t1.data() + o1, w.n1};
    o0 += w.n0;
    o1 += w.n1;
    check_sorted(a, w.id, 0);
    check_sorted(b, w.id, 1);
    for (std::size_t i = 0; i < a.n; ++i)
      for (std::size_t j = 0; j < b.n; ++j) {
        const int64_t dt = static_cast<int64_t>(b.t[j]) - static_cast<int64_t>(a.t[i]);
        if (dt >= -range && dt < range)
          ++h.counts[static_cast<std::size_t>(bin_index(dt, h.bin_ps, h.n_side, inv_bin))];
      }
  }
  return h;
}

CorrelationHistogram merge(const CorrelationHistogram& a, const CorrelationHistogram& b) {
  if (a.bin_ps != b.bin_ps || a.n_side != b.n_side)
    throw ConfigMismatch("merge: histograms use different binning");
  CorrelationHistogram m = a;
  for (std::size_t k = 0; k < m.counts.size(); ++k) m.counts[k] += b.counts[k];
  m.n1 += b.n1;
  m.n2 += b.n2;
  m.windows.insert(m.windows.end(), b.windows.begin(), b.windows.end());
  // fixed window order keeps the normalization sums identical however the
  // windows were partitioned before the merge
  std::stable_sort(m.windows.begin(), m.windows.end(),
                   [](const WindowSpan& x, const WindowSpan& y) { return x.id < y.id; });
  m.empty_channel = m.n1 == 0 || m.n2 == 0;
  return m;
}

void write_histogram_csv(const std::string& path, const CorrelationHistogram& h) {
  std::string text = "tau_s,counts,g2,sigma\n";
  const std::vector<double> g = h.g2();
  const std::vector<double> sg = h.sigma();
  char line[160];
  for (std::size_t k = 0; k < h.n_bins(); ++k) {
    std::snprintf(line, sizeof line, "%.17g,%lld,%.17g,%.17g\n", h.tau_center_s(k),
                  static_cast<long long>(h.counts[k]), g[k], sg[k]);
    text += line;
  }
  write_text_atomic(path, text);
}

}  // namespace cavityg2
