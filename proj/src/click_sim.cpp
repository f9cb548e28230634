#include "cavityg2/click_sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <limits>
#include <mutex>
#include <numbers>
#include <queue>
#include <random>
#include <thread>
#include <tuple>
#include <utility>

#include "cavityg2/master_equation.hpp"

namespace cavityg2 {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// All draws for one window come from one engine in a fixed order, so a window
// is reproducible no matter which thread runs it.
class WindowRng {
 public:
  WindowRng(uint64_t seed, uint32_t window) {
    std::seed_seq seq{static_cast<uint32_t>(seed & 0xffffffffu),
                      static_cast<uint32_t>(seed >> 32), window, 0x5eedu};
    eng_.seed(seq);
  }
  // 53-bit uniform in [0, 1); hand-rolled so streams are platform-identical.
  double u01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double exp_time(double rate) {
    if (!(rate > 0.0)) return kInf;
    return -std::log1p(-u01()) / rate;
  }
  double phase() { return kTwoPi * u01(); }

 private:
  std::mt19937_64 eng_;
};

struct EnvelopeInfo {
  EnvelopeShape shape = EnvelopeShape::Gaussian;
  double half = 0.0;   // support half-width around the center
  double sigma = 0.0;  // gaussian RMS width
};

EnvelopeInfo make_envelope(const TransitConfig& tc) {
  EnvelopeInfo e;
  e.shape = tc.shape;
  e.sigma = 0.5 * tc.transit_s;
  e.half = tc.shape == EnvelopeShape::Rectangular ? 0.5 * tc.transit_s : 3.0 * e.sigma;
  return e;
}

double envelope_amp(const EnvelopeInfo& e, double dt) {
  if (dt < -e.half || dt >= e.half) return 0.0;
  if (e.shape == EnvelopeShape::Rectangular) return 1.0;
  return std::exp(-dt * dt / (2.0 * e.sigma * e.sigma));
}

struct Emitter {
  double center = 0.0;
  double start = 0.0;
  double end = 0.0;
  double cos_p = 1.0, sin_p = 0.0;  // unit phasor of the current phase
  bool armed = true;
  bool active = false;   // inside support and tracked by the sweep
  uint32_t seq = 0;      // bumped on every kill; cancels queued events
};

struct WindowScratch {
  std::vector<double> c0, c1;  // click times in seconds, unsorted
};

// Queue of pending per-emitter state changes (time, emitter, seq): phase
// re-randomizations while armed, recycle returns while dead. Entries go stale
// when the emitter leaves its support or is killed after scheduling; stale
// entries are skipped on pop via the active flag and sequence number.
using EventQueue = std::priority_queue<std::tuple<double, int, uint32_t>,
                                       std::vector<std::tuple<double, int, uint32_t>>,
                                       std::greater<>>;

class WindowSim {
 public:
  WindowSim(const EmitterModel& em, SimMode mode, const TransitConfig& tc,
            const DetectionConfig& det, uint64_t seed, uint32_t wid)
      : em_(em), mode_(mode), tc_(tc), det_(det), env_(make_envelope(tc)),
        rng_(seed, wid), keep_p_(det.eta_out * det.eta_det) {}

  WindowScratch run() {
    draw_emitters();
    if (mode_ == SimMode::Particle) {
      for (const Emitter& a : atoms_) run_particle(a);
    } else {
      run_field_sweep();
    }
    add_dark_counts();
    return std::move(out_);
  }

 private:
  EventQueue queue_;

 private:
  void record_click(double t) {
    if (t < 0.0 || t >= tc_.window_s) return;
    if (rng_.u01() >= keep_p_) return;
    (rng_.u01() < 0.5 ? out_.c0 : out_.c1).push_back(t);
  }

  void draw_emitters() {
    const double mu = tc_.nbar_atoms / tc_.transit_s;
    if (!(mu > 0.0)) return;
    const double c_hi = tc_.window_s + env_.half;
    double c = -env_.half + rng_.exp_time(mu);
    while (c < c_hi) {
      Emitter a;
      a.center = c;
      a.start = c - env_.half;
      a.end = c + env_.half;
      if (mode_ != SimMode::Particle) {
        const double p = rng_.phase();
        a.cos_p = std::cos(p);
        a.sin_p = std::sin(p);
        if (mode_ == SimMode::Combined)
          a.armed = rng_.u01() < em_.armed_fraction;
        // first tick of the per-emitter scrambling clock: a phase reset while
        // armed, the recycle return while dead
        first_event_.push_back(a.start + rng_.exp_time(em_.recycle_rate));
      }
      atoms_.push_back(a);
      c += rng_.exp_time(mu);
    }
  }

  // Independent renewal cycle of a single emitter: emit at r0*h^2 while
  // armed, exponential cavity escape delay on each photon, dead time after
  // each emission. Entry state is the stationary armed/dead mixture.
  void run_particle(const Emitter& a) {
    const double r0 = em_.emission_rate;
    double t = a.start;
    if (rng_.u01() >= em_.armed_fraction) t += rng_.exp_time(em_.recycle_rate);
    const bool rect = env_.shape == EnvelopeShape::Rectangular;
    while (t < a.end) {
      // armed at t: find the next emission
      if (rect) {
        t += rng_.exp_time(r0);
        if (t >= a.end) return;
      } else {
        bool emitted = false;
        while (t < a.end) {
          t += rng_.exp_time(r0);
          if (t >= a.end) break;
          const double h = envelope_amp(env_, t - a.center);
          if (rng_.u01() < h * h) {
            emitted = true;
            break;
          }
        }
        if (!emitted) return;
      }
      record_click(t + rng_.exp_time(em_.escape_rate));
      t += rng_.exp_time(em_.recycle_rate);  // recycling dead time
    }
  }

  // Interference modes. Present emitters form E(t) = sum h_j exp(i phi_j)
  // (wave: all of them; combined: armed ones), and photons are a doubly
  // stochastic stream with intensity c*|E|^2. Each emitter carries a
  // scrambling clock ticking at recycle_rate: while armed a tick redraws the
  // phase, while dead (combined only) it is the recycle return, which re-arms
  // with a fresh phase. With a rectangular envelope the intensity is
  // piecewise constant between state changes and is sampled exactly; the
  // gaussian envelope falls back to thinning under a per-segment bound
  // c*(sum_j max h_j)^2, which no phase alignment can exceed.
  bool contributes(const Emitter& a) const { return mode_ == SimMode::Wave || a.armed; }

  void apply_event(int j, double t_ev, uint32_t seq, bool rect) {
    Emitter& a = atoms_[static_cast<std::size_t>(j)];
    if (!a.active || seq != a.seq) return;  // left its support or was killed
    if (rect && a.armed) e_sum_ -= std::complex<double>(a.cos_p, a.sin_p);
    a.armed = true;
    const double p = rng_.phase();
    a.cos_p = std::cos(p);
    a.sin_p = std::sin(p);
    if (rect) add_phasor(a);
    queue_.emplace(t_ev + rng_.exp_time(em_.recycle_rate), j, a.seq);
  }

  void run_field_sweep() {
    if (atoms_.empty()) return;
    const double c_int =
        mode_ == SimMode::Wave ? em_.photon_flux : em_.emission_rate;
    const bool rect = env_.shape == EnvelopeShape::Rectangular;
    for (std::size_t j = 0; j < atoms_.size(); ++j)
      if (first_event_[j] < kInf) queue_.emplace(first_event_[j], static_cast<int>(j), 0u);

    std::size_t i_start = 0, i_end = 0;  // same order: equal support widths
    double t = atoms_[0].start;
    const double t_stop = tc_.window_s;

    while (t < t_stop) {
      const double next_start = i_start < atoms_.size() ? atoms_[i_start].start : kInf;
      const double next_end = i_end < atoms_.size() ? atoms_[i_end].end : kInf;
      const double seg_b = std::min({next_start, next_end, t_stop});

      if (rect) {
        // piecewise-constant intensity: sample the next photon exactly
        while (t < seg_b) {
          const double rate = c_int * std::norm(e_sum_);
          const double t_click = t + rng_.exp_time(rate);
          const double t_ev = queue_.empty() ? kInf : std::get<0>(queue_.top());
          if (t_click < std::min(t_ev, seg_b)) {
            t = t_click;
            handle_click(t);
          } else if (t_ev < seg_b) {
            const auto [te, j, s] = queue_.top();
            queue_.pop();
            t = te;
            apply_event(j, te, s, true);
          } else {
            t = seg_b;
          }
        }
      } else {
        // thinning under a bound no phase alignment can exceed
        double amp_bound = 0.0;
        for (int j : present_) {
          const Emitter& a = atoms_[static_cast<std::size_t>(j)];
          const double tp = std::clamp(a.center, t, seg_b);
          amp_bound += envelope_amp(env_, tp - a.center);
        }
        const double bound = c_int * amp_bound * amp_bound;
        while (t < seg_b) {
          t += rng_.exp_time(bound);
          if (t >= seg_b) {
            t = seg_b;
            break;
          }
          // apply pending state changes up to t, in time order
          while (!queue_.empty() && std::get<0>(queue_.top()) <= t) {
            const auto [t_ev, j, s] = queue_.top();
            queue_.pop();
            apply_event(j, t_ev, s, false);
          }
          double re = 0.0, im = 0.0;
          for (int j : present_) {
            const Emitter& a = atoms_[static_cast<std::size_t>(j)];
            if (!contributes(a)) continue;
            const double h = envelope_amp(env_, t - a.center);
            re += h * a.cos_p;
            im += h * a.sin_p;
          }
          const double rate = c_int * (re * re + im * im);
          if (rng_.u01() * bound < rate) handle_click(t);
        }
      }

      // boundary: ends before starts at equal times (half-open supports)
      if (next_end <= std::min(next_start, t_stop) && i_end < atoms_.size()) {
        const int idx = static_cast<int>(i_end++);
        Emitter& a = atoms_[static_cast<std::size_t>(idx)];
        a.active = false;
        present_.erase(std::find(present_.begin(), present_.end(), idx));
        if (rect && contributes(a)) e_sum_ -= std::complex<double>(a.cos_p, a.sin_p);
      } else if (next_start <= t_stop && i_start < atoms_.size()) {
        const int idx = static_cast<int>(i_start++);
        Emitter& a = atoms_[static_cast<std::size_t>(idx)];
        a.active = true;
        present_.push_back(idx);
        if (rect && contributes(a)) add_phasor(a);
      } else {
        break;
      }
    }
  }

  void handle_click(double t) {
    if (mode_ == SimMode::Combined) attribute_and_recycle(t);
    record_click(t);
  }

  // Pick the emitting atom with probability h^2 / sum h^2 over armed
  // emitters, then park it in the recycling dead state.
  void attribute_and_recycle(double t) {
    double total = 0.0;
    for (int j : present_) {
      const Emitter& a = atoms_[j];
      if (a.armed) {
        const double h = envelope_amp(env_, t - a.center);
        total += h * h;
      }
    }
    if (!(total > 0.0)) return;  // zero-rate click cannot occur; guard anyway
    double v = rng_.u01() * total;
    int pick = -1;
    for (int j : present_) {
      const Emitter& a = atoms_[j];
      if (!a.armed) continue;
      const double h = envelope_amp(env_, t - a.center);
      v -= h * h;
      if (v <= 0.0) {
        pick = j;
        break;
      }
    }
    if (pick < 0) {  // numerical tail: take the last armed one
      for (auto it = present_.rbegin(); it != present_.rend(); ++it)
        if (atoms_[*it].armed) {
          pick = *it;
          break;
        }
      if (pick < 0) return;
    }
    Emitter& a = atoms_[static_cast<std::size_t>(pick)];
    a.armed = false;
    ++a.seq;  // cancel any queued phase reset
    if (env_.shape == EnvelopeShape::Rectangular)
      e_sum_ -= std::complex<double>(a.cos_p, a.sin_p);
    queue_.emplace(t + rng_.exp_time(em_.recycle_rate), pick, a.seq);
  }

  void add_phasor(const Emitter& a) {
    e_sum_ += std::complex<double>(a.cos_p, a.sin_p);
    if (++phasor_updates_ % 4096 == 0) rebuild_e_sum();
  }

  void rebuild_e_sum() {
    std::complex<double> s = 0.0;
    for (int j : present_) {
      const Emitter& a = atoms_[j];
      if (mode_ == SimMode::Wave || a.armed) s += std::complex<double>(a.cos_p, a.sin_p);
    }
    e_sum_ = s;
  }

  void add_dark_counts() {
    if (!(det_.dark_rate_hz > 0.0)) return;
    for (std::vector<double>* ch : {&out_.c0, &out_.c1}) {
      double t = rng_.exp_time(det_.dark_rate_hz);
      while (t < tc_.window_s) {
        ch->push_back(t);
        t += rng_.exp_time(det_.dark_rate_hz);
      }
    }
  }

  const EmitterModel& em_;
  SimMode mode_;
  const TransitConfig& tc_;
  const DetectionConfig& det_;
  EnvelopeInfo env_;
  WindowRng rng_;
  double keep_p_;
  std::vector<Emitter> atoms_;
  std::vector<double> first_event_;
  std::vector<int> present_;
  std::complex<double> e_sum_ = 0.0;
  uint64_t phasor_updates_ = 0;
  WindowScratch out_;
};

void quantize_channel(std::vector<double>& sec, uint64_t w_ps, int64_t dead_ps,
                      std::vector<uint64_t>& out) {
  std::vector<uint64_t> ps;
  ps.reserve(sec.size());
  for (double t : sec) {
    auto q = static_cast<uint64_t>(std::llround(t * 1e12));
    ps.push_back(std::min(q, w_ps - 1));
  }
  std::sort(ps.begin(), ps.end());
  // collisions bump forward by 1 ps so per-channel stamps stay strictly increasing
  for (std::size_t i = 1; i < ps.size(); ++i)
    if (ps[i] <= ps[i - 1]) ps[i] = ps[i - 1] + 1;
  while (!ps.empty() && ps.back() >= w_ps) ps.pop_back();
  if (dead_ps > 0) {
    std::vector<uint64_t> kept;
    kept.reserve(ps.size());
    for (uint64_t t : ps)
      if (kept.empty() || t - kept.back() >= static_cast<uint64_t>(dead_ps)) kept.push_back(t);
    ps.swap(kept);
  }
  out = std::move(ps);
}

}  // namespace

void TransitConfig::validate() const {
  auto fail = [](const char* m) { throw std::invalid_argument(m); };
  if (!(nbar_atoms >= 0.0)) fail("TransitConfig: nbar_atoms must be >= 0");
  if (!(transit_s > 0.0)) fail("TransitConfig: transit_s must be > 0");
  if (!(window_s > 0.0)) fail("TransitConfig: window_s must be > 0");
  if (!(window_s >= 2.0 * transit_s))
    fail("TransitConfig: window_s must be at least twice transit_s");
  if (n_windows < 0) fail("TransitConfig: n_windows must be >= 0");
}

void DetectionConfig::validate() const {
  auto fail = [](const char* m) { throw std::invalid_argument(m); };
  if (!(eta_out >= 0.0 && eta_out <= 1.0)) fail("DetectionConfig: eta_out must be in [0,1]");
  if (!(eta_det >= 0.0 && eta_det <= 1.0)) fail("DetectionConfig: eta_det must be in [0,1]");
  if (!(dead_time_s >= 0.0)) fail("DetectionConfig: dead_time_s must be >= 0");
  if (!(dark_rate_hz >= 0.0)) fail("DetectionConfig: dark_rate_hz must be >= 0");
  if (!(max_expected_clicks > 0.0)) fail("DetectionConfig: max_expected_clicks must be > 0");
}

const char* to_string(SimMode m) {
  switch (m) {
    case SimMode::Particle: return "particle";
    case SimMode::Wave: return "wave";
    case SimMode::Combined: return "combined";
  }
  return "?";
}

const char* to_string(EnvelopeShape s) {
  return s == EnvelopeShape::Gaussian ? "gaussian" : "rectangular";
}

EmitterModel make_emitter_model(const SystemParams& p) {
  p.validate();
  const LindbladGenerator gen = build_lindblad(p);
  const Matrix rho = steady_state(gen);
  return make_emitter_model(p, emission_rate(p, rho).photon_flux / (2.0 * p.kappa));
}

EmitterModel make_emitter_model(const SystemParams& p, double nbar_cavity) {
  EmitterModel em;
  em.photon_flux = 2.0 * p.kappa * nbar_cavity;
  em.recycle_rate = p.recycling_rate();
  em.escape_rate = 2.0 * p.kappa;
  em.eta_out = p.eta_out;
  em.eta_det = p.eta_det;
  if (!(em.photon_flux > 0.0)) throw CalibrationError("emitter model: photon flux is zero");
  if (!(em.photon_flux < em.recycle_rate))
    throw CalibrationError(
        "emitter model: photon flux exceeds the recycle rate; the renewal cycle "
        "cannot reach the requested output");
  em.armed_fraction = 1.0 - em.photon_flux / em.recycle_rate;
  em.emission_rate = em.photon_flux / em.armed_fraction;
  return em;
}

double mean_coupling_square(const TransitConfig& transit) {
  if (transit.shape == EnvelopeShape::Rectangular) return 1.0;
  // integral of exp(-t^2/sigma^2) over +-3 sigma, divided by transit = 2 sigma
  return 0.5 * std::sqrt(std::numbers::pi) * std::erf(3.0);
}

double predicted_channel_rate(const EmitterModel& em, const TransitConfig& transit,
                              const DetectionConfig& det) {
  return transit.nbar_atoms * em.photon_flux * mean_coupling_square(transit) * det.eta_out *
             0.5 * det.eta_det +
         det.dark_rate_hz;
}

ClickStream simulate(const EmitterModel& em, SimMode mode, const TransitConfig& transit,
                     const DetectionConfig& det, uint64_t seed, int threads) {
  transit.validate();
  det.validate();
  if (!(em.emission_rate > 0.0 && em.recycle_rate > 0.0 && em.escape_rate > 0.0 &&
        em.armed_fraction > 0.0 && em.armed_fraction <= 1.0))
    throw CalibrationError("simulate: emitter model rates are not usable");

  const double expected =
      2.0 * predicted_channel_rate(em, transit, det) * transit.window_s;
  if (expected > det.max_expected_clicks)
    throw RateOverflow("simulate: expected clicks per window " + std::to_string(expected) +
                       " exceed the cap " + std::to_string(det.max_expected_clicks));

  const auto n = static_cast<uint32_t>(transit.n_windows);
  std::vector<WindowScratch> scratch(n);

  auto run_window = [&](uint32_t w) {
    WindowSim sim(em, mode, transit, det, seed, w);
    scratch[w] = sim.run();
  };

  int want = std::max(1, threads);
  want = std::min<int>(want, std::max(1u, std::thread::hardware_concurrency()));
  if (want > 1 && n > 1) {
    std::atomic<uint32_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mu;
    auto worker = [&] {
      try {
        for (uint32_t w = next.fetch_add(1); w < n; w = next.fetch_add(1)) run_window(w);
      } catch (...) {
        std::scoped_lock lk(error_mu);
        if (!first_error) first_error = std::current_exception();
        next.store(n);
      }
    };
    std::vector<std::thread> pool;
    const int n_threads = std::min<uint32_t>(static_cast<uint32_t>(want), n);
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  } else {
    for (uint32_t w = 0; w < n; ++w) run_window(w);
  }

  ClickStream s;
  s.window_seconds = transit.window_s;
  s.seed = seed;
  const auto w_ps = static_cast<uint64_t>(std::llround(transit.window_s * 1e12));
  const auto dead_ps = static_cast<int64_t>(std::llround(det.dead_time_s * 1e12));
  std::vector<uint64_t> q0, q1;
  for (uint32_t w = 0; w < n; ++w) {
    quantize_channel(scratch[w].c0, w_ps, dead_ps, q0);
    quantize_channel(scratch[w].c1, w_ps, dead_ps, q1);
    ClickStream::Window rec;
    rec.id = w;
    rec.n0 = static_cast<uint32_t>(q0.size());
    rec.n1 = static_cast<uint32_t>(q1.size());
    s.windows.push_back(rec);
    s.t0.insert(s.t0.end(), q0.begin(), q0.end());
    s.t1.insert(s.t1.end(), q1.begin(), q1.end());
  }
  return s;
}

namespace {

// Pair correlation of one renewal emitter observed through the exponential
// escape delay: the bare dip 1 - exp(-beta|t|) convolved with the Laplace
// density of the delay difference, (a/2) exp(-a|x|).
double smeared_dip(double a, double beta, double tau) {
  const double t = std::abs(tau);
  const double sum_term = (std::exp(-beta * t) + std::exp(-a * t)) / (a + beta);
  double diff_term;
  if (std::abs(a - beta) < 1e-9 * (a + beta))
    diff_term = t * std::exp(-a * t);
  else
    diff_term = (std::exp(-a * t) - std::exp(-beta * t)) / (beta - a);
  return 1.0 - 0.5 * a * (sum_term + diff_term);
}

}  // namespace

CorrelationCurve process_field_correlation(const EmitterModel& em, SimMode mode,
                                           const std::vector<double>& tau_grid) {
  CorrelationCurve c;
  c.kind = CorrelationCurve::Kind::Field;
  c.tau_s = tau_grid;
  c.normalization = 1.0;
  c.value.reserve(tau_grid.size());
  for (double tau : tau_grid) {
    double v = 0.0;
    if (mode == SimMode::Wave) v = std::exp(-em.recycle_rate * std::abs(tau));
    else if (mode == SimMode::Combined)
      v = std::exp(-(em.emission_rate + em.recycle_rate) * std::abs(tau));
    c.value.emplace_back(v, 0.0);
  }
  return c;
}

CorrelationCurve process_intensity_correlation(const EmitterModel& em, SimMode mode,
                                               const std::vector<double>& tau_grid) {
  CorrelationCurve c;
  c.kind = CorrelationCurve::Kind::Intensity;
  c.tau_s = tau_grid;
  c.normalization = 1.0;
  c.value.reserve(tau_grid.size());
  const double beta = em.emission_rate + em.recycle_rate;
  for (double tau : tau_grid) {
    double v = 1.0;
    if (mode == SimMode::Combined) v = 1.0 - std::exp(-beta * std::abs(tau));
    else if (mode == SimMode::Particle) v = smeared_dip(em.escape_rate, beta, tau);
    c.value.emplace_back(v, 0.0);
  }
  return c;
}

}  // namespace cavityg2
