// Simulated experiments: SWAP-test overlap estimation with shot noise,
// atomic and photonic state tomography under parameter noise, and the
// Poisson bootstrap for tomographic fidelity uncertainties.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "qembed/compile.hpp"
#include "qembed/core.hpp"
#include "qembed/detail/nelder_mead.hpp"
#include "qembed/embedding.hpp"
#include "qembed/random.hpp"

namespace qembed {

// ---------------------------------------------------------------------------
// SWAP test

/// Probability of reading the ancilla as 0: (1 + |<a|b>|^2) / 2.
inline double swap_test_prob(const PureQubitState& a, const PureQubitState& b) {
  return 0.5 * (1.0 + fidelity(a, b));
}

/// Brute-force three-qubit simulation of the SWAP test: ancilla (most
/// significant), a, b; H on the ancilla, controlled-SWAP of a and b, H on
/// the ancilla, then the ancilla-0 probability.
inline double swap_test_statevector_oracle(const PureQubitState& a, const PureQubitState& b) {
  std::array<cplx, 8> psi{};
  const std::array<cplx, 2> av{a.amp0, a.amp1}, bv{b.amp0, b.amp1};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) psi[static_cast<std::size_t>(2 * i + j)] = av[i] * bv[j];

  const double r = std::numbers::sqrt2 / 2.0;
  auto hadamard_ancilla = [&] {
    for (std::size_t k = 0; k < 4; ++k) {
      const cplx lo = psi[k], hi = psi[k + 4];
      psi[k] = r * (lo + hi);
      psi[k + 4] = r * (lo - hi);
    }
  };
  hadamard_ancilla();
  std::swap(psi[4 + 1], psi[4 + 2]);  // |1,0,1> <-> |1,1,0>
  hadamard_ancilla();

  double p0 = 0.0;
  for (std::size_t k = 0; k < 4; ++k) p0 += std::norm(psi[k]);
  return p0;
}

struct ShotModel {
  std::int64_t shots = 2000;
  std::uint64_t seed = 0;

  void validate() const {
    if (shots < 1) throw std::invalid_argument("shots must be >= 1");
  }
};

/// 2 k / shots - 1 for k ancilla-0 outcomes; unclamped, in [-1, 1].
inline double swap_test_raw_estimate(std::int64_t zeros, std::int64_t shots) {
  return 2.0 * static_cast<double>(zeros) / static_cast<double>(shots) - 1.0;
}

/// Overlap estimate from `shots` simulated SWAP tests, clamped to [0, 1].
inline double sample_swap_test(const PureQubitState& a, const PureQubitState& b, const ShotModel& model) {
  model.validate();
  Rng rng = make_rng(derive_seed(model.seed, "swap-test"));
  const std::int64_t zeros = binomial(rng, model.shots, swap_test_prob(a, b));
  return std::clamp(swap_test_raw_estimate(zeros, model.shots), 0.0, 1.0);
}

/// Every one of the n^2 entries (diagonal included) estimated from its own
/// SWAP-test run with seed derive_seed(seed, {i, j}). Not symmetrized.
inline GramMatrix gram_from_shots(std::span<const PureQubitState> states, const ShotModel& model,
                                  std::vector<std::string> ids = {}) {
  model.validate();
  GramMatrix g = gram_matrix(states, std::move(ids));
  for (std::size_t i = 0; i < g.n; ++i) {
    for (std::size_t j = 0; j < g.n; ++j) {
      ShotModel entry = model;
      entry.seed = derive_seed(model.seed, {static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)});
      g.at(i, j) = sample_swap_test(states[i], states[j], entry);
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Tomography records

enum class Platform { Atomic, Photonic };

/// Projector order for photonic counts.
enum Projector : std::size_t { kH = 0, kV, kD, kA, kR, kL };

struct TomographyRecord {
  Platform platform = Platform::Atomic;
  // Atomic: one row per repetition, columns (x, y, z). `populations` holds
  // the relative population P1 / (P0 + P1) after the analysis pulses,
  // `components` the spin component derived from it.
  std::vector<std::array<double, 3>> populations;
  std::vector<std::array<double, 3>> components;
  // Photonic: counts for H, V, D, A, R, L.
  std::array<double, 6> counts{};
  BlochVector raw;            // before physicality projection
  BlochVector reconstructed;  // inside the unit ball
  std::array<double, 3> uncertainty{};
};

/// Radial projection onto the closed unit ball.
inline BlochVector reconstruct_bloch(const BlochVector& measured) {
  for (int k = 0; k < 3; ++k) detail::require_finite(measured[k], "Bloch component");
  const double n = measured.norm();
  if (n <= 1.0) return measured;
  return {measured.x / n, measured.y / n, measured.z / n};
}

// ---------------------------------------------------------------------------
// Atomic tomography

struct AtomicNoiseModel {
  double relative_drift = 0.01;                // per-session fractional offset of rabi and detuning
  double rabi_jitter = 2.0 * pi * 1.5e3;       // rad/s, per repetition
  double detuning_jitter = 2.0 * pi * 71.0;    // rad/s, per repetition
  int repetitions = 5;

  static AtomicNoiseModel none() { return {0.0, 0.0, 0.0, 1}; }

  void validate() const {
    if (!(relative_drift >= 0.0) || !(rabi_jitter >= 0.0) || !(detuning_jitter >= 0.0))
      throw std::invalid_argument("atomic noise parameters must be >= 0");
    if (repetitions < 1) throw std::invalid_argument("repetitions must be >= 1");
  }
};

/// Readout pulses that turn the x and y spin components into populations.
/// Each pulse maps the +axis eigenstate to a pole; `sign` is +1 when it
/// lands on |0> and -1 when it lands on |1>.
struct AtomicAnalysis {
  PulseSequence x_pulse;
  double x_sign = 1.0;
  PulseSequence y_pulse;
  double y_sign = 1.0;
};

namespace detail {

/// Least-on-time exact transfer from -> to. Exact solutions form curves in
/// (tau1, T, tau2), so a multistart pick lands anywhere on them. Instead the
/// off time is scanned on a grid; at each grid point (tau1, tau2) is solved
/// from a lattice of starts, and the grid is refined around the best point.
/// Returns converged = false if no grid point admits an exact solution.
inline AtomicCompilation min_on_time_transfer(const PureQubitState& from, const PureQubitState& to,
                                              const AtomicPlatformSpec& spec, double grid_us = 1.0,
                                              double tolerance = 1e-16) {
  const double max_us = spec.max_duration * 1e6;
  const PureQubitState perp = orthogonal(to.normalized());
  const PureQubitState src = from.normalized();
  auto make = [&](double t1, double off, double t2) {
    PulseSequence s{std::clamp(t1, 0.0, max_us) * 1e-6, std::clamp(off, 0.0, max_us) * 1e-6,
                    std::clamp(t2, 0.0, max_us) * 1e-6, 0.0};
    s.infidelity = std::norm(inner(perp, atomic_unitary(s, spec) * src));
    return s;
  };
  SimplexOptions sopt;
  sopt.initial_step = 5.0;
  sopt.xtol = 1e-12;
  sopt.max_evaluations = 1500;

  std::optional<PulseSequence> best;
  auto consider = [&](const PulseSequence& s) {
    if (s.infidelity > tolerance) return;
    if (!best || s.on_time() < best->on_time() ||
        (s.on_time() == best->on_time() && s.total_time() < best->total_time()))
      best = s;
  };
  auto solve_at = [&](double off, std::span<const std::array<double, 2>> starts) {
    for (const auto& x0 : starts) {
      const auto r = nelder_mead<2>(
          [&](const std::array<double, 2>& p) { return make(p[0], off, p[1]).infidelity; }, x0, sopt);
      consider(make(r.x[0], off, r.x[1]));
    }
  };

  std::vector<std::array<double, 2>> lattice;
  constexpr int kLattice = 3;
  for (int i = 0; i < kLattice; ++i)
    for (int j = 0; j < kLattice; ++j)
      lattice.push_back({max_us * (i + 0.5) / kLattice, max_us * (j + 0.5) / kLattice});
  const int steps = static_cast<int>(std::floor(max_us / grid_us + 1e-9));
  for (int k = 0; k <= steps; ++k) solve_at(k * grid_us, lattice);

  // Faces with one on-segment switched off; these isolated solutions fall
  // between grid points.
  for (const auto& x0 : lattice) {
    const auto a = nelder_mead<2>(
        [&](const std::array<double, 2>& p) { return make(0.0, p[0], p[1]).infidelity; }, x0, sopt);
    consider(make(0.0, a.x[0], a.x[1]));
    const auto b = nelder_mead<2>(
        [&](const std::array<double, 2>& p) { return make(p[0], p[1], 0.0).infidelity; }, x0, sopt);
    consider(make(b.x[0], b.x[1], 0.0));
  }

  // Two refinement passes on a 10x finer grid, warm-started from the incumbent.
  double step = grid_us;
  for (int pass = 0; pass < 2 && best; ++pass) {
    const double centre = best->off * 1e6;
    const std::array<double, 2> warm{best->tau1 * 1e6, best->tau2 * 1e6};
    step /= 10.0;
    for (int k = -10; k <= 10; ++k) {
      const double off = centre + k * step;
      if (off < 0.0 || off > max_us) continue;
      solve_at(off, std::span(&warm, 1));
    }
  }

  AtomicCompilation out;
  out.converged = best.has_value();
  out.sequence = best.value_or(make(0.0, 0.0, 0.0));
  out.quantized = out.sequence;
  return out;
}

}  // namespace detail

/// Readout pulses with the least drive-on time (the Rabi frequency is the
/// noisiest parameter), each allowed to map its axis to either pole.
/// Throws std::runtime_error if no exact solution fits in max_duration.
inline AtomicAnalysis compile_atomic_analysis(const AtomicPlatformSpec& spec) {
  spec.validate();
  const double r = std::numbers::sqrt2 / 2.0;
  const PureQubitState plus_x{r, r}, plus_y{r, cplx{0.0, r}};
  auto best_for = [&](const PureQubitState& axis, PulseSequence& pulse, double& sign) {
    bool found = false;
    for (const auto& [pole, s] : {std::pair{ket0(), 1.0}, std::pair{ket1(), -1.0}}) {
      const AtomicCompilation c = detail::min_on_time_transfer(axis, pole, spec);
      if (!c.converged) continue;
      if (!found || c.sequence.on_time() < pulse.on_time()) {
        pulse = c.sequence;
        sign = s;
        found = true;
      }
    }
    if (!found) throw std::runtime_error("compile_atomic_analysis: no exact readout pulse found");
  };
  AtomicAnalysis a;
  best_for(plus_x, a.x_pulse, a.x_sign);
  best_for(plus_y, a.y_pulse, a.y_sign);
  return a;
}

namespace detail {

/// (relative population P1/(P0+P1), spin component) for one component.
inline std::pair<double, double> atomic_readout(const PulseSequence& seq, const AtomicPlatformSpec& spec,
                                                const AtomicAnalysis& analysis, int component) {
  PureQubitState psi = atomic_evolution(seq, spec);
  double sign = 1.0;
  if (component == 0) {
    psi = atomic_unitary(analysis.x_pulse, spec) * psi;
    sign = analysis.x_sign;
  } else if (component == 1) {
    psi = atomic_unitary(analysis.y_pulse, spec) * psi;
    sign = analysis.y_sign;
  }
  const double p0 = std::norm(psi.amp0), p1 = std::norm(psi.amp1);
  return {p1 / (p0 + p1), sign * (p0 - p1) / (p0 + p1)};
}

inline AtomicPlatformSpec perturbed(const AtomicPlatformSpec& spec, double rabi, double detuning) {
  AtomicPlatformSpec s = spec;
  s.rabi = rabi;
  s.detuning = detuning;
  return s;
}

inline double sample_std(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace detail

/// One tomography session.
///
/// A session offset is drawn once: rabi and detuning are scaled by
/// (1 + relative_drift * N(0,1)) independently. Then for every component
/// (x, y, z) and every repetition, fresh Gaussian jitters are added, the
/// pulse sequence and the readout pulse are evolved with those values, and
/// the component is read from the populations as (P0 - P1)/(P0 + P1).
/// The reconstruction is the per-component mean, projected into the Bloch
/// ball; the uncertainty is the per-component sample standard deviation.
inline TomographyRecord simulate_atomic_tomography(const PulseSequence& seq, const AtomicPlatformSpec& spec,
                                                   const AtomicNoiseModel& noise, const AtomicAnalysis& analysis,
                                                   std::uint64_t seed) {
  spec.validate();
  noise.validate();
  Rng rng = make_rng(derive_seed(seed, "atomic-tomography"));
  const double rabi_s = spec.rabi * (1.0 + noise.relative_drift * normal(rng, 0.0, 1.0));
  const double det_s = spec.detuning * (1.0 + noise.relative_drift * normal(rng, 0.0, 1.0));

  TomographyRecord rec;
  rec.platform = Platform::Atomic;
  const auto reps = static_cast<std::size_t>(noise.repetitions);
  rec.populations.assign(reps, {});
  rec.components.assign(reps, {});
  for (int c = 0; c < 3; ++c) {
    for (std::size_t r = 0; r < reps; ++r) {
      const double rabi = normal(rng, rabi_s, noise.rabi_jitter);
      const double det = normal(rng, det_s, noise.detuning_jitter);
      const auto [pop, comp] = detail::atomic_readout(seq, detail::perturbed(spec, rabi, det), analysis, c);
      rec.populations[r][static_cast<std::size_t>(c)] = pop;
      rec.components[r][static_cast<std::size_t>(c)] = comp;
    }
  }
  std::array<double, 3> mean{};
  for (std::size_t c = 0; c < 3; ++c) {
    std::vector<double> col;
    for (const auto& row : rec.components) col.push_back(row[c]);
    mean[c] = std::accumulate(col.begin(), col.end(), 0.0) / static_cast<double>(col.size());
    rec.uncertainty[c] = detail::sample_std(col);
  }
  rec.raw = {mean[0], mean[1], mean[2]};
  rec.reconstructed = reconstruct_bloch(rec.raw);
  return rec;
}

inline TomographyRecord simulate_atomic_tomography(const PulseSequence& seq, const AtomicPlatformSpec& spec,
                                                   const AtomicNoiseModel& noise, std::uint64_t seed) {
  return simulate_atomic_tomography(seq, spec, noise, compile_atomic_analysis(spec), seed);
}

/// Monte-Carlo propagation of the atomic noise model into the measured spin
/// components: every sample draws a fresh session offset and fresh jitters
/// and reads all three components. Returns the per-component standard
/// deviation over `samples` draws.
inline std::array<double, 3> propagate_atomic_uncertainty(const PulseSequence& seq, const AtomicPlatformSpec& spec,
                                                          const AtomicNoiseModel& noise,
                                                          const AtomicAnalysis& analysis, int samples,
                                                          std::uint64_t seed) {
  spec.validate();
  noise.validate();
  if (samples < 2) throw std::invalid_argument("propagate_atomic_uncertainty: need >= 2 samples");
  Rng rng = make_rng(derive_seed(seed, "atomic-propagation"));
  std::array<std::vector<double>, 3> cols;
  for (int s = 0; s < samples; ++s) {
    const double rabi_s = spec.rabi * (1.0 + noise.relative_drift * normal(rng, 0.0, 1.0));
    const double det_s = spec.detuning * (1.0 + noise.relative_drift * normal(rng, 0.0, 1.0));
    const double rabi = normal(rng, rabi_s, noise.rabi_jitter);
    const double det = normal(rng, det_s, noise.detuning_jitter);
    const auto p = detail::perturbed(spec, rabi, det);
    for (int c = 0; c < 3; ++c) cols[static_cast<std::size_t>(c)].push_back(detail::atomic_readout(seq, p, analysis, c).second);
  }
  return {detail::sample_std(cols[0]), detail::sample_std(cols[1]), detail::sample_std(cols[2])};
}

// ---------------------------------------------------------------------------
// Photonic tomography

inline constexpr double kDegree = pi / 180.0;

struct PhotonicNoiseModel {
  double encoding_plate_error = 1.0 * kDegree;  // uniform half-width, rad
  double tomo_plate_error = 0.25 * kDegree;     // uniform half-width, rad
  double retardance_error = 2.0 * kDegree;      // uniform half-width, rad
  double total_counts = 20000.0;

  static PhotonicNoiseModel plates_off(double counts = 20000.0) { return {0.0, 0.0, 0.0, counts}; }

  void validate() const {
    if (!(encoding_plate_error >= 0.0) || !(tomo_plate_error >= 0.0) || !(retardance_error >= 0.0))
      throw std::invalid_argument("photonic noise bounds must be >= 0");
    if (!(total_counts > 0.0)) throw std::invalid_argument("total_counts must be > 0");
  }
};

/// Analyzer in front of the polarizer: the photon crosses a quarter-wave
/// plate, then a half-wave plate, then a polarizer transmitting H.
struct AnalyzerSetting {
  double qwp = 0.0;
  double hwp = 0.0;
};

/// Nominal settings projecting onto H, V, D, A, R, L (in that order).
inline constexpr std::array<AnalyzerSetting, 6> kAnalyzerSettings{{
    {0.0, 0.0},
    {0.0, pi / 4.0},
    {pi / 4.0, pi / 8.0},
    {pi / 4.0, -pi / 8.0},
    {0.0, -pi / 8.0},
    {0.0, pi / 8.0},
}};

inline double analyzer_probability(const PureQubitState& s, const AnalyzerSetting& a) {
  const PureQubitState out =
      waveplate_jones(Retarder::Half, a.hwp) * (waveplate_jones(Retarder::Quarter, a.qwp) * s);
  return std::norm(out.amp0);
}

enum class CountMode {
  Poisson,   // integer counts drawn around the expectation
  Expected,  // the expectation itself (infinite-statistics limit)
};

namespace detail {

inline double pair_contrast(double plus, double minus) {
  const double sum = plus + minus;
  return sum > 0.0 ? (plus - minus) / sum : 0.0;
}

/// Standard deviation of (a - b)/(a + b) for independent Poisson counts.
inline double pair_contrast_sd(double plus, double minus) {
  const double sum = plus + minus;
  return sum > 0.0 ? std::sqrt(4.0 * plus * minus / (sum * sum * sum)) : 0.0;
}

inline BlochVector invert_counts(const std::array<double, 6>& n) {
  return {pair_contrast(n[kD], n[kA]), pair_contrast(n[kR], n[kL]), pair_contrast(n[kH], n[kV])};
}

}  // namespace detail

/// Linear inversion of six projector counts: sx from D/A, sy from R/L,
/// sz from H/V, then projection into the ball.
inline BlochVector invert_photonic_counts(const std::array<double, 6>& counts) {
  return reconstruct_bloch(detail::invert_counts(counts));
}

/// Tomography of the state made by the encoding plates `setting` acting on
/// |H>.
///
/// Encoding plate angles get uniform errors within +-encoding_plate_error,
/// their retardances within +-retardance_error. Each projector setting is
/// made separately, with its own uniform angle errors within
/// +-tomo_plate_error on both analyzer plates. Each basis receives
/// total_counts/3 expected events, split by the Born probabilities, so the
/// six projectors share the counts equally on average.
inline TomographyRecord simulate_photonic_tomography(const WaveplateSetting& setting,
                                                     const PhotonicNoiseModel& noise, std::uint64_t seed,
                                                     CountMode mode = CountMode::Poisson) {
  noise.validate();
  Rng rng = make_rng(derive_seed(seed, "photonic-tomography"));
  auto jitter = [&](double bound) { return bound > 0.0 ? uniform(rng, -bound, bound) : 0.0; };

  const double q1 = setting.q1 + jitter(noise.encoding_plate_error);
  const double h2 = setting.h2 + jitter(noise.encoding_plate_error);
  const double q3 = setting.q3 + jitter(noise.encoding_plate_error);
  const double rq1 = pi / 2.0 + jitter(noise.retardance_error);
  const double rh2 = pi + jitter(noise.retardance_error);
  const double rq3 = pi / 2.0 + jitter(noise.retardance_error);
  const Unitary2 encoder = retarder_jones(rq3, q3) * retarder_jones(rh2, h2) * retarder_jones(rq1, q1);
  const PureQubitState prepared = encoder * ket0();

  TomographyRecord rec;
  rec.platform = Platform::Photonic;
  const double per_basis = noise.total_counts / 3.0;
  for (std::size_t k = 0; k < 6; ++k) {
    AnalyzerSetting a = kAnalyzerSettings[k];
    a.qwp += jitter(noise.tomo_plate_error);
    a.hwp += jitter(noise.tomo_plate_error);
    const double expected = per_basis * analyzer_probability(prepared, a);
    rec.counts[k] = mode == CountMode::Poisson ? static_cast<double>(poisson(rng, expected)) : expected;
  }
  rec.raw = detail::invert_counts(rec.counts);
  rec.reconstructed = reconstruct_bloch(rec.raw);
  rec.uncertainty = {detail::pair_contrast_sd(rec.counts[kD], rec.counts[kA]),
                     detail::pair_contrast_sd(rec.counts[kR], rec.counts[kL]),
                     detail::pair_contrast_sd(rec.counts[kH], rec.counts[kV])};
  return rec;
}

/// Compiles `target` (closed form, numeric fallback) and simulates it.
inline TomographyRecord simulate_photonic_tomography(const AxisAngle& target, const PhotonicNoiseModel& noise,
                                                     std::uint64_t seed, CountMode mode = CountMode::Poisson) {
  return simulate_photonic_tomography(compile_waveplates(target).setting, noise, seed, mode);
}

struct FidelityEstimate {
  double mean = 0.0;
  double std = 0.0;
};

/// Bootstrap of the reconstruction fidelity: every replica redraws each
/// projector count from Poisson(observed count), inverts linearly, and takes
/// the fidelity (1 + r.n)/2 with `target`. Replicas skip the projection into
/// the ball: clipping at |r| = 1 turns the spread of near-pure states from
/// O(1/sqrt(N)) into a mix with O(1/N) and understates it. Replica r uses
/// derive_seed(seed, {"bootstrap", r}).
inline FidelityEstimate mc_fidelity_uncertainty(const TomographyRecord& record, const PureQubitState& target,
                                                int replicas = 300, std::uint64_t seed = 0) {
  if (record.platform != Platform::Photonic) {
    throw std::invalid_argument("mc_fidelity_uncertainty: needs a photonic record with counts");
  }
  if (replicas < 2) throw std::invalid_argument("mc_fidelity_uncertainty: need >= 2 replicas");
  if (std::all_of(record.counts.begin(), record.counts.end(), [](double c) { return c <= 0.0; })) {
    throw std::invalid_argument("mc_fidelity_uncertainty: all counts are zero");
  }
  std::vector<double> fids;
  fids.reserve(static_cast<std::size_t>(replicas));
  for (int r = 0; r < replicas; ++r) {
    Rng rng = make_rng(derive_seed(seed, {hash_tag("bootstrap"), static_cast<std::uint64_t>(r)}));
    std::array<double, 6> n{};
    for (std::size_t k = 0; k < 6; ++k) n[k] = static_cast<double>(poisson(rng, record.counts[k]));
    fids.push_back(fidelity(detail::invert_counts(n), target));
  }
  FidelityEstimate est;
  est.mean = std::accumulate(fids.begin(), fids.end(), 0.0) / static_cast<double>(fids.size());
  est.std = detail::sample_std(fids);
  return est;
}

}  // namespace qembed
