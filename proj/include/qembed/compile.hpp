// Hardware compilation of embedded states and unitaries.
//
// Atomic platform: rectangular microwave pulses on a two-level atom. With
// the drive on, the Bloch vector precesses at the generalized Rabi frequency
// sqrt(rabi^2 + detuning^2) about (rabi, 0, -detuning)/|.|; with the drive
// off it precesses at |detuning| about (0, 0, -sign(detuning)). A sequence is
// on(tau1), off(T), on(tau2), applied to |0>.
//
// Photonic platform: polarization qubit with |H> = |0>, |V> = |1>. A
// retarder with fast axis at angle t and retardance r has the Jones matrix
// R(t) diag(1, e^{i r}) R(-t); the encoding stack is quarter (Q1), half (H2),
// quarter (Q3) with Q1 traversed first.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "qembed/core.hpp"
#include "qembed/detail/nelder_mead.hpp"
#include "qembed/random.hpp"

namespace qembed {

// ---------------------------------------------------------------------------
// Atomic platform

struct AtomicPlatformSpec {
  double rabi = 2.0 * pi * 38e3;        // rad/s
  double detuning = 2.0 * pi * 6.57e3;  // rad/s
  double max_duration = 100e-6;         // s, per segment
  double time_resolution = 1e-6;        // s; 0 disables quantization

  double generalized_rabi() const { return std::hypot(rabi, detuning); }

  void validate() const {
    if (!(rabi > 0.0) || !std::isfinite(rabi)) throw std::invalid_argument("rabi must be > 0");
    if (detuning == 0.0 || !std::isfinite(detuning)) throw std::invalid_argument("detuning must be nonzero");
    if (!(max_duration > 0.0)) throw std::invalid_argument("max_duration must be > 0");
    if (!(time_resolution >= 0.0)) throw std::invalid_argument("time_resolution must be >= 0");
  }
};

enum class Microwave { Off, On };

struct PulseSequence {
  double tau1 = 0.0;  // s, drive on
  double off = 0.0;   // s, drive off (T)
  double tau2 = 0.0;  // s, drive on
  double infidelity = 0.0;

  double on_time() const { return tau1 + tau2; }
  double total_time() const { return tau1 + off + tau2; }
};

/// Evolution operator of one rectangular segment.
inline Unitary2 atomic_segment(Microwave mw, double duration, const AtomicPlatformSpec& spec) {
  detail::require_finite(duration, "segment duration");
  if (duration < 0.0) throw std::invalid_argument("segment duration must be >= 0");
  const double omega = mw == Microwave::On ? spec.rabi : 0.0;
  const double g = std::hypot(omega, spec.detuning);
  if (g == 0.0 || duration == 0.0) return Unitary2::identity();
  return axis_rotation({g * duration, {omega / g, 0.0, -spec.detuning / g}});
}

inline Unitary2 atomic_unitary(const PulseSequence& seq, const AtomicPlatformSpec& spec) {
  return atomic_segment(Microwave::On, seq.tau2, spec) * atomic_segment(Microwave::Off, seq.off, spec) *
         atomic_segment(Microwave::On, seq.tau1, spec);
}

inline PureQubitState atomic_evolution(const PulseSequence& seq, const AtomicPlatformSpec& spec,
                                       const PureQubitState& initial = ket0()) {
  return atomic_unitary(seq, spec) * initial;
}

struct AtomicCompileOptions {
  int starts = 16;
  double tolerance = 1e-6;  // infidelity counted as success
  std::uint64_t seed = 0x5EED;
};

struct AtomicCompilation {
  PulseSequence sequence;   // continuous solution
  PulseSequence quantized;  // rounded to the time resolution, re-verified
  bool converged = false;   // sequence.infidelity <= tolerance
};

/// Durations (tau1, T, tau2) in [0, max_duration] with on(tau2) off(T)
/// on(tau1) |from> = |to> up to phase.
///
/// The infidelity is evaluated as |<to_perp| U |from>|^2, which carries no
/// cancellation error, so converged solutions are accurate to ~1e-25.
/// Multistart simplex search; the zero sequence is tried first, then
/// `starts` seeded uniform starts. Among the starts that reach the
/// tolerance, the one with the least drive-on time wins (then the shortest
/// total, then the lowest start index). If none reaches it the lowest
/// infidelity is returned with converged = false.
inline AtomicCompilation compile_atomic_transfer(const PureQubitState& from, const PureQubitState& to,
                                                 const AtomicPlatformSpec& spec,
                                                 const AtomicCompileOptions& opts = {}) {
  spec.validate();
  if (!from.is_normalized(kBlochInputTol) || !to.is_normalized(kBlochInputTol)) {
    throw std::invalid_argument("compile_atomic: states must be normalized");
  }
  const PureQubitState src = from.normalized();
  const PureQubitState perp = orthogonal(to.normalized());
  // Work in microseconds: keeps the simplex well scaled.
  const double max_us = spec.max_duration * 1e6;
  auto to_seq = [&](const std::array<double, 3>& p) {
    return PulseSequence{std::clamp(p[0], 0.0, max_us) * 1e-6, std::clamp(p[1], 0.0, max_us) * 1e-6,
                         std::clamp(p[2], 0.0, max_us) * 1e-6, 0.0};
  };
  auto infidelity = [&](const PulseSequence& s) {
    return std::norm(inner(perp, atomic_unitary(s, spec) * src));
  };

  struct Candidate {
    PulseSequence seq;
    bool ok = false;
  };
  auto better = [&](const Candidate& a, const Candidate& b) {
    if (a.ok != b.ok) return a.ok;
    if (!a.ok) return a.seq.infidelity < b.seq.infidelity;
    if (a.seq.on_time() != b.seq.on_time()) return a.seq.on_time() < b.seq.on_time();
    return a.seq.total_time() < b.seq.total_time();
  };

  Candidate best;
  best.seq = PulseSequence{};
  best.seq.infidelity = infidelity(best.seq);
  best.ok = best.seq.infidelity <= opts.tolerance;

  if (!best.ok || best.seq.infidelity > 0.0) {
    detail::SimplexOptions sopt;
    sopt.initial_step = max_us / 10.0;
    sopt.xtol = 1e-11;
    sopt.max_evaluations = 3000;
    for (int k = 0; k < opts.starts; ++k) {
      Rng rng = make_rng(derive_seed(opts.seed, {hash_tag("atomic-start"), static_cast<std::uint64_t>(k)}));
      const std::array<double, 3> x0{uniform(rng, 0.0, max_us), uniform(rng, 0.0, max_us),
                                     uniform(rng, 0.0, max_us)};
      const auto res = detail::nelder_mead<3>([&](const std::array<double, 3>& p) { return infidelity(to_seq(p)); },
                                              x0, sopt);
      Candidate c;
      c.seq = to_seq(res.x);
      c.seq.infidelity = infidelity(c.seq);
      c.ok = c.seq.infidelity <= opts.tolerance;
      if (better(c, best)) best = c;
    }
  }

  AtomicCompilation out;
  out.sequence = best.seq;
  out.converged = best.ok;
  out.quantized = best.seq;
  if (spec.time_resolution > 0.0) {
    auto q = [&](double t) {
      return std::clamp(std::round(t / spec.time_resolution) * spec.time_resolution, 0.0, spec.max_duration);
    };
    out.quantized = {q(best.seq.tau1), q(best.seq.off), q(best.seq.tau2), 0.0};
  }
  out.quantized.infidelity = infidelity(out.quantized);
  return out;
}

/// Pulse sequence preparing `target` from |0>.
inline AtomicCompilation compile_atomic(const PureQubitState& target, const AtomicPlatformSpec& spec,
                                        const AtomicCompileOptions& opts = {}) {
  return compile_atomic_transfer(ket0(), target, spec, opts);
}

// ---------------------------------------------------------------------------
// Photonic platform

enum class Retarder { Quarter, Half };

inline double nominal_retardance(Retarder kind) { return kind == Retarder::Quarter ? pi / 2.0 : pi; }

/// R(angle) diag(1, e^{i retardance}) R(-angle).
inline Unitary2 retarder_jones(double retardance, double angle) {
  detail::require_finite(angle, "plate angle");
  detail::require_finite(retardance, "retardance");
  const double c = std::cos(angle), s = std::sin(angle);
  const cplx e = std::polar(1.0, retardance);
  return {c * c + s * s * e, c * s * (1.0 - e), c * s * (1.0 - e), s * s + c * c * e};
}

inline Unitary2 waveplate_jones(Retarder kind, double angle) {
  return retarder_jones(nominal_retardance(kind), angle);
}

/// Fast-axis angles of the encoding stack. Angles have period pi and are
/// reported in (-pi/2, pi/2].
struct WaveplateSetting {
  double q1 = 0.0;
  double h2 = 0.0;
  double q3 = 0.0;
  double residual = 0.0;  // distance_up_to_phase to the requested unitary
};

inline double wrap_plate_angle(double a) {
  double r = std::remainder(a, pi);
  if (r <= -pi / 2.0) r += pi;
  return r;
}

inline Unitary2 qhq_unitary(double q1, double h2, double q3) {
  return waveplate_jones(Retarder::Quarter, q3) * waveplate_jones(Retarder::Half, h2) *
         waveplate_jones(Retarder::Quarter, q1);
}

inline Unitary2 qhq_unitary(const WaveplateSetting& w) { return qhq_unitary(w.q1, w.h2, w.q3); }

/// Closed-form plate angles for the rotation (phi, n):
///   q1 = q3 = ( -atan(nz/nx) - atan(ny tan(phi/2)) ) / 2
///   h2      = ( -asin(nx sqrt(nz^2/nx^2 + 1) sin(phi/2)) - atan(nz/nx) ) / 2
/// evaluated exactly as written on the given axis components. The formulas
/// are exact for axes along x; in general the stack only has two effective
/// degrees of freedom, and `residual` reports how far the result is from
/// axis_rotation(aa). Throws std::domain_error when nx == 0.
inline WaveplateSetting compile_waveplates_closed_form(const AxisAngle& aa) {
  const double phi = aa.angle;
  const auto& n = aa.axis;
  detail::require_finite(phi, "rotation angle");
  if (n[0] == 0.0) {
    throw std::domain_error("closed-form waveplate angles divide by n_x; use compile_waveplates_numeric");
  }
  const double t = std::atan(n[2] / n[0]);
  const double q = 0.5 * (-t - std::atan(n[1] * std::tan(phi / 2.0)));
  const double arg = n[0] * std::sqrt(n[2] * n[2] / (n[0] * n[0]) + 1.0) * std::sin(phi / 2.0);
  if (std::abs(arg) > 1.0 + 1e-12) {
    throw std::domain_error("closed-form waveplate angles: asin argument outside [-1, 1]");
  }
  const double h = 0.5 * (-std::asin(std::clamp(arg, -1.0, 1.0)) - t);
  WaveplateSetting w{q, h, q, 0.0};
  w.residual = distance_up_to_phase(qhq_unitary(w), axis_rotation(aa));
  return w;
}

struct WaveplateCompileOptions {
  int starts = 16;
  std::uint64_t seed = 0xB1A7E;
};

/// Q-H-Q angles minimizing the distance to `target` up to global phase.
///
/// The search minimizes ||W - e^{ia} U||_F^2 with the optimal phase a,
/// summed entrywise to avoid cancellation; the reported residual is
/// distance_up_to_phase. Best residual over seeded multistarts, lowest start
/// index on ties. Residuals above 1e-6 mean the target is not reachable by
/// the stack under this Jones convention.
inline WaveplateSetting compile_waveplates_numeric(const Unitary2& target,
                                                   const WaveplateCompileOptions& opts = {}) {
  if (!target.is_unitary(1e-9)) throw std::invalid_argument("compile_waveplates_numeric: target is not unitary");
  auto objective = [&](const std::array<double, 3>& p) {
    const Unitary2 w = qhq_unitary(p[0], p[1], p[2]);
    const cplx tr = (target.adjoint() * w).trace();
    const cplx ph = std::abs(tr) > 0.0 ? tr / std::abs(tr) : cplx{1.0};
    double s = 0.0;
    for (std::size_t k = 0; k < 4; ++k) s += std::norm(w.entries()[k] - ph * target.entries()[k]);
    return s;
  };
  detail::SimplexOptions sopt;
  sopt.initial_step = 0.3;
  sopt.xtol = 1e-13;
  sopt.max_evaluations = 3000;

  WaveplateSetting best;
  best.residual = std::numeric_limits<double>::infinity();
  for (int k = 0; k < opts.starts; ++k) {
    Rng rng = make_rng(derive_seed(opts.seed, {hash_tag("plate-start"), static_cast<std::uint64_t>(k)}));
    const std::array<double, 3> x0{uniform(rng, -pi / 2, pi / 2), uniform(rng, -pi / 2, pi / 2),
                                   uniform(rng, -pi / 2, pi / 2)};
    const auto res = detail::nelder_mead<3>(objective, x0, sopt);
    WaveplateSetting w{wrap_plate_angle(res.x[0]), wrap_plate_angle(res.x[1]), wrap_plate_angle(res.x[2]), 0.0};
    w.residual = distance_up_to_phase(qhq_unitary(w), target);
    if (w.residual < best.residual) best = w;
  }
  return best;
}

struct PhotonicCompilation {
  WaveplateSetting setting;
  bool closed_form = false;  // true when the closed-form angles were used
  double closed_form_residual = std::numeric_limits<double>::quiet_NaN();
  std::string note;
};

inline constexpr double kClosedFormAcceptance = 1e-6;

/// Closed-form angles when they reproduce the rotation (residual <= 1e-6),
/// otherwise the numeric synthesis. `note` says which path was taken and why.
inline PhotonicCompilation compile_waveplates(const AxisAngle& aa, const WaveplateCompileOptions& opts = {}) {
  PhotonicCompilation out;
  try {
    const WaveplateSetting w = compile_waveplates_closed_form(aa);
    out.closed_form_residual = w.residual;
    if (w.residual <= kClosedFormAcceptance) {
      out.setting = w;
      out.closed_form = true;
      out.note = "closed form";
      return out;
    }
    out.note = "closed form residual " + std::to_string(w.residual) + " too large; numeric fallback";
  } catch (const std::domain_error& e) {
    out.note = std::string(e.what()) + "; numeric fallback";
  }
  out.setting = compile_waveplates_numeric(axis_rotation(aa), opts);
  return out;
}

// ---------------------------------------------------------------------------
// Verification

using CompileTarget = std::variant<PureQubitState, Unitary2>;

/// States: 1 - fidelity. Unitaries: distance_up_to_phase.
inline double verify_compilation(const CompileTarget& target, const CompileTarget& realized) {
  if (target.index() != realized.index()) {
    throw std::invalid_argument("verify_compilation: target and realization are of different kinds");
  }
  if (const auto* s = std::get_if<PureQubitState>(&target)) {
    return std::max(0.0, 1.0 - fidelity(*s, std::get<PureQubitState>(realized)));
  }
  return distance_up_to_phase(std::get<Unitary2>(target), std::get<Unitary2>(realized));
}

}  // namespace qembed
