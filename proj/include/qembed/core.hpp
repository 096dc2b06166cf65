// Single-qubit linear algebra: states, 2x2 unitaries, rotations and the
// Bloch-sphere picture.
//
// Conventions (fixed for the whole library):
//   |0> sits at the north pole (+z), Bloch vectors are ordered (x, y, z).
//   rot_a(t) = exp(-i t sigma_a / 2), so rot_z(t) turns Bloch vectors by +t
//   about +z (right-hand rule).
//   States are compared through fidelity, unitaries through
//   distance_up_to_phase; global phases carry no meaning.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qembed {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I_unit{0.0, 1.0};

inline constexpr double kStateNormTol = 1e-12;
inline constexpr double kBlochInputTol = 1e-9;
inline constexpr double kUnitaryTol = 1e-12;
inline constexpr double kAxisNormTol = 1e-6;

namespace detail {

inline void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw std::invalid_argument(std::string(what) + " must be finite");
  }
}

}  // namespace detail

/// Pure qubit state a|0> + b|1>.
struct PureQubitState {
  cplx amp0{1.0, 0.0};
  cplx amp1{0.0, 0.0};

  double norm_sq() const { return std::norm(amp0) + std::norm(amp1); }
  bool is_normalized(double tol = kStateNormTol) const {
    return std::abs(norm_sq() - 1.0) <= tol;
  }
  PureQubitState normalized() const {
    const double n = std::sqrt(norm_sq());
    if (n == 0.0) throw std::invalid_argument("cannot normalize the zero vector");
    return {amp0 / n, amp1 / n};
  }
};

inline PureQubitState ket0() { return {1.0, 0.0}; }
inline PureQubitState ket1() { return {0.0, 1.0}; }

/// The state orthogonal to `s` (unique up to phase).
inline PureQubitState orthogonal(const PureQubitState& s) {
  return {-std::conj(s.amp1), std::conj(s.amp0)};
}

inline cplx inner(const PureQubitState& a, const PureQubitState& b) {
  return std::conj(a.amp0) * b.amp0 + std::conj(a.amp1) * b.amp1;
}

/// |<a|b>|^2.
inline double fidelity(const PureQubitState& a, const PureQubitState& b) {
  return std::norm(inner(a, b));
}

/// 2x2 complex matrix stored row-major. Nothing in the type forces
/// unitarity; use is_unitary() where it matters.
class Unitary2 {
 public:
  constexpr Unitary2() : m_{cplx{1.0}, cplx{0.0}, cplx{0.0}, cplx{1.0}} {}
  constexpr Unitary2(cplx a, cplx b, cplx c, cplx d) : m_{a, b, c, d} {}

  static constexpr Unitary2 identity() { return {}; }

  cplx operator()(int r, int c) const { return m_[static_cast<std::size_t>(2 * r + c)]; }
  const std::array<cplx, 4>& entries() const { return m_; }

  Unitary2 operator*(const Unitary2& o) const {
    return {m_[0] * o.m_[0] + m_[1] * o.m_[2], m_[0] * o.m_[1] + m_[1] * o.m_[3],
            m_[2] * o.m_[0] + m_[3] * o.m_[2], m_[2] * o.m_[1] + m_[3] * o.m_[3]};
  }
  Unitary2 operator*(cplx s) const { return {m_[0] * s, m_[1] * s, m_[2] * s, m_[3] * s}; }

  PureQubitState operator*(const PureQubitState& s) const {
    return {m_[0] * s.amp0 + m_[1] * s.amp1, m_[2] * s.amp0 + m_[3] * s.amp1};
  }

  Unitary2 adjoint() const {
    return {std::conj(m_[0]), std::conj(m_[2]), std::conj(m_[1]), std::conj(m_[3])};
  }
  cplx det() const { return m_[0] * m_[3] - m_[1] * m_[2]; }
  cplx trace() const { return m_[0] + m_[3]; }

  bool is_unitary(double tol = kUnitaryTol) const {
    const Unitary2 p = adjoint() * *this;
    const Unitary2 id;
    for (std::size_t k = 0; k < 4; ++k) {
      if (std::abs(p.m_[k] - id.m_[k]) > tol) return false;
    }
    return std::abs(std::abs(det()) - 1.0) <= tol;
  }

 private:
  std::array<cplx, 4> m_;
};

inline Unitary2 pauli_x() { return {0.0, 1.0, 1.0, 0.0}; }
inline Unitary2 pauli_y() { return {0.0, -I_unit, I_unit, 0.0}; }
inline Unitary2 pauli_z() { return {1.0, 0.0, 0.0, -1.0}; }
inline Unitary2 hadamard() {
  const double r = std::numbers::sqrt2 / 2.0;
  return {r, r, r, -r};
}
inline Unitary2 phase_s() { return {1.0, 0.0, 0.0, I_unit}; }

inline Unitary2 rot_x(double angle) {
  detail::require_finite(angle, "rotation angle");
  const double c = std::cos(angle / 2.0), s = std::sin(angle / 2.0);
  return {c, -I_unit * s, -I_unit * s, c};
}

inline Unitary2 rot_y(double angle) {
  detail::require_finite(angle, "rotation angle");
  const double c = std::cos(angle / 2.0), s = std::sin(angle / 2.0);
  return {c, -s, s, c};
}

inline Unitary2 rot_z(double angle) {
  detail::require_finite(angle, "rotation angle");
  return {std::polar(1.0, -angle / 2.0), 0.0, 0.0, std::polar(1.0, angle / 2.0)};
}

/// S H |0> = (|0> + i|1>)/sqrt(2), the input-independent starting state of
/// the feature map.
inline PureQubitState init_state() {
  const double r = std::numbers::sqrt2 / 2.0;
  return {r, cplx{0.0, r}};
}

struct BlochVector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  double dot(const BlochVector& o) const { return x * o.x + y * o.y + z * o.z; }
  double operator[](int k) const { return k == 0 ? x : (k == 1 ? y : z); }
};

inline BlochVector state_to_bloch(const PureQubitState& s) {
  if (!s.is_normalized(kBlochInputTol)) {
    throw std::invalid_argument("state_to_bloch: state is not normalized");
  }
  const cplx c = std::conj(s.amp0) * s.amp1;
  return {2.0 * c.real(), 2.0 * c.imag(), std::norm(s.amp0) - std::norm(s.amp1)};
}

/// Pure state pointing along `b` (normalized first). The phase is chosen so
/// that amp0 is real and non-negative.
inline PureQubitState bloch_to_state(const BlochVector& b) {
  const double n = b.norm();
  if (n == 0.0) throw std::invalid_argument("bloch_to_state: zero vector");
  const double z = std::clamp(b.z / n, -1.0, 1.0);
  const double theta = std::acos(z);
  const double phi = std::atan2(b.y, b.x);
  return {std::cos(theta / 2.0), std::polar(std::sin(theta / 2.0), phi)};
}

/// Fidelity between a (possibly mixed) Bloch-ball point and a pure target:
/// (1 + r . t) / 2.
inline double fidelity(const BlochVector& r, const PureQubitState& target) {
  return 0.5 * (1.0 + r.dot(state_to_bloch(target)));
}

struct AxisAngle {
  double angle = 0.0;
  std::array<double, 3> axis{0.0, 0.0, 1.0};
};

struct NormalizedAxis {
  std::array<double, 3> axis{0.0, 0.0, 1.0};
  double correction = 0.0;  // | |n| - 1 | before renormalization
};

inline NormalizedAxis normalize_axis(const std::array<double, 3>& n) {
  const double len = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
  if (len == 0.0) return {{0.0, 0.0, 1.0}, 1.0};
  return {{n[0] / len, n[1] / len, n[2] / len}, std::abs(len - 1.0)};
}

/// cos(phi/2) I - i sin(phi/2) (n . sigma). The axis is renormalized
/// silently; callers that care about the size of that correction should ask
/// normalize_axis() for it.
inline Unitary2 axis_rotation(const AxisAngle& aa) {
  detail::require_finite(aa.angle, "rotation angle");
  for (double c : aa.axis) detail::require_finite(c, "axis component");
  const double len = std::hypot(aa.axis[0], aa.axis[1], aa.axis[2]);
  if (len == 0.0) {
    if (aa.angle != 0.0) throw std::invalid_argument("axis_rotation: zero axis with nonzero angle");
    return Unitary2::identity();
  }
  const auto n = normalize_axis(aa.axis).axis;
  const double c = std::cos(aa.angle / 2.0), s = std::sin(aa.angle / 2.0);
  return {cplx{c, -s * n[2]}, cplx{-s * n[1], -s * n[0]}, cplx{s * n[1], -s * n[0]},
          cplx{c, s * n[2]}};
}

struct AxisAngleDecomposition {
  AxisAngle rotation;
  double global_phase = 0.0;
};

/// Inverse of axis_rotation: U = e^{i phase} axis_rotation(rotation).
///
/// The phase is taken as arg(det U)/2 in (-pi/2, pi/2], which leaves the
/// angle in [0, 2pi]. The endpoint 2pi (U proportional to -I) is folded to
/// angle 0 with an extra phase of pi, so the returned angle is in [0, 2pi).
/// Rotations by (numerically) zero angle report the axis (0, 0, 1).
inline AxisAngleDecomposition unitary_to_axis_angle(const Unitary2& u) {
  double phase = std::arg(u.det()) / 2.0;
  const Unitary2 v = u * std::polar(1.0, -phase);
  // v = [[c - i nz s, -i nx s - ny s], [i nx s ... ]]
  const double c = 0.5 * (v(0, 0).real() + v(1, 1).real());
  const double nzs = -0.5 * (v(0, 0).imag() - v(1, 1).imag());
  const double nxs = -0.5 * (v(0, 1).imag() + v(1, 0).imag());
  const double nys = 0.5 * (v(1, 0).real() - v(0, 1).real());
  const double s = std::sqrt(nxs * nxs + nys * nys + nzs * nzs);

  AxisAngleDecomposition out;
  if (s < 1e-15) {
    if (c < 0.0) phase += pi;
    out.rotation = {0.0, {0.0, 0.0, 1.0}};
  } else {
    out.rotation = {2.0 * std::atan2(s, c), {nxs / s, nys / s, nzs / s}};
  }
  // Keep the phase in (-pi, pi].
  if (phase > pi) phase -= 2.0 * pi;
  out.global_phase = phase;
  return out;
}

/// min over alpha of max_k |U_k - e^{i alpha} V_k|, solved exactly.
///
/// Each entry term |u - e^{ia} v| is minimized at a = arg(u/v), and the max
/// of the four terms is minimized either at one of those points or where two
/// terms cross; all candidates are enumerated.
inline double distance_up_to_phase(const Unitary2& u, const Unitary2& v) {
  const auto& ue = u.entries();
  const auto& ve = v.entries();
  auto cost = [&](double a) {
    const cplx ph = std::polar(1.0, a);
    double m = 0.0;
    for (std::size_t k = 0; k < 4; ++k) m = std::max(m, std::abs(ue[k] - ph * ve[k]));
    return m;
  };

  std::array<double, 32> cand{};
  std::size_t nc = 0;
  cand[nc++] = std::arg((v.adjoint() * u).trace());
  for (std::size_t k = 0; k < 4; ++k) {
    if (std::abs(ve[k]) > 0.0 && std::abs(ue[k]) > 0.0) cand[nc++] = std::arg(ue[k] / ve[k]);
  }
  // |u_k - e^{ia} v_k|^2 = |u_k|^2 + |v_k|^2 - 2 Re(conj(u_k) v_k e^{ia}).
  // Equality of terms k and l: A + Re(B e^{ia}) = 0.
  for (std::size_t k = 0; k < 4; ++k) {
    for (std::size_t l = k + 1; l < 4; ++l) {
      const double a = std::norm(ue[k]) + std::norm(ve[k]) - std::norm(ue[l]) - std::norm(ve[l]);
      const cplx b = -2.0 * (std::conj(ue[k]) * ve[k] - std::conj(ue[l]) * ve[l]);
      const double r = std::abs(b);
      if (r == 0.0 || std::abs(a) > r) continue;
      // Re(B e^{ia}) = r cos(a + arg B) = -A
      const double base = std::acos(std::clamp(-a / r, -1.0, 1.0));
      cand[nc++] = base - std::arg(b);
      cand[nc++] = -base - std::arg(b);
    }
  }
  double best = cost(cand[0]);
  for (std::size_t i = 1; i < nc; ++i) best = std::min(best, cost(cand[i]));
  return best;
}

}  // namespace qembed
