#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "qembed/core.hpp"
#include "qembed/random.hpp"

using namespace qembed;

namespace {

using M2 = Eigen::Matrix2cd;

M2 to_eigen(const Unitary2& u) {
  M2 m;
  m << u(0, 0), u(0, 1), u(1, 0), u(1, 1);
  return m;
}

M2 sigma(int k) {
  M2 m;
  if (k == 0) m << 0, 1, 1, 0;
  if (k == 1) m << 0, cplx(0, -1), cplx(0, 1), 0;
  if (k == 2) m << 1, 0, 0, -1;
  return m;
}

// exp(-i t n.sigma / 2) through the matrix exponential.
M2 expm_rotation(double t, const std::array<double, 3>& n) {
  M2 h = M2::Zero();
  for (int k = 0; k < 3; ++k) h += n[static_cast<std::size_t>(k)] * sigma(k);
  const M2 a = cplx(0, -t / 2.0) * h;
  return a.exp();
}

double max_abs_diff(const Unitary2& u, const M2& m) { return (to_eigen(u) - m).cwiseAbs().maxCoeff(); }

// min over a fine phase grid, refined by golden section; independent of the
// closed-form candidate enumeration.
double phase_grid_distance(const Unitary2& u, const Unitary2& v) {
  auto f = [&](double a) {
    double m = 0.0;
    for (std::size_t k = 0; k < 4; ++k) m = std::max(m, std::abs(u.entries()[k] - std::polar(1.0, a) * v.entries()[k]));
    return m;
  };
  const int grid = 20000;
  double best_a = 0.0, best = f(0.0);
  for (int i = 1; i < grid; ++i) {
    const double a = 2.0 * pi * i / grid;
    if (f(a) < best) best = f(best_a = a);
  }
  double lo = best_a - 2.0 * pi / grid, hi = best_a + 2.0 * pi / grid;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 200; ++it) {
    const double m1 = hi - g * (hi - lo), m2 = lo + g * (hi - lo);
    (f(m1) < f(m2) ? hi : lo) = (f(m1) < f(m2) ? m2 : m1);
  }
  return std::min(best, f(0.5 * (lo + hi)));
}

void expect_unitary_near(const Unitary2& u, const Unitary2& v, double tol) {
  for (std::size_t k = 0; k < 4; ++k) EXPECT_LE(std::abs(u.entries()[k] - v.entries()[k]), tol) << "entry " << k;
}

}  // namespace

TEST(Gates, RotXSpecialAngles) {
  expect_unitary_near(rot_x(0.0), Unitary2::identity(), 1e-15);
  expect_unitary_near(rot_x(pi), Unitary2{0.0, -I_unit, -I_unit, 0.0}, 1e-15);
  expect_unitary_near(rot_x(2.0 * pi), Unitary2::identity() * -1.0, 1e-15);
}

TEST(Gates, RotZSpecialAngles) {
  expect_unitary_near(rot_z(0.0), Unitary2::identity(), 1e-15);
  expect_unitary_near(rot_z(pi), Unitary2{-I_unit, 0.0, 0.0, I_unit}, 1e-15);
  expect_unitary_near(rot_z(pi / 2) * rot_z(pi / 2), rot_z(pi), 1e-15);
}

TEST(Gates, RotationsMatchMatrixExponential) {
  Rng rng = make_rng(11);
  for (int i = 0; i < 200; ++i) {
    const double t = uniform(rng, -10.0, 10.0);
    EXPECT_LT(max_abs_diff(rot_x(t), expm_rotation(t, {1, 0, 0})), 1e-13);
    EXPECT_LT(max_abs_diff(rot_y(t), expm_rotation(t, {0, 1, 0})), 1e-13);
    EXPECT_LT(max_abs_diff(rot_z(t), expm_rotation(t, {0, 0, 1})), 1e-13);
  }
}

TEST(Gates, NonFiniteAngleRejected) {
  EXPECT_THROW(rot_x(std::numeric_limits<double>::quiet_NaN()), std::invalid_argument);
  EXPECT_THROW(rot_z(std::numeric_limits<double>::infinity()), std::invalid_argument);
}

TEST(Gates, RandomAnglesGiveUnitaries) {
  Rng rng = make_rng(12);
  for (int i = 0; i < 10000; ++i) {
    const double t = uniform(rng, -50.0, 50.0);
    for (const Unitary2& u : {rot_x(t), rot_y(t), rot_z(t)}) {
      ASSERT_TRUE(u.is_unitary(1e-12));
      ASSERT_NEAR(std::abs(u.det()), 1.0, 1e-12);
    }
  }
}

TEST(Gates, CompositionAddsAngles) {
  Rng rng = make_rng(13);
  for (int i = 0; i < 1000; ++i) {
    const double a = uniform(rng, -7.0, 7.0), b = uniform(rng, -7.0, 7.0);
    expect_unitary_near(rot_x(a) * rot_x(b), rot_x(a + b), 1e-12);
    expect_unitary_near(rot_z(a) * rot_z(b), rot_z(a + b), 1e-12);
  }
}

TEST(Gates, RotZTurnsBlochVectorCounterclockwise) {
  const double r = std::numbers::sqrt2 / 2.0;
  const BlochVector b = state_to_bloch(rot_z(pi / 2) * PureQubitState{r, r});
  EXPECT_NEAR(b.x, 0.0, 1e-15);
  EXPECT_NEAR(b.y, 1.0, 1e-15);
}

TEST(AxisRotation, Examples) {
  expect_unitary_near(axis_rotation({pi, {0, 0, 1}}), pauli_z() * -I_unit, 1e-15);
  for (double phi : {0.1, 1.0, 2.5, -3.0}) expect_unitary_near(axis_rotation({phi, {1, 0, 0}}), rot_x(phi), 1e-15);
  const Unitary2 u = axis_rotation({0.668, {0.667, 0.143, 0.731}});
  EXPECT_NEAR((u.trace() / 2.0).real(), 0.9447386065426066, 1e-15);
  EXPECT_NEAR((u.trace() / 2.0).imag(), 0.0, 1e-15);
}

TEST(AxisRotation, MatchesMatrixExponential) {
  Rng rng = make_rng(14);
  for (int i = 0; i < 200; ++i) {
    const BlochVector n = state_to_bloch(random_state(rng));
    const double t = uniform(rng, -7.0, 7.0);
    EXPECT_LT(max_abs_diff(axis_rotation({t, {n.x, n.y, n.z}}), expm_rotation(t, {n.x, n.y, n.z})), 1e-13);
  }
}

TEST(AxisRotation, NearUnitAxisRenormalized) {
  const AxisAngle aa{1.3, {0.667, 0.143, 0.731}};
  const auto corr = normalize_axis(aa.axis);
  EXPECT_GT(corr.correction, 0.0);
  EXPECT_LT(corr.correction, 1e-3);
  EXPECT_TRUE(axis_rotation(aa).is_unitary(1e-14));
  expect_unitary_near(axis_rotation(aa), axis_rotation({1.3, corr.axis}), 1e-15);
}

TEST(AxisRotation, ZeroAxis) {
  EXPECT_THROW(axis_rotation({0.5, {0, 0, 0}}), std::invalid_argument);
  expect_unitary_near(axis_rotation({0.0, {0, 0, 0}}), Unitary2::identity(), 0.0);
}

TEST(States, InitState) {
  const PureQubitState s = init_state();
  EXPECT_NEAR(s.amp0.real(), std::numbers::sqrt2 / 2.0, 1e-15);
  EXPECT_NEAR(s.amp0.imag(), 0.0, 1e-15);
  EXPECT_NEAR(s.amp1.real(), 0.0, 1e-15);
  EXPECT_NEAR(s.amp1.imag(), std::numbers::sqrt2 / 2.0, 1e-15);
  // <sigma_k> = psi^dagger sigma_k psi by direct matrix algebra.
  Eigen::Vector2cd v(s.amp0, s.amp1);
  const BlochVector b = state_to_bloch(s);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(b[k], (v.adjoint() * sigma(k) * v)(0).real(), 1e-15);
  EXPECT_NEAR(b.y, 1.0, 1e-15);
  EXPECT_NEAR(fidelity(s, s), 1.0, 1e-15);
}

TEST(States, BlochExamples) {
  const BlochVector z = state_to_bloch(ket0());
  EXPECT_EQ(z.x, 0.0);
  EXPECT_EQ(z.y, 0.0);
  EXPECT_EQ(z.z, 1.0);
  const double r = std::numbers::sqrt2 / 2.0;
  const BlochVector x = state_to_bloch({r, r});
  EXPECT_NEAR(x.x, 1.0, 1e-15);
  EXPECT_NEAR(x.z, 0.0, 1e-15);
  EXPECT_THROW(state_to_bloch({1.0, 0.1}), std::invalid_argument);
}

TEST(States, FidelityExamples) {
  const double r = std::numbers::sqrt2 / 2.0;
  EXPECT_DOUBLE_EQ(fidelity(ket0(), ket0()), 1.0);
  EXPECT_DOUBLE_EQ(fidelity(ket0(), ket1()), 0.0);
  EXPECT_NEAR(fidelity(ket0(), {r, r}), 0.5, 1e-15);
}

TEST(States, BlochIdentities) {
  Rng rng = make_rng(15);
  for (int i = 0; i < 2000; ++i) {
    const PureQubitState a = random_state(rng), b = random_state(rng);
    const BlochVector ba = state_to_bloch(a), bb = state_to_bloch(b);
    EXPECT_NEAR(ba.norm(), 1.0, 1e-9);
    EXPECT_NEAR(fidelity(a, b), 0.5 * (1.0 + ba.dot(bb)), 1e-9);
    EXPECT_NEAR(fidelity(a, b), fidelity(b, a), 1e-15);
    EXPECT_NEAR(fidelity(bloch_to_state(ba), a), 1.0, 1e-12);
  }
}

TEST(Decomposition, RotXRoundTrip) {
  const auto d = unitary_to_axis_angle(rot_x(1.2));
  EXPECT_NEAR(d.rotation.angle, 1.2, 1e-14);
  EXPECT_NEAR(d.rotation.axis[0], 1.0, 1e-14);
  EXPECT_NEAR(d.rotation.axis[1], 0.0, 1e-14);
  EXPECT_NEAR(d.rotation.axis[2], 0.0, 1e-14);
  EXPECT_NEAR(d.global_phase, 0.0, 1e-14);
}

TEST(Decomposition, CentreOfSU2) {
  const auto minus = unitary_to_axis_angle(Unitary2::identity() * -1.0);
  EXPECT_EQ(minus.rotation.angle, 0.0);
  EXPECT_NEAR(std::abs(minus.global_phase), pi, 1e-15);
  EXPECT_EQ(minus.rotation.axis, (std::array<double, 3>{0, 0, 1}));
  const auto plus = unitary_to_axis_angle(Unitary2::identity());
  EXPECT_EQ(plus.rotation.angle, 0.0);
  EXPECT_EQ(plus.global_phase, 0.0);
}

TEST(Decomposition, RandomRoundTrip) {
  Rng rng = make_rng(16);
  for (int i = 0; i < 10000; ++i) {
    const Unitary2 u = random_unitary(rng);
    const auto d = unitary_to_axis_angle(u);
    ASSERT_GE(d.rotation.angle, 0.0);
    ASSERT_LT(d.rotation.angle, 2.0 * pi);
    const Unitary2 back = axis_rotation(d.rotation) * std::polar(1.0, d.global_phase);
    ASSERT_LT(distance_up_to_phase(back, u), 1e-10);
    for (std::size_t k = 0; k < 4; ++k) ASSERT_LT(std::abs(back.entries()[k] - u.entries()[k]), 1e-10);
  }
}

TEST(Distance, Examples) {
  Rng rng = make_rng(17);
  const Unitary2 u = random_unitary(rng);
  EXPECT_LT(distance_up_to_phase(u, u), 1e-15);
  EXPECT_LT(distance_up_to_phase(u, u * std::polar(1.0, pi / 7)), 1e-15);
  const double d = distance_up_to_phase(Unitary2::identity(), pauli_x());
  EXPECT_GE(d, 1.0);
  EXPECT_NEAR(d, phase_grid_distance(Unitary2::identity(), pauli_x()), 1e-9);
}

TEST(Distance, MatchesPhaseGridOracle) {
  Rng rng = make_rng(18);
  for (int i = 0; i < 50; ++i) {
    const Unitary2 u = random_unitary(rng), v = random_unitary(rng);
    EXPECT_NEAR(distance_up_to_phase(u, v), phase_grid_distance(u, v), 1e-9);
  }
}
