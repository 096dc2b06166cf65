// Published hardware parameters for the ten validation states. States 1-5
// belong to class A, states 6-10 to class B.
#pragma once

#include <array>
#include <vector>

#include "qembed/compile.hpp"
#include "qembed/core.hpp"
#include "qembed/embedding.hpp"

namespace qembed::tables {

inline constexpr std::size_t kStates = 10;

/// Pulse durations in microseconds: tau1 (on), T (off), tau2 (on).
inline constexpr std::array<std::array<double, 3>, kStates> kAtomicMicroseconds{{
    {19, 36, 8},
    {45, 51, 7},
    {20, 37, 1},
    {20, 38, 3},
    {19, 28, 3},
    {30, 47, 38},
    {32, 20, 8},
    {4, 7, 35},
    {4, 25, 12},
    {7, 10, 6},
}};

/// Photonic one-shot rotations: phi, nx, ny, nz.
inline constexpr std::array<std::array<double, 4>, kStates> kPhotonicRows{{
    {0.668, 0.667, 0.143, 0.731},
    {1.986, -0.423, 0.460, -0.781},
    {2.111, -0.510, 0.379, -0.772},
    {2.408, 0.619, 0.240, 0.748},
    {1.301, -0.405, 0.914, 0.034},
    {4.258, 0.418, 0.908, -0.006},
    {4.367, 0.247, 0.969, 0.026},
    {3.549, -0.475, 0.847, 0.239},
    {4.379, 0.197, 0.980, 0.036},
    {3.762, -0.433, 0.877, 0.208},
}};

/// Rabi frequency and detuning the atomic table was recorded with.
inline AtomicPlatformSpec atomic_lab_spec() { return AtomicPlatformSpec{}; }

inline std::vector<PulseSequence> atomic_sequences() {
  std::vector<PulseSequence> out;
  for (const auto& r : kAtomicMicroseconds) out.push_back({r[0] * 1e-6, r[1] * 1e-6, r[2] * 1e-6, 0.0});
  return out;
}

inline std::vector<AxisAngle> photonic_rotations() {
  std::vector<AxisAngle> out;
  for (const auto& r : kPhotonicRows) out.push_back({r[0], {r[1], r[2], r[3]}});
  return out;
}

inline std::vector<Label> labels() {
  std::vector<Label> out(kStates, Label::A);
  for (std::size_t i = 5; i < kStates; ++i) out[i] = Label::B;
  return out;
}

/// States prepared by replaying the pulse table from |0>.
inline std::vector<PureQubitState> atomic_states(const AtomicPlatformSpec& spec = atomic_lab_spec()) {
  std::vector<PureQubitState> out;
  for (const auto& s : atomic_sequences()) out.push_back(atomic_evolution(s, spec));
  return out;
}

/// States prepared by applying each one-shot rotation to |H> = |0>.
inline std::vector<PureQubitState> photonic_states() {
  std::vector<PureQubitState> out;
  for (const auto& aa : photonic_rotations()) out.push_back(axis_rotation(aa) * ket0());
  return out;
}

}  // namespace qembed::tables
