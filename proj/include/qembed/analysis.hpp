// Capacity bounds from Bloch-sphere geometry and cluster-quality metrics
// for Gram matrices.
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "qembed/core.hpp"
#include "qembed/embedding.hpp"

namespace qembed {

/// Largest cap angle theta such that N caps of solid angle
/// 2 pi (1 - cos(theta/2)) fit in the sphere: theta = 2 acos(1 - 2/N).
/// N = 1 gives 2 pi (the whole sphere), N = 2 gives pi.
inline double max_sector_angle(std::int64_t n_classes) {
  if (n_classes < 1) throw std::invalid_argument("max_sector_angle: need at least one class");
  return 2.0 * std::acos(1.0 - 2.0 / static_cast<double>(n_classes));
}

/// Left-hand side of the sector packing constraint, 2 pi N (1 - cos(theta/2)),
/// to be compared with 4 pi.
inline double sector_area(std::int64_t n_classes, double theta) {
  return 2.0 * pi * static_cast<double>(n_classes) * (1.0 - std::cos(theta / 2.0));
}

/// floor(4 pi / (2 pi (1 - F))) = floor(2 / (1 - F)). A relative 1e-12
/// guard keeps exact integer bounds (F = 0.9 gives 20) from rounding down.
inline std::int64_t max_points(double f) {
  if (!std::isfinite(f) || f < 0.0) throw std::invalid_argument("max_points: fidelity must be in [0, 1)");
  if (f >= 1.0) throw std::invalid_argument("max_points: fidelity 1 allows unboundedly many points");
  const double bound = 2.0 / (1.0 - f);
  return static_cast<std::int64_t>(std::floor(bound * (1.0 + 1e-12)));
}

struct CapacityReport {
  std::optional<double> fidelity;
  std::optional<std::int64_t> max_points;
  std::optional<std::int64_t> classes;
  std::optional<double> max_sector_angle;
};

inline CapacityReport capacity_for_fidelity(double f) {
  CapacityReport r;
  r.fidelity = f;
  r.max_points = max_points(f);
  return r;
}

inline CapacityReport capacity_for_classes(std::int64_t n) {
  CapacityReport r;
  r.classes = n;
  r.max_sector_angle = max_sector_angle(n);
  return r;
}

// ---------------------------------------------------------------------------
// Cluster metrics

struct ClusterMetrics {
  double intra_mean = 0.0;
  double inter_mean = 0.0;
  double separation_gap = 0.0;
};

/// Mean of the off-diagonal same-class entries, mean of the cross-class
/// entries, and their difference.
inline ClusterMetrics cluster_metrics(const GramMatrix& g, std::span<const Label> labels) {
  if (labels.size() != g.n) throw std::invalid_argument("cluster_metrics: label count does not match Gram size");
  double intra = 0.0, inter = 0.0;
  std::size_t n_intra = 0, n_inter = 0;
  for (std::size_t i = 0; i < g.n; ++i) {
    for (std::size_t j = 0; j < g.n; ++j) {
      if (i == j) continue;
      if (labels[i] == labels[j]) {
        intra += g(i, j);
        ++n_intra;
      } else {
        inter += g(i, j);
        ++n_inter;
      }
    }
  }
  if (n_inter == 0) throw std::invalid_argument("cluster_metrics: labels contain a single class");
  if (n_intra == 0) throw std::invalid_argument("cluster_metrics: no same-class pairs");
  ClusterMetrics m;
  m.intra_mean = intra / static_cast<double>(n_intra);
  m.inter_mean = inter / static_cast<double>(n_inter);
  m.separation_gap = m.intra_mean - m.inter_mean;
  return m;
}

/// Two-way split from the sign of the leading eigenvector of the
/// double-centred Gram matrix J G J (J = I - 11^T/n). The symmetric part of
/// G is used, so shot-sampled matrices are accepted. The sign is fixed so
/// that state 0 lands in group A; zero components join group A.
inline std::vector<Label> spectral_split(const GramMatrix& g) {
  if (g.n < 2) throw std::invalid_argument("spectral_split: need at least two states");
  const auto n = static_cast<Eigen::Index>(g.n);
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      m(i, j) = 0.5 * (g(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) +
                       g(static_cast<std::size_t>(j), static_cast<std::size_t>(i)));
  const Eigen::MatrixXd centering =
      Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
  const Eigen::MatrixXd c = centering * m * centering;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
  if (es.info() != Eigen::Success) throw std::runtime_error("spectral_split: eigensolver failed");
  Eigen::VectorXd v = es.eigenvectors().col(n - 1);  // eigenvalues ascend
  if (v(0) < 0.0) v = -v;
  std::vector<Label> out(g.n);
  for (Eigen::Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = v(i) >= 0.0 ? Label::A : Label::B;
  return out;
}

/// True when the two labelings describe the same partition (either naming).
inline bool same_partition(std::span<const Label> a, std::span<const Label> b) {
  if (a.size() != b.size()) return false;
  bool same = true, flipped = true;
  for (std::size_t i = 0; i < a.size(); ++i) {
    same = same && a[i] == b[i];
    flipped = flipped && a[i] != b[i];
  }
  return same || flipped;
}

}  // namespace qembed
