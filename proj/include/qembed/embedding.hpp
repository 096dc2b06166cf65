// Trainable single-qubit feature map, labelled scalar datasets, the
// clustering cost and Gram matrices.
#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qembed/core.hpp"
#include "qembed/random.hpp"

namespace qembed {

enum class Label { A, B };

inline char label_char(Label l) { return l == Label::A ? 'A' : 'B'; }

inline Label parse_label(std::string_view s) {
  if (s == "A") return Label::A;
  if (s == "B") return Label::B;
  throw std::invalid_argument("unknown class label '" + std::string(s) + "' (expected A or B)");
}

inline Label other(Label l) { return l == Label::A ? Label::B : Label::A; }

/// Wrap an angle into (-pi, pi].
inline double wrap_angle(double a) {
  double r = std::remainder(a, 2.0 * pi);
  if (r <= -pi) r += 2.0 * pi;
  return r;
}

struct EmbeddingParams {
  double theta1 = 0.0;
  double theta2 = 0.0;
  double theta3 = 0.0;

  std::array<double, 3> as_array() const { return {theta1, theta2, theta3}; }
  static EmbeddingParams from_array(const std::array<double, 3>& t) { return {t[0], t[1], t[2]}; }

  /// Same parameters with every angle in (-pi, pi].
  EmbeddingParams canonical() const {
    return {wrap_angle(theta1), wrap_angle(theta2), wrap_angle(theta3)};
  }

  bool operator==(const EmbeddingParams&) const = default;
};

struct LabeledPoint {
  double value = 0.0;
  Label label = Label::A;
};

struct LabeledDataset {
  std::vector<LabeledPoint> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  std::size_t count(Label l) const {
    std::size_t n = 0;
    for (const auto& p : points) n += (p.label == l);
    return n;
  }
  std::vector<double> values_of(Label l) const {
    std::vector<double> out;
    for (const auto& p : points)
      if (p.label == l) out.push_back(p.value);
    return out;
  }

  /// Throws std::invalid_argument unless every value is in [-pi, pi] and
  /// both classes are present.
  void validate() const {
    for (const auto& p : points) {
      if (!std::isfinite(p.value) || p.value < -pi || p.value > pi) {
        throw std::invalid_argument("dataset value outside [-pi, pi]");
      }
    }
    if (count(Label::A) == 0 || count(Label::B) == 0) {
      throw std::invalid_argument("dataset must contain both classes");
    }
  }
};

// ---------------------------------------------------------------------------
// Feature map

/// Rx(x) Rz(t3) Rx(x) Rz(t2) Rx(x) Rz(t1) Rx(x) S H, i.e. the gate sequence
/// {Rx(x), Rz(t1), Rx(x), Rz(t2), Rx(x), Rz(t3), Rx(x)} with the first-listed
/// gate acting first, preceded by the S H initialization.
inline Unitary2 embedding_unitary(double x, const EmbeddingParams& p) {
  detail::require_finite(x, "input value");
  const Unitary2 rx = rot_x(x);
  return rx * rot_z(p.theta3) * rx * rot_z(p.theta2) * rx * rot_z(p.theta1) * rx * phase_s() *
         hadamard();
}

inline PureQubitState feature_map(double x, const EmbeddingParams& p) {
  detail::require_finite(x, "input value");
  const Unitary2 rx = rot_x(x);
  PureQubitState s = rx * init_state();
  s = rx * (rot_z(p.theta1) * s);
  s = rx * (rot_z(p.theta2) * s);
  s = rx * (rot_z(p.theta3) * s);
  return s;
}

inline std::vector<PureQubitState> embed_all(std::span<const double> xs, const EmbeddingParams& p) {
  std::vector<PureQubitState> out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back(feature_map(x, p));
  return out;
}

// ---------------------------------------------------------------------------
// Gram matrices

/// Row-major n x n matrix of squared overlaps |<psi_i|psi_j>|^2.
struct GramMatrix {
  std::size_t n = 0;
  std::vector<double> values;
  std::vector<std::string> ids;

  double operator()(std::size_t i, std::size_t j) const { return values[i * n + j]; }
  double& at(std::size_t i, std::size_t j) { return values[i * n + j]; }
};

inline std::vector<std::string> default_ids(std::size_t n) {
  std::vector<std::string> ids;
  ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) ids.push_back(std::to_string(i + 1));
  return ids;
}

/// Raw inner products <psi_i|psi_j>, row-major.
inline std::vector<cplx> raw_gram(std::span<const PureQubitState> states) {
  const std::size_t n = states.size();
  std::vector<cplx> g(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) g[i * n + j] = inner(states[i], states[j]);
  return g;
}

inline GramMatrix gram_matrix(std::span<const PureQubitState> states,
                              std::vector<std::string> ids = {}) {
  if (states.empty()) throw std::invalid_argument("gram_matrix: empty state list");
  for (const auto& s : states) {
    if (!s.is_normalized(kBlochInputTol)) throw std::invalid_argument("gram_matrix: unnormalized state");
  }
  const std::size_t n = states.size();
  if (ids.empty()) ids = default_ids(n);
  if (ids.size() != n) throw std::invalid_argument("gram_matrix: id count does not match state count");
  GramMatrix g{n, std::vector<double>(n * n), std::move(ids)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) g.at(i, j) = fidelity(states[i], states[j]);
  return g;
}

// ---------------------------------------------------------------------------
// Cost

namespace detail {

inline double pair_sum(std::span<const PureQubitState> u, std::span<const PureQubitState> v) {
  double total = 0.0;
  for (const auto& a : u)
    for (const auto& b : v) total += fidelity(a, b);
  return total;
}

}  // namespace detail

/// C = 1 - (sum_{i,i'} |<a_i|a_i'>|^2 + sum_{j,j'} |<b_j|b_j'>|^2)/2
///       + sum_{i,j} |<a_i|b_j>|^2
///
/// All ordered pairs are summed, diagonal terms included. For class sizes
/// (m, n) the minimum is 1 - (m^2 + n^2)/2.
inline double cost_from_states(std::span<const PureQubitState> a, std::span<const PureQubitState> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("cost: batch must contain both classes");
  return 1.0 - 0.5 * (detail::pair_sum(a, a) + detail::pair_sum(b, b)) + detail::pair_sum(a, b);
}

inline double cost(std::span<const LabeledPoint> batch, const EmbeddingParams& p) {
  std::vector<PureQubitState> a, b;
  for (const auto& pt : batch) {
    (pt.label == Label::A ? a : b).push_back(feature_map(pt.value, p));
  }
  return cost_from_states(a, b);
}

inline double cost_lower_bound(std::size_t m, std::size_t n) {
  return 1.0 - 0.5 * (static_cast<double>(m * m) + static_cast<double>(n * n));
}

// ---------------------------------------------------------------------------
// Datasets

struct Band {
  double lo = 0.0;
  double hi = 0.0;
};

/// Ordered, non-overlapping bands inside [-pi, pi]. Band k carries label A
/// when k is even and B when k is odd, so neighbouring bands alternate and no
/// single threshold separates the classes once there are three or more bands.
struct BandLayout {
  std::vector<Band> bands;

  /// Four bands of width pi/4, one centered in each quarter of [-pi, pi],
  /// separated by guard gaps of the same width.
  static BandLayout standard() {
    const double w = pi / 4.0;
    BandLayout l;
    for (int k = 0; k < 4; ++k) {
      const double centre = -pi + (2.0 * k + 1.0) * pi / 4.0;
      l.bands.push_back({centre - w / 2.0, centre + w / 2.0});
    }
    return l;
  }

  /// `count` contiguous equal bands covering [-pi, pi].
  static BandLayout contiguous(int count) {
    if (count < 2) throw std::invalid_argument("band layout needs at least 2 bands");
    BandLayout l;
    const double w = 2.0 * pi / count;
    for (int k = 0; k < count; ++k) l.bands.push_back({-pi + k * w, -pi + (k + 1) * w});
    l.bands.back().hi = pi;
    return l;
  }

  static Label label_of_band(std::size_t k) { return k % 2 == 0 ? Label::A : Label::B; }

  double total_width() const {
    double w = 0.0;
    for (const auto& b : bands) w += b.hi - b.lo;
    return w;
  }

  void validate() const {
    if (bands.size() < 2) throw std::invalid_argument("band layout needs at least 2 bands");
    for (std::size_t k = 0; k < bands.size(); ++k) {
      const Band& b = bands[k];
      if (!std::isfinite(b.lo) || !std::isfinite(b.hi) || !(b.hi > b.lo)) {
        throw std::invalid_argument("band " + std::to_string(k) + " is empty or inverted");
      }
      if (b.lo < -pi || b.hi > pi) {
        throw std::invalid_argument("band " + std::to_string(k) + " leaves [-pi, pi]");
      }
      if (k > 0 && b.lo < bands[k - 1].hi) {
        throw std::invalid_argument("bands must be sorted and non-overlapping");
      }
    }
  }

  /// One point drawn uniformly over the union of the bands.
  LabeledPoint draw(Rng& rng) const {
    double u = uniform(rng, 0.0, total_width());
    for (std::size_t k = 0; k < bands.size(); ++k) {
      const double w = bands[k].hi - bands[k].lo;
      if (u < w || k + 1 == bands.size()) {
        return {std::min(bands[k].lo + u, bands[k].hi), label_of_band(k)};
      }
      u -= w;
    }
    return {bands.back().hi, label_of_band(bands.size() - 1)};
  }
};

/// Deterministic for a fixed seed. If a draw of `n_points` misses a class,
/// the whole draw is repeated from the next derived sub-seed (up to 256
/// attempts); with n = 2 this amounts to drawing until both labels appear.
inline LabeledDataset generate_dataset(const BandLayout& layout, std::size_t n_points,
                                       std::uint64_t seed) {
  layout.validate();
  if (n_points < 2) throw std::invalid_argument("generate_dataset: need at least 2 points");
  for (std::uint64_t attempt = 0; attempt < 256; ++attempt) {
    Rng rng = make_rng(derive_seed(seed, {hash_tag("dataset"), attempt}));
    LabeledDataset ds;
    ds.points.reserve(n_points);
    for (std::size_t i = 0; i < n_points; ++i) ds.points.push_back(layout.draw(rng));
    if (ds.count(Label::A) > 0 && ds.count(Label::B) > 0) return ds;
  }
  throw std::runtime_error("generate_dataset: could not populate both classes");
}

/// Held-out points: `per_class` fresh draws of each class from the layout,
/// listed in draw order.
inline LabeledDataset draw_balanced(const BandLayout& layout, std::size_t per_class,
                                    std::uint64_t seed) {
  layout.validate();
  Rng rng = make_rng(derive_seed(seed, "validation"));
  LabeledDataset ds;
  std::size_t na = 0, nb = 0;
  while (na < per_class || nb < per_class) {
    const LabeledPoint p = layout.draw(rng);
    std::size_t& n = p.label == Label::A ? na : nb;
    if (n < per_class) {
      ++n;
      ds.points.push_back(p);
    }
  }
  return ds;
}

/// Stable reorder: all class-A points first, then class B.
inline LabeledDataset grouped_by_class(const LabeledDataset& ds) {
  LabeledDataset out;
  for (Label l : {Label::A, Label::B})
    for (const auto& p : ds.points)
      if (p.label == l) out.points.push_back(p);
  return out;
}

// CSV: header `value,label`, one point per line.

inline void write_dataset_csv(std::ostream& os, const LabeledDataset& ds) {
  os << "value,label\n";
  os << std::setprecision(17);
  for (const auto& p : ds.points) os << p.value << ',' << label_char(p.label) << '\n';
}

inline LabeledDataset read_dataset_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("dataset CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "value,label") throw std::invalid_argument("dataset CSV header must be 'value,label'");
  LabeledDataset ds;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw std::invalid_argument("dataset CSV line " + std::to_string(lineno) + ": missing comma");
    }
    LabeledPoint p;
    try {
      std::size_t used = 0;
      p.value = std::stod(line.substr(0, comma), &used);
      if (used != comma) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw std::invalid_argument("dataset CSV line " + std::to_string(lineno) + ": bad value");
    }
    p.label = parse_label(line.substr(comma + 1));
    ds.points.push_back(p);
  }
  ds.validate();
  return ds;
}

}  // namespace qembed
