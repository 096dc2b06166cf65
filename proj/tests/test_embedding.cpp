#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "qembed/core.hpp"
#include "qembed/embedding.hpp"
#include "qembed/random.hpp"

using namespace qembed;

namespace {

using M2 = Eigen::Matrix2cd;

M2 expm_sigma(double t, int axis) {
  M2 s;
  if (axis == 0) s << 0, 1, 1, 0;
  else s << 1, 0, 0, -1;
  return (cplx(0, -t / 2.0) * s).exp();
}

// Gate list applied left to right to SH|0>, using matrix exponentials.
Eigen::Vector2cd oracle_feature_map(double x, const EmbeddingParams& p) {
  Eigen::Vector2cd v(1.0 / std::sqrt(2.0), cplx(0, 1.0 / std::sqrt(2.0)));
  const std::array<std::pair<double, int>, 7> gates{{{x, 0}, {p.theta1, 1}, {x, 0}, {p.theta2, 1}, {x, 0},
                                                     {p.theta3, 1}, {x, 0}}};
  for (const auto& [t, axis] : gates) v = expm_sigma(t, axis) * v;
  return v;
}

double oracle_fidelity(const Eigen::Vector2cd& a, const Eigen::Vector2cd& b) {
  return std::norm(a.dot(b));
}

// The cost written out as the literal sum over all ordered pairs.
double oracle_cost(const std::vector<LabeledPoint>& batch, const EmbeddingParams& p) {
  double intra = 0.0, cross = 0.0;
  for (const auto& u : batch) {
    for (const auto& v : batch) {
      const double f = oracle_fidelity(oracle_feature_map(u.value, p), oracle_feature_map(v.value, p));
      if (u.label == v.label) intra += f;
      else if (u.label == Label::A) cross += f;
    }
  }
  return 1.0 - 0.5 * intra + cross;
}

EmbeddingParams random_params_for_test(Rng& rng) {
  return {uniform(rng, -pi, pi), uniform(rng, -pi, pi), uniform(rng, -pi, pi)};
}

}  // namespace

TEST(FeatureMap, AllZeroIsInitState) {
  const PureQubitState s = feature_map(0.0, {});
  EXPECT_NEAR(fidelity(s, init_state()), 1.0, 1e-15);
  const BlochVector b = state_to_bloch(s);
  EXPECT_NEAR(b.y, 1.0, 1e-15);
}

TEST(FeatureMap, FirstZRotationQuarterTurn) {
  const BlochVector b = state_to_bloch(feature_map(0.0, {pi / 2, 0.0, 0.0}));
  EXPECT_NEAR(b.x, -1.0, 1e-15);
  EXPECT_NEAR(b.y, 0.0, 1e-15);
  EXPECT_NEAR(b.z, 0.0, 1e-15);
}

TEST(FeatureMap, XEqualsPiIsIdentityUpToPhase) {
  EXPECT_NEAR(fidelity(feature_map(pi, {}), init_state()), 1.0, 1e-15);
}

TEST(FeatureMap, GateOrderPinned) {
  // theta1 acts right after the first Rx(x); theta3 right before the last.
  // Exchanging theta1 and theta3 gives a clearly different state.
  const EmbeddingParams p{0.3, 0.5, 1.1};
  const EmbeddingParams swapped{1.1, 0.5, 0.3};
  const double x = 0.9;
  const auto expected = oracle_feature_map(x, p);
  const PureQubitState s = feature_map(x, p);
  EXPECT_NEAR(oracle_fidelity(expected, Eigen::Vector2cd(s.amp0, s.amp1)), 1.0, 1e-12);
  EXPECT_LT(fidelity(s, feature_map(x, swapped)), 0.9);
}

TEST(FeatureMap, MatchesExponentialOracle) {
  Rng rng = make_rng(21);
  for (int i = 0; i < 500; ++i) {
    const double x = uniform(rng, -4.0, 4.0);
    const EmbeddingParams p = random_params_for_test(rng);
    const PureQubitState s = feature_map(x, p);
    EXPECT_NEAR(s.norm_sq(), 1.0, 1e-12);
    EXPECT_NEAR(oracle_fidelity(oracle_feature_map(x, p), Eigen::Vector2cd(s.amp0, s.amp1)), 1.0, 1e-12);
  }
}

TEST(FeatureMap, NonFiniteRejected) {
  EXPECT_THROW(feature_map(std::numeric_limits<double>::quiet_NaN(), {}), std::invalid_argument);
  EXPECT_THROW(feature_map(0.0, {std::numeric_limits<double>::infinity(), 0, 0}), std::invalid_argument);
}

TEST(EmbeddingUnitary, ZeroIsSH) {
  const Unitary2 u = embedding_unitary(0.0, {});
  const Unitary2 sh = phase_s() * hadamard();
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(std::abs(u.entries()[k] - sh.entries()[k]), 0.0, 1e-15);
}

TEST(EmbeddingUnitary, AppliedToZeroGivesFeatureMap) {
  Rng rng = make_rng(22);
  for (int i = 0; i < 500; ++i) {
    const double x = uniform(rng, -pi, pi);
    const EmbeddingParams p = random_params_for_test(rng);
    const Unitary2 u = embedding_unitary(x, p);
    ASSERT_TRUE(u.is_unitary(1e-12));
    EXPECT_NEAR(1.0 - fidelity(u * ket0(), feature_map(x, p)), 0.0, 1e-12);
    const auto d = unitary_to_axis_angle(u);
    EXPECT_LT(distance_up_to_phase(axis_rotation(d.rotation), u), 1e-10);
  }
}

TEST(Gram, Examples) {
  const std::vector<PureQubitState> s{ket0(), ket0(), ket1()};
  const GramMatrix g = gram_matrix(s);
  const std::vector<double> want{1, 1, 0, 1, 1, 0, 0, 0, 1};
  EXPECT_EQ(g.values, want);
  EXPECT_EQ(g.ids, (std::vector<std::string>{"1", "2", "3"}));
  const std::vector<PureQubitState> one{init_state()};
  EXPECT_NEAR(gram_matrix(one).values.at(0), 1.0, 1e-15);
  EXPECT_THROW(gram_matrix(std::vector<PureQubitState>{}), std::invalid_argument);
}

TEST(Gram, SquaredModulusOfPositiveSemidefiniteRawGram) {
  Rng rng = make_rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<std::size_t>(uniform_index(rng, 1, 12));
    std::vector<PureQubitState> states;
    for (std::size_t i = 0; i < n; ++i) states.push_back(random_state(rng));
    const auto raw = raw_gram(states);
    const GramMatrix g = gram_matrix(states);
    Eigen::MatrixXcd m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = raw[i * n + j];
        EXPECT_NEAR(g(i, j), std::norm(raw[i * n + j]), 1e-15);
        EXPECT_NEAR(g(i, j), g(j, i), 1e-15);
        EXPECT_GE(g(i, j), 0.0);
        EXPECT_LE(g(i, j), 1.0 + 1e-15);
      }
      EXPECT_NEAR(g(i, i), 1.0, 1e-9);
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-9);
  }
}

TEST(Cost, Examples) {
  const std::vector<PureQubitState> zeros{ket0(), ket0()}, ones{ket1(), ket1()};
  EXPECT_DOUBLE_EQ(cost_from_states(zeros, ones), -3.0);
  EXPECT_DOUBLE_EQ(cost_from_states(zeros, zeros), 1.0);
  const std::vector<PureQubitState> a(5, ket0()), b(5, ket1());
  EXPECT_DOUBLE_EQ(cost_from_states(a, b), -24.0);
  EXPECT_DOUBLE_EQ(cost_lower_bound(5, 5), -24.0);
}

TEST(Cost, MatchesLiteralSum) {
  Rng rng = make_rng(24);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<LabeledPoint> batch;
    const int n = static_cast<int>(uniform_index(rng, 2, 9));
    for (int i = 0; i < n; ++i) batch.push_back({uniform(rng, -pi, pi), i % 2 ? Label::B : Label::A});
    const EmbeddingParams p = random_params_for_test(rng);
    EXPECT_NEAR(cost(batch, p), oracle_cost(batch, p), 1e-11);
  }
}

TEST(Cost, SingleClassRejected) {
  const std::vector<LabeledPoint> batch{{0.1, Label::A}, {0.2, Label::A}};
  EXPECT_THROW(cost(batch, {}), std::invalid_argument);
}

TEST(Cost, PermutationInvariantAndBounded) {
  Rng rng = make_rng(25);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<LabeledPoint> batch;
    std::size_t m = 0, n = 0;
    for (int i = 0; i < 8; ++i) {
      const Label l = i < 3 ? Label::A : Label::B;
      (l == Label::A ? m : n) += 1;
      batch.push_back({uniform(rng, -pi, pi), l});
    }
    const EmbeddingParams p = random_params_for_test(rng);
    const double c = cost(batch, p);
    EXPECT_GE(c, cost_lower_bound(m, n) - 1e-12);
    auto shuffled = batch;
    std::reverse(shuffled.begin(), shuffled.end());
    std::rotate(shuffled.begin(), shuffled.begin() + 3, shuffled.end());
    EXPECT_NEAR(cost(shuffled, p), c, 1e-12);
  }
}

TEST(Cost, LowerBoundAttainedByOrthogonalCollapse) {
  const double r = std::numbers::sqrt2 / 2.0;
  const PureQubitState plus{r, r}, minus{r, -r};
  const std::vector<PureQubitState> a(3, plus), b(4, minus);
  EXPECT_NEAR(cost_from_states(a, b), cost_lower_bound(3, 4), 1e-12);
}

TEST(Dataset, FourContiguousBandsCounting) {
  const BandLayout layout = BandLayout::contiguous(4);
  const LabeledDataset ds = generate_dataset(layout, 1000, 99);
  ASSERT_EQ(ds.size(), 1000u);
  const double sigma = std::sqrt(1000 * 0.25);
  EXPECT_LT(std::abs(static_cast<double>(ds.count(Label::A)) - 500.0), 5.0 * sigma);
  EXPECT_GT(ds.count(Label::B), 0u);
  for (const auto& p : ds.points) {
    EXPECT_GE(p.value, -pi);
    EXPECT_LE(p.value, pi);
    const auto band = static_cast<std::size_t>(std::min(3.0, std::floor((p.value + pi) / (pi / 2))));
    EXPECT_EQ(p.label, BandLayout::label_of_band(band));
  }
}

TEST(Dataset, StandardLayoutPointsInsideBandsAndNotThresholdSeparable) {
  const BandLayout layout = BandLayout::standard();
  const LabeledDataset ds = generate_dataset(layout, 1000, 5);
  for (const auto& p : ds.points) {
    bool inside = false;
    for (std::size_t k = 0; k < layout.bands.size(); ++k) {
      if (p.value >= layout.bands[k].lo && p.value <= layout.bands[k].hi) {
        inside = true;
        EXPECT_EQ(p.label, BandLayout::label_of_band(k));
      }
    }
    EXPECT_TRUE(inside) << p.value;
  }
  // No threshold t with one class entirely on each side.
  auto sorted = ds.points;
  std::sort(sorted.begin(), sorted.end(), [](auto& a, auto& b) { return a.value < b.value; });
  int label_changes = 0;
  for (std::size_t i = 1; i < sorted.size(); ++i) label_changes += sorted[i].label != sorted[i - 1].label;
  EXPECT_GE(label_changes, 2);
}

TEST(Dataset, UniformWithinBand) {
  const BandLayout layout = BandLayout::contiguous(2);
  const LabeledDataset ds = generate_dataset(layout, 20000, 3);
  // Deciles of the first band should each hold about a tenth of its points.
  std::array<int, 10> bins{};
  int total = 0;
  for (const auto& p : ds.points) {
    if (p.label != Label::A) continue;
    ++total;
    bins[static_cast<std::size_t>(std::min(9.0, std::floor((p.value + pi) / pi * 10.0)))]++;
  }
  for (int b : bins) EXPECT_NEAR(b, total / 10.0, 5.0 * std::sqrt(total * 0.09));
}

TEST(Dataset, TwoPointsHaveBothLabels) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const LabeledDataset ds = generate_dataset(BandLayout::standard(), 2, seed);
    EXPECT_EQ(ds.count(Label::A), 1u);
    EXPECT_EQ(ds.count(Label::B), 1u);
  }
}

TEST(Dataset, Deterministic) {
  const auto a = generate_dataset(BandLayout::standard(), 300, 8);
  const auto b = generate_dataset(BandLayout::standard(), 300, 8);
  const auto c = generate_dataset(BandLayout::standard(), 300, 9);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.points[i].value, b.points[i].value);
    EXPECT_EQ(a.points[i].label, b.points[i].label);
  }
  EXPECT_NE(a.points[0].value, c.points[0].value);
}

TEST(Dataset, DegenerateLayoutsRejected) {
  EXPECT_THROW(generate_dataset(BandLayout{{{0.0, 1.0}}}, 10, 1), std::invalid_argument);
  EXPECT_THROW(generate_dataset(BandLayout{{{0.0, 1.0}, {0.5, 2.0}}}, 10, 1), std::invalid_argument);
  EXPECT_THROW(generate_dataset(BandLayout{{{0.0, 0.0}, {1.0, 2.0}}}, 10, 1), std::invalid_argument);
  EXPECT_THROW(generate_dataset(BandLayout{{{-4.0, 0.0}, {1.0, 2.0}}}, 10, 1), std::invalid_argument);
  EXPECT_THROW(generate_dataset(BandLayout::standard(), 1, 1), std::invalid_argument);
}

TEST(Dataset, BalancedDraw) {
  const LabeledDataset v = draw_balanced(BandLayout::standard(), 5, 4);
  EXPECT_EQ(v.count(Label::A), 5u);
  EXPECT_EQ(v.count(Label::B), 5u);
  const LabeledDataset g = grouped_by_class(v);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(g.points[i].label, i < 5 ? Label::A : Label::B);
}

TEST(Dataset, CsvRoundTrip) {
  const LabeledDataset ds = generate_dataset(BandLayout::standard(), 50, 1);
  std::stringstream ss;
  write_dataset_csv(ss, ds);
  EXPECT_EQ(ss.str().substr(0, 12), "value,label\n");
  const LabeledDataset back = read_dataset_csv(ss);
  ASSERT_EQ(back.size(), ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    EXPECT_EQ(back.points[i].value, ds.points[i].value);
    EXPECT_EQ(back.points[i].label, ds.points[i].label);
  }
  std::stringstream bad("value,label\n0.5,C\n");
  EXPECT_THROW(read_dataset_csv(bad), std::invalid_argument);
  std::stringstream out_of_range("value,label\n4.0,A\n-1,B\n");
  EXPECT_THROW(read_dataset_csv(out_of_range), std::invalid_argument);
}

TEST(Params, CanonicalRange) {
  const EmbeddingParams p{3.5 * pi, -pi, pi};
  const EmbeddingParams c = p.canonical();
  for (double t : c.as_array()) {
    EXPECT_GT(t, -pi);
    EXPECT_LE(t, pi);
  }
  EXPECT_NEAR(c.theta1, -0.5 * pi, 1e-12);
  EXPECT_NEAR(c.theta2, pi, 1e-12);
}
