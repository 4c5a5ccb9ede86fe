#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "autossl/eval.hpp"
#include "helpers.hpp"

using namespace autossl;

// Reference values from scikit-learn's normalized_mutual_info_score (arithmetic mean).
TEST(Nmi, ReferenceValues) {
  EXPECT_NEAR(nmi(std::vector<int>{0, 0, 1, 1, 2, 2}, std::vector<int>{0, 0, 0, 1, 1, 1}), 0.5158037429793889, 1e-12);
  EXPECT_NEAR(nmi(std::vector<int>{0, 0, 1, 1}, std::vector<int>{0, 0, 0, 1}), 0.3437110184854508, 1e-12);
  EXPECT_NEAR(nmi(std::vector<int>{1, 1, 0, 0, 2, 2, 2, 0}, std::vector<int>{0, 1, 2, 0, 1, 2, 0, 1}),
              0.0784973842893764, 1e-12);
}

TEST(Nmi, PermutationInvariantAndSymmetric) {
  const std::vector<int> a{0, 0, 1, 1, 2, 2, 2};
  const std::vector<int> relabeled{7, 7, 3, 3, 9, 9, 9};
  EXPECT_NEAR(nmi(a, relabeled), 1.0, 1e-12);
  const std::vector<int> b{1, 0, 1, 1, 2, 0, 2};
  EXPECT_NEAR(nmi(a, b), nmi(b, a), 1e-15);
}

TEST(Nmi, DegenerateCases) {
  const std::vector<int> constant(6, 4), varied{0, 1, 0, 1, 2, 2};
  EXPECT_EQ(nmi(constant, varied), 0.0);
  EXPECT_EQ(nmi(varied, constant), 0.0);
  EXPECT_EQ(nmi(std::vector<int>{}, std::vector<int>{}), 0.0);
  EXPECT_THROW(nmi(std::vector<int>{0, 1}, std::vector<int>{0}), DimensionError);
}

TEST(Nmi, MatchesBruteForceOracle) {
  RngStream rng(19);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.index(30);
    std::vector<int> a(n), b(n);
    for (auto& x : a) x = static_cast<int>(rng.index(4));
    for (auto& x : b) x = static_cast<int>(rng.index(3));
    std::map<int, double> pa, pb;
    std::map<std::pair<int, int>, double> pab;
    for (std::size_t i = 0; i < n; ++i) {
      pa[a[i]] += 1;
      pb[b[i]] += 1;
      pab[{a[i], b[i]}] += 1;
    }
    const double N = static_cast<double>(n);
    double ha = 0, hb = 0, mi = 0;
    for (auto& [k, c] : pa) ha -= c / N * std::log(c / N);
    for (auto& [k, c] : pb) hb -= c / N * std::log(c / N);
    for (auto& [k, c] : pab) mi += c / N * std::log((c / N) / ((pa[k.first] / N) * (pb[k.second] / N)));
    const double expected = (ha <= 0 || hb <= 0) ? 0.0 : std::clamp(mi / (0.5 * (ha + hb)), 0.0, 1.0);
    EXPECT_NEAR(nmi(a, b), expected, 1e-12);
    const double v = nmi(a, b);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Split, PartitionsAllNodes) {
  const Split s = random_split(1000, 5);
  EXPECT_EQ(s.train.size(), 100u);
  EXPECT_EQ(s.val.size(), 100u);
  EXPECT_EQ(s.test.size(), 800u);
  std::set<NodeId> all;
  for (const auto* v : {&s.train, &s.val, &s.test}) {
    EXPECT_TRUE(std::is_sorted(v->begin(), v->end()));
    all.insert(v->begin(), v->end());
  }
  EXPECT_EQ(all.size(), 1000u);
  EXPECT_EQ(*all.begin(), 0);
  EXPECT_EQ(*all.rbegin(), 999);
}

TEST(Split, SeedDeterminism) {
  const Split a = random_split(200, 3), b = random_split(200, 3), c = random_split(200, 4);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  EXPECT_NE(a.train, c.train);
  EXPECT_THROW(random_split(10, 1, 0.8, 0.3), ConfigError);
}

TEST(Split, LoadsPublicSplitFiles) {
  testing_util::TempDir dir;
  EXPECT_FALSE(load_split(dir.path(), 6).has_value());
  testing_util::write_file(dir.path() / "train_idx.txt", "0\n1\n");
  testing_util::write_file(dir.path() / "test_idx.txt", "4\n5\n");
  const auto s = load_split(dir.path(), 6);
  ASSERT_TRUE(s.has_value());
  EXPECT_EQ(s->train, (std::vector<NodeId>{0, 1}));
  EXPECT_TRUE(s->val.empty());
  EXPECT_EQ(s->test, (std::vector<NodeId>{4, 5}));
}

namespace {

// Two Gaussian classes separated along the first axis.
void separable(int n, std::uint64_t seed, DenseMatrix& x, LabelVector& y) {
  RngStream rng(seed);
  x.resize(n, 3);
  y.resize(n);
  for (int i = 0; i < n; ++i) {
    y[i] = i % 2;
    x(i, 0) = (y[i] ? 3.0 : -3.0) + 0.5 * rng.normal();
    x(i, 1) = rng.normal();
    x(i, 2) = rng.normal();
  }
}

}  // namespace

TEST(LogisticProbe, SeparableDataIsLearned) {
  DenseMatrix x;
  LabelVector y;
  separable(400, 1, x, y);
  const Split s = random_split(400, 2);
  EXPECT_GE(logistic_probe(x, y, s), 0.99);
}

TEST(LogisticProbe, ShuffledLabelsAreNearChance) {
  DenseMatrix x;
  LabelVector y;
  separable(2000, 3, x, y);
  RngStream rng(8);
  rng.shuffle(std::span<int>(y));
  const double acc = logistic_probe(x, y, random_split(2000, 4));
  EXPECT_NEAR(acc, 0.5, 0.06);
}

TEST(LogisticProbe, DuplicatedFeaturesGiveSamePredictions) {
  DenseMatrix x;
  LabelVector y;
  separable(300, 5, x, y);
  DenseMatrix dup(x.rows(), 2 * x.cols());
  dup << x, x;
  const Split s = random_split(300, 6);
  EXPECT_NEAR(logistic_probe(x, y, s), logistic_probe(dup, y, s), 0.02);
}

TEST(LogisticProbe, IgnoresTestLabelsDuringTraining) {
  DenseMatrix x;
  LabelVector y;
  separable(300, 7, x, y);
  const Split s = random_split(300, 8);
  LogisticOptions opt;
  const LogisticModel clean = train_logistic(x, y, s.train, opt);
  LabelVector corrupted = y;
  for (NodeId i : s.test) corrupted[i] = 1 - corrupted[i];
  for (NodeId i : s.val) corrupted[i] = 1 - corrupted[i];
  const LogisticModel dirty = train_logistic(x, corrupted, s.train, opt);
  EXPECT_EQ(clean.weight, dirty.weight);
  EXPECT_EQ(clean.bias, dirty.bias);
}

TEST(LogisticProbe, MulticlassAndErrors) {
  RngStream rng(9);
  DenseMatrix x(300, 2);
  LabelVector y(300);
  for (int i = 0; i < 300; ++i) {
    y[i] = i % 3;
    const double angle = 2.0 * M_PI * y[i] / 3.0;
    x(i, 0) = 4.0 * std::cos(angle) + 0.3 * rng.normal();
    x(i, 1) = 4.0 * std::sin(angle) + 0.3 * rng.normal();
  }
  EXPECT_GE(logistic_probe(x, y, random_split(300, 1)), 0.98);
  LabelVector one(300, 0);
  EXPECT_THROW(logistic_probe(x, one, random_split(300, 1)), ConfigError);
  Split empty;
  EXPECT_THROW(logistic_probe(x, y, empty), ConfigError);
}

TEST(ClusterEval, SeparatedBlobsGivePerfectNmi) {
  RngStream rng(10);
  DenseMatrix x(90, 2);
  LabelVector y(90);
  for (int i = 0; i < 90; ++i) {
    y[i] = i / 30;
    x(i, 0) = 10.0 * y[i] + 0.1 * rng.normal();
    x(i, 1) = 0.1 * rng.normal();
  }
  EXPECT_NEAR(cluster_eval(x, y, 1), 1.0, 1e-12);
}

TEST(ClusterEval, ConstantEmbeddingsGiveZero) {
  const DenseMatrix x = DenseMatrix::Ones(20, 3);
  LabelVector y(20);
  for (int i = 0; i < 20; ++i) y[i] = i % 2;
  EXPECT_NEAR(cluster_eval(x, y, 1), 0.0, 1e-12);
}

TEST(ClusterEval, UsesGraphLabels) {
  const Graph g = testing_util::random_graph(40, 20, 4, 11);
  const DenseMatrix z = testing_util::random_matrix(40, 3, 12, 1.0);
  EXPECT_EQ(cluster_eval(g, z, 5), cluster_eval(z, g.labels(), 5));
}
