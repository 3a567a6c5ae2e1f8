#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "sticky/error.h"
#include "sticky/geometry.h"
#include "test_util.h"

namespace sticky {
namespace {

std::vector<EmbeddingVector> random_cloud(std::size_t n, std::size_t d, std::uint64_t seed, double bias = 0.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<EmbeddingVector> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v(d);
    for (auto& x : v) x = g(rng);
    v[0] += bias;
    out.push_back(EmbeddingVector::normalized(v));
  }
  return out;
}

std::pair<double, double> brute_force(const std::vector<EmbeddingVector>& v) {
  double s = 0, s2 = 0, m = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (i == j) continue;
      const double c = cosine(v[i], v[j]);
      s += c;
      s2 += c * c;
      ++m;
    }
  }
  const double u = s / m;
  return {u, std::sqrt(s2 / m - u * u)};
}

TEST(MeanPairwise, ExactMatchesDoubleLoop) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto v = random_cloud(150 + seed * 20, 16, seed, 1.5);
    const auto s = mean_pairwise_similarity(v);
    const auto [u, sigma] = brute_force(v);
    EXPECT_EQ(s.method, StatsMethod::Exact);
    EXPECT_NEAR(s.u, u, 1e-12);
    EXPECT_NEAR(s.sigma, sigma, 1e-12);
    EXPECT_FALSE(s.sample_seed.has_value());
  }
}

TEST(MeanPairwise, BlockBoundaryDoesNotMatter) {
  const auto v = random_cloud(4100, 4, 11, 0.5);
  const auto s = mean_pairwise_similarity(v);
  double sum_x[4] = {0, 0, 0, 0};
  double self = 0;
  for (const auto& e : v) {
    for (int k = 0; k < 4; ++k) sum_x[k] += e[k];
    self += cosine(e, e);
  }
  double sq = 0;
  for (double x : sum_x) sq += x * x;
  const double n = 4100.0;
  EXPECT_NEAR(s.u, (sq - self) / (n * (n - 1)), 1e-10);
}

TEST(MeanPairwise, IdenticalVectorsHaveUnitMeanZeroSpread) {
  std::vector<EmbeddingVector> v(5, EmbeddingVector::normalized({1.0, 2.0, 2.0}));
  const auto s = mean_pairwise_similarity(v);
  EXPECT_NEAR(s.u, 1.0, 1e-12);
  EXPECT_NEAR(s.sigma, 0.0, 1e-6);
}

TEST(MeanPairwise, SampledModeRecordsSeedAndIsClose) {
  const auto v = random_cloud(600, 8, 3, 1.0);
  StatsOptions o;
  o.force_sampled = true;
  o.sample_pairs = 50'000;
  o.seed = 77;
  const auto s = mean_pairwise_similarity(v, o);
  const auto exact = mean_pairwise_similarity(v);
  EXPECT_EQ(s.method, StatsMethod::Sampled);
  EXPECT_EQ(s.sample_seed, 77u);
  EXPECT_EQ(s.sampled_pairs, 50'000u);
  EXPECT_NEAR(s.u, exact.u, 0.01);
  EXPECT_NEAR(s.sigma, exact.sigma, 0.01);
  EXPECT_EQ(mean_pairwise_similarity(v, o).u, s.u);
}

TEST(MeanPairwise, BudgetSwitchesToSampling) {
  const auto v = random_cloud(300, 8, 4);
  StatsOptions o;
  o.exact_budget = 100;  // 300 * 64 > 100
  o.sample_pairs = 1000;
  EXPECT_EQ(mean_pairwise_similarity(v, o).method, StatsMethod::Sampled);
  o.sample_pairs = 1'000'000;  // more than the 44850 distinct pairs: stay exact
  EXPECT_EQ(mean_pairwise_similarity(v, o).method, StatsMethod::Exact);
}

TEST(MeanPairwise, RejectsBadInput) {
  EXPECT_THROW(mean_pairwise_similarity(random_cloud(1, 3, 0)), Error);
  auto v = random_cloud(3, 3, 0);
  v.push_back(EmbeddingVector::normalized({1.0, 0.0}));
  EXPECT_THROW(mean_pairwise_similarity(v), Error);
}

TEST(Histogram, CountsEveryPairOnce) {
  const auto v = random_cloud(40, 5, 1);
  const auto h = similarity_histogram(v);
  ASSERT_EQ(h.counts.size(), 200u);
  std::size_t total = 0;
  for (auto c : h.counts) total += c;
  EXPECT_EQ(total, 40u * 39u / 2u);
  EXPECT_FALSE(h.sampled);
  EXPECT_DOUBLE_EQ(h.bin_low(0), -1.0);
  EXPECT_DOUBLE_EQ(h.bin_high(199), 1.0);
  std::ostringstream out;
  write_histogram_csv(out, h);
  const std::string text = out.str();
  EXPECT_EQ(text.rfind("bin_low,bin_high,count\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 201);
}

TEST(Histogram, IdenticalVectorsLandInTopBin) {
  std::vector<EmbeddingVector> v(3, EmbeddingVector::normalized({1.0, 0.0}));
  EXPECT_EQ(similarity_histogram(v).counts.back(), 3u);
}

TEST(Anisotropy, SkipsBlankSurfaces) {
  ClassifiedVocabulary vocab;
  for (TokenId i = 0; i < 4; ++i) {
    vocab.records.push_back({i, std::string(i == 2 ? " " : "w" + std::to_string(i)), 2, TokenClass::Other});
    vocab.valid_ids.push_back(i);
  }
  EmbeddingGateway g(std::make_shared<testing::TableProvider>(6));
  const auto r = anisotropy_report(vocab, g);
  EXPECT_EQ(r.skipped_blank, 1u);
  EXPECT_EQ(r.embedded_ids, (std::vector<TokenId>{0, 1, 3}));
  EXPECT_EQ(r.stats.n_tokens, 3u);
}

TEST(ModelStats, JsonRoundTrip) {
  ModelStats s{0.25, 0.1, 10, StatsMethod::Sampled, 5u, 100};
  const auto back = model_stats_from_json(to_json(s));
  EXPECT_EQ(back.u, s.u);
  EXPECT_EQ(back.sigma, s.sigma);
  EXPECT_EQ(back.method, StatsMethod::Sampled);
  EXPECT_EQ(back.sample_seed, 5u);
}

}  // namespace
}  // namespace sticky
