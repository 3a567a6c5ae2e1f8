#include "sticky/geometry.h"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "sticky/error.h"
#include "sticky/rng.h"
#include "sticky/utf8.h"

namespace sticky {

namespace {

// Neumaier compensated sum.
class Accumulator {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

void check_inputs(std::span<const EmbeddingVector> vectors) {
  if (vectors.size() < 2) throw Error("pairwise statistics need at least two vectors");
  const std::size_t d = vectors.front().dim();
  for (const auto& v : vectors) {
    if (v.dim() != d) throw Error("pairwise statistics: mixed dimensions");
    const double n = std::sqrt(cosine(v, v));
    if (std::abs(n - 1.0) > 1e-6) throw Error("pairwise statistics: input vector is not unit norm");
  }
}

// Distinct unordered pairs (i < j), drawn without replacement.
std::vector<std::pair<std::size_t, std::size_t>> sample_pairs(std::size_t n, std::size_t count,
                                                              std::uint64_t seed) {
  XorShift64Star rng(seed);
  std::unordered_set<std::uint64_t> seen;
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(count);
  while (out.size() < count) {
    std::size_t i = rng.below(n);
    std::size_t j = rng.below(n);
    if (i == j) continue;
    if (i > j) std::swap(i, j);
    if (seen.insert(static_cast<std::uint64_t>(i) * n + j).second) out.emplace_back(i, j);
  }
  return out;
}

ModelStats exact_stats(std::span<const EmbeddingVector> vectors) {
  const std::size_t n = vectors.size();
  const std::size_t d = vectors.front().dim();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  Accumulator self_dot;
  Accumulator self_dot_sq;
  constexpr std::size_t kBlock = 4096;
  Eigen::MatrixXd block;
  for (std::size_t start = 0; start < n; start += kBlock) {
    const std::size_t rows = std::min(kBlock, n - start);
    block.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(d));
    for (std::size_t r = 0; r < rows; ++r) {
      const auto v = vectors[start + r].values();
      for (std::size_t c = 0; c < d; ++c) block(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v[c];
      const double sq = cosine(v, v);
      self_dot.add(sq);
      self_dot_sq.add(sq * sq);
    }
    sum += block.colwise().sum().transpose();
    gram.selfadjointView<Eigen::Lower>().rankUpdate(block.transpose());
  }
  gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();

  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1);
  // sum_{i != j} e_i.e_j = |S|^2 - sum |e_i|^2
  const double off_dot = sum.squaredNorm() - self_dot.value();
  // sum_{i != j} (e_i.e_j)^2 = |M|_F^2 - sum |e_i|^4,  M = sum e_i e_i^T
  const double off_sq = gram.squaredNorm() - self_dot_sq.value();
  ModelStats s;
  s.u = off_dot / pairs;
  const double var = off_sq / pairs - s.u * s.u;
  s.sigma = std::sqrt(std::max(0.0, var));
  s.n_tokens = n;
  s.method = StatsMethod::Exact;
  return s;
}

}  // namespace

ModelStats mean_pairwise_similarity(std::span<const EmbeddingVector> vectors, const StatsOptions& options) {
  check_inputs(vectors);
  const double n = static_cast<double>(vectors.size());
  const double d = static_cast<double>(vectors.front().dim());
  const double total_pairs = n * (n - 1.0) / 2.0;
  const bool sampled = (options.force_sampled || n * d * d > options.exact_budget) &&
                       static_cast<double>(options.sample_pairs) < total_pairs;
  if (!sampled) return exact_stats(vectors);

  const auto pairs = sample_pairs(vectors.size(), options.sample_pairs, options.seed);
  Accumulator sum, sum_sq;
  for (const auto& [i, j] : pairs) {
    const double c = cosine(vectors[i], vectors[j]);
    sum.add(c);
    sum_sq.add(c * c);
  }
  const double m = static_cast<double>(pairs.size());
  ModelStats s;
  s.u = sum.value() / m;
  s.sigma = std::sqrt(std::max(0.0, sum_sq.value() / m - s.u * s.u));
  s.n_tokens = vectors.size();
  s.method = StatsMethod::Sampled;
  s.sample_seed = options.seed;
  s.sampled_pairs = pairs.size();
  return s;
}

double Histogram::bin_low(std::size_t i) const {
  return low + (high - low) * static_cast<double>(i) / static_cast<double>(counts.size());
}

double Histogram::bin_high(std::size_t i) const { return bin_low(i + 1); }

Histogram similarity_histogram(std::span<const EmbeddingVector> vectors, const StatsOptions& options,
                               std::size_t bins) {
  check_inputs(vectors);
  Histogram h;
  h.counts.assign(bins, 0);
  auto add = [&](double c) {
    auto b = static_cast<std::ptrdiff_t>(std::floor((c - h.low) / (h.high - h.low) * static_cast<double>(bins)));
    b = std::clamp<std::ptrdiff_t>(b, 0, static_cast<std::ptrdiff_t>(bins) - 1);
    ++h.counts[static_cast<std::size_t>(b)];
  };
  const std::size_t n = vectors.size();
  const double total = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  if (total <= static_cast<double>(options.histogram_pairs)) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) add(cosine(vectors[i], vectors[j]));
    }
  } else {
    h.sampled = true;
    for (const auto& [i, j] : sample_pairs(n, options.histogram_pairs, options.seed)) {
      add(cosine(vectors[i], vectors[j]));
    }
  }
  return h;
}

void write_histogram_csv(std::ostream& out, const Histogram& h) {
  out << "bin_low,bin_high,count\n";
  out.precision(6);
  out << std::fixed;
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    out << h.bin_low(i) << ',' << h.bin_high(i) << ',' << h.counts[i] << '\n';
  }
  out.unsetf(std::ios::floatfield);
}

AnisotropyReport anisotropy_report(const ClassifiedVocabulary& vocab, const EmbeddingGateway& gateway,
                                   const StatsOptions& options) {
  AnisotropyReport report;
  std::vector<std::string> texts;
  for (TokenId id : vocab.valid_ids) {
    const auto& surface = *vocab.at(id).surface;
    if (utf8::trim(surface).empty()) {
      ++report.skipped_blank;
      continue;
    }
    texts.push_back(surface);
    report.embedded_ids.push_back(id);
  }
  const auto vectors = gateway.embed_batch(texts);
  report.stats = mean_pairwise_similarity(vectors, options);
  report.histogram = similarity_histogram(vectors, options);
  return report;
}

AnisotropyReport anisotropy_report(const TokenizerHandle& handle, const EmbeddingGateway& gateway,
                                   const StatsOptions& options, unsigned threads) {
  return anisotropy_report(classify_vocabulary(handle, threads), gateway, options);
}

nlohmann::json to_json(const ModelStats& s) {
  nlohmann::json j = {{"u", s.u},
                      {"sigma", s.sigma},
                      {"n_tokens", s.n_tokens},
                      {"method", s.method == StatsMethod::Exact ? "exact" : "sampled"}};
  if (s.sample_seed) {
    j["sample_seed"] = *s.sample_seed;
    j["sampled_pairs"] = s.sampled_pairs;
  }
  return j;
}

ModelStats model_stats_from_json(const nlohmann::json& j) {
  ModelStats s;
  s.u = j.at("u").get<double>();
  s.sigma = j.at("sigma").get<double>();
  s.n_tokens = j.at("n_tokens").get<std::size_t>();
  s.method = j.at("method").get<std::string>() == "exact" ? StatsMethod::Exact : StatsMethod::Sampled;
  if (j.contains("sample_seed")) {
    s.sample_seed = j["sample_seed"].get<std::uint64_t>();
    s.sampled_pairs = j.value("sampled_pairs", std::size_t{0});
  }
  return s;
}

}  // namespace sticky
