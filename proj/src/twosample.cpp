#include "tropitest/twosample.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "tropitest/error.hpp"
#include "tropitest/parallel.hpp"

namespace tropitest::twosample {

namespace {

// Pooled-sample distances, row-major N x N.
struct Pooled {
  std::size_t size;
  std::vector<double> dist;

  double operator()(std::size_t i, std::size_t j) const { return dist[i * size + j]; }
};

Pooled pool(const Sample& s1, const Sample& s2) {
  if (s1.dim() != s2.dim())
    throw InputError("samples have different dimensions (" + std::to_string(s1.dim()) + " vs " +
                     std::to_string(s2.dim()) + ")");
  std::vector<const std::vector<double>*> rows;
  for (const auto& v : s1.vectors()) rows.push_back(&v);
  for (const auto& v : s2.vectors()) rows.push_back(&v);
  const std::size_t n = rows.size();
  Pooled p{n, std::vector<double>(n * n, 0.0)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0;
      for (std::size_t k = 0; k < rows[i]->size(); ++k) {
        const double diff = (*rows[i])[k] - (*rows[j])[k];
        s += diff * diff;
      }
      p.dist[i * n + j] = p.dist[j * n + i] = std::sqrt(s);
    }
  return p;
}

// Terms are sorted before summation so the result depends only on the
// multiset of distances, not on the order of the points.
double sorted_sum(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  return pairwise_sum(terms);
}

// Energy statistic of the labeling that puts `order[0..n1)` in group 1.
double labeled_energy(const Pooled& p, std::span<const std::size_t> order, std::size_t n1,
                      std::vector<double>& scratch) {
  const std::size_t n = order.size();
  const std::size_t n2 = n - n1;

  scratch.clear();
  for (std::size_t a = 0; a < n1; ++a)
    for (std::size_t b = n1; b < n; ++b) scratch.push_back(p(order[a], order[b]));
  const double cross = sorted_sum(scratch);

  auto within = [&](std::size_t lo, std::size_t hi) {
    scratch.clear();
    // Every ordered pair, zero diagonal included: when both samples are the same
    // multiset, all three sums see the same sorted terms and cancel exactly.
    for (std::size_t a = lo; a < hi; ++a)
      for (std::size_t b = lo; b < hi; ++b) scratch.push_back(p(order[a], order[b]));
    return sorted_sum(scratch);
  };
  const double w1 = within(0, n1);
  const double w2 = within(n1, n);

  const double d1 = static_cast<double>(n1);
  const double d2 = static_cast<double>(n2);
  const double value = 2 * cross / (d1 * d2) - (w1 / (d1 * d1) + w2 / (d2 * d2));
  // The V-statistic is a squared distance between empirical embeddings; only
  // rounding can push it below zero.
  return std::max(0.0, value);
}

std::uint64_t factorial_capped(std::size_t n) {
  std::uint64_t f = 1;
  for (std::size_t k = 2; k <= n; ++k) f *= k;
  return f;
}

bool use_exact(std::size_t pooled, std::size_t num_permutations) {
  return pooled <= 8 && num_permutations >= factorial_capped(pooled);
}

void check_permutation_args(std::size_t num_permutations) {
  if (num_permutations < 1) throw ParameterError("num_permutations must be at least 1");
}

}  // namespace

Sample::Sample(std::vector<std::vector<double>> vectors) : vectors_(std::move(vectors)) {
  if (vectors_.empty()) throw InputError("sample must be nonempty");
  const std::size_t d = vectors_.front().size();
  if (d == 0) throw InputError("sample vectors must have positive dimension");
  for (const auto& v : vectors_) {
    if (v.size() != d) throw InputError("sample vectors differ in dimension");
    for (double x : v)
      if (!std::isfinite(x)) throw InputError("sample vector has a non-finite entry");
  }
}

Sample Sample::from_embeddings(std::span<const tropical::SortedEmbedding> embeddings) {
  std::vector<std::vector<double>> rows;
  rows.reserve(embeddings.size());
  for (const auto& e : embeddings) rows.push_back(e.values);
  Sample s(std::move(rows));
  if (!s.in_cone()) throw InputError("embedding vectors must be nondecreasing");
  return s;
}

bool Sample::in_cone() const {
  return std::all_of(vectors_.begin(), vectors_.end(),
                     [](const auto& v) { return std::is_sorted(v.begin(), v.end()); });
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double energy_statistic(const Sample& s1, const Sample& s2) {
  const Pooled p = pool(s1, s2);
  std::vector<std::size_t> order(p.size);
  for (std::size_t i = 0; i < p.size; ++i) order[i] = i;
  std::vector<double> scratch;
  return labeled_energy(p, order, s1.size(), scratch);
}

std::vector<std::size_t> replicate_permutation(std::size_t size, std::uint64_t seed,
                                               std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 rng(seq);
  // Unbiased bounded draw by rejection; the standard distributions are
  // implementation-defined and would make files differ across toolchains.
  auto below = [&](std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
      x = rng();
    } while (x >= limit);
    return x % bound;
  };
  std::vector<std::size_t> perm(size);
  for (std::size_t i = 0; i < size; ++i) perm[i] = i;
  for (std::size_t i = size; i > 1; --i) std::swap(perm[i - 1], perm[below(i)]);
  return perm;
}

std::vector<double> permutation_null_distribution(const Sample& s1, const Sample& s2,
                                                  std::size_t num_permutations,
                                                  std::uint64_t seed, unsigned threads) {
  check_permutation_args(num_permutations);
  const Pooled p = pool(s1, s2);
  const std::size_t n = p.size;
  const std::size_t n1 = s1.size();

  if (use_exact(n, num_permutations)) {
    // Each group-1 subset stands for n1! n2! equally likely permutations.
    std::vector<double> values;
    std::vector<bool> in_first(n, false);
    std::fill(in_first.begin(), in_first.begin() + n1, true);
    std::vector<double> scratch;
    std::vector<std::size_t> order(n);
    do {
      std::size_t a = 0, b = n1;
      for (std::size_t i = 0; i < n; ++i) order[in_first[i] ? a++ : b++] = i;
      values.push_back(labeled_energy(p, order, n1, scratch));
    } while (std::prev_permutation(in_first.begin(), in_first.end()));
    return values;
  }

  std::vector<double> values(num_permutations);
  parallel_for(
      num_permutations,
      [&](std::size_t r) {
        thread_local std::vector<double> scratch;
        const auto order = replicate_permutation(n, seed, r);
        values[r] = labeled_energy(p, order, n1, scratch);
      },
      threads);
  return values;
}

double critical_value(std::vector<double> null_values, double alpha) {
  if (null_values.empty()) throw ParameterError("empty null distribution");
  if (!(alpha > 0 && alpha < 1)) throw ParameterError("alpha must lie in (0, 1)");
  const double target = (1 - alpha) * static_cast<double>(null_values.size());
  // Guard against (1 - alpha) * B landing a hair above an integer.
  auto k = static_cast<std::size_t>(std::ceil(target - 1e-9));
  k = std::clamp<std::size_t>(k, 1, null_values.size());
  std::nth_element(null_values.begin(), null_values.begin() + (k - 1), null_values.end());
  return null_values[k - 1];
}

TestResult permutation_test(const Sample& s1, const Sample& s2, double alpha,
                            std::size_t num_permutations, std::uint64_t seed, unsigned threads) {
  if (!(alpha > 0 && alpha < 1)) throw ParameterError("alpha must lie in (0, 1)");
  check_permutation_args(num_permutations);

  TestResult r;
  r.alpha = alpha;
  r.seed = seed;
  r.statistic = energy_statistic(s1, s2);
  const auto null_values = permutation_null_distribution(s1, s2, num_permutations, seed, threads);
  r.exact = use_exact(s1.size() + s2.size(), num_permutations);
  r.num_permutations = null_values.size();
  r.critical_value = critical_value(null_values, alpha);

  const auto at_least = static_cast<double>(std::count_if(
      null_values.begin(), null_values.end(), [&](double v) { return v >= r.statistic; }));
  const auto total = static_cast<double>(null_values.size());
  // The enumeration contains the observed labeling itself; sampled replicates do not.
  r.p_value = r.exact ? at_least / total : (1 + at_least) / (total + 1);
  r.reject = r.statistic >= r.critical_value && r.p_value <= alpha;
  return r;
}

}  // namespace tropitest::twosample
