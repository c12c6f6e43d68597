#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tropitest/tropical.hpp"

namespace tropitest::twosample {

// Nonempty set of real vectors of one common dimension.
class Sample {
 public:
  explicit Sample(std::vector<std::vector<double>> vectors);
  static Sample from_embeddings(std::span<const tropical::SortedEmbedding> embeddings);

  std::size_t size() const { return vectors_.size(); }
  std::size_t dim() const { return vectors_.front().size(); }
  const std::vector<double>& operator[](std::size_t i) const { return vectors_[i]; }
  const std::vector<std::vector<double>>& vectors() const { return vectors_; }

  // True when every vector is nondecreasing, i.e. the sample lies in the ordered cone.
  bool in_cone() const;

 private:
  std::vector<std::vector<double>> vectors_;
};

struct TestResult {
  double statistic = 0;
  double critical_value = 0;
  double p_value = 1;
  double alpha = 0.05;
  std::size_t num_permutations = 0;
  bool reject = false;
  std::uint64_t seed = 0;
  bool exact = false;  // full enumeration of relabelings instead of sampling
};

// V-statistic form of the energy distance between the empirical measures:
// 2/(n1 n2) sum_cross |x - y| - 1/n1^2 sum_11 |x - x'| - 1/n2^2 sum_22 |y - y'|.
double energy_statistic(const Sample& s1, const Sample& s2);

// Sums with pairwise (cascade) summation.
double pairwise_sum(std::span<const double> values);

// Statistics of `num_permutations` random relabelings of the pooled sample
// that keep the group sizes. When n1 + n2 <= 8 and num_permutations >= (n1+n2)!,
// every distinct relabeling is enumerated once instead.
std::vector<double> permutation_null_distribution(const Sample& s1, const Sample& s2,
                                                  std::size_t num_permutations,
                                                  std::uint64_t seed, unsigned threads = 0);

// k-th smallest value, k = ceil((1 - alpha) * size).
double critical_value(std::vector<double> null_values, double alpha);

TestResult permutation_test(const Sample& s1, const Sample& s2, double alpha,
                            std::size_t num_permutations, std::uint64_t seed,
                            unsigned threads = 0);

// Random relabeling for replicate `index`: a permutation of 0..size-1 drawn
// from a stream that depends only on (seed, index).
std::vector<std::size_t> replicate_permutation(std::size_t size, std::uint64_t seed,
                                               std::uint64_t index);

}  // namespace tropitest::twosample
