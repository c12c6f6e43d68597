#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tropitest/persistence.hpp"

namespace tropitest::tropical {

using persistence::Bar;
using persistence::Barcode;

// Orbit of 0/1 exponent matrices with n rows: i rows (0,1), j rows (1,1),
// k rows (1,0); the remaining n - i - j - k rows are (0,0).
struct OrbitIndex {
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t k = 0;
  std::size_t n = 1;

  // Throws ParameterError unless i + j + k <= n and (i, j, k) != (0, 0, 0).
  void validate() const;
  bool operator==(const OrbitIndex&) const = default;
};

class RegularizationParam {
 public:
  explicit RegularizationParam(std::uint64_t m);
  std::uint64_t value() const { return m_; }
  bool operator==(const RegularizationParam&) const = default;

 private:
  std::uint64_t m_;
};

enum class MPolicy { kDataDriven, kUniversal };
inline constexpr std::uint64_t kUniversalM = 100;

struct TropicalEmbedding {
  std::vector<double> values;
  std::size_t n = 0;
  RegularizationParam m{1};
  std::vector<std::size_t> coordinate_order;  // values[t] = T_{order[t]}
};

// Nondecreasing vector: a point of the ordered cone.
struct SortedEmbedding {
  std::vector<double> values;
  bool operator==(const SortedEmbedding&) const = default;
};

// Integer-valued bar for exact evaluation.
struct IntegerBar {
  std::int64_t birth = 0;
  std::int64_t persistence = 0;
};

// d = n + n(n+1)/2.
std::size_t embedding_dimension(std::size_t n);

// All (i, j) with i + j <= n, (i, j) != (0, 0), k = 0, ordered
// lexicographically by (i, j).
std::vector<OrbitIndex> orbit_indices(std::size_t n);

// Max over assignments of bar slots (padded to n with (0,0) bars) to the roles
// of `idx` of the sum of l for (0,1), min(b, m l) + l for (1,1), and
// min(b, m l) for (1,0). Dynamic programming over bars.
double gamma_eval(const Barcode& bars, std::size_t n, RegularizationParam m, const OrbitIndex& idx);
std::int64_t gamma_eval(std::span<const IntegerBar> bars, std::size_t n, RegularizationParam m,
                        const OrbitIndex& idx);

// Same quantity by enumerating every matrix in the row-permutation orbit.
// Refuses n > 7.
double gamma_bruteforce(const Barcode& bars, std::size_t n, RegularizationParam m,
                        const OrbitIndex& idx);
std::int64_t gamma_bruteforce(std::span<const IntegerBar> bars, std::size_t n,
                              RegularizationParam m, const OrbitIndex& idx);

// All coordinates in orbit_indices(n) order, from one shared table.
std::vector<double> tropical_coordinates(const Barcode& bars, std::size_t n,
                                         RegularizationParam m);
std::vector<std::int64_t> tropical_coordinates(std::span<const IntegerBar> bars, std::size_t n,
                                               RegularizationParam m);

RegularizationParam regularization_parameter(std::span<const Barcode> barcodes, MPolicy policy);

// True iff b <= m l for every bar with l > 0.
bool check_regularized(const Barcode& bars, RegularizationParam m);

// Smallest m for which `bars` is regularized (1 if there is no constraint).
std::uint64_t required_m(const Barcode& bars);

// Replaces the birth of every offending bar by m l, keeping l.
Barcode clip_to_regularized(const Barcode& bars, RegularizationParam m);

// `order` must be a permutation of 0..d-1; empty means identity.
TropicalEmbedding tropical_embedding(const Barcode& bars, std::size_t n, RegularizationParam m,
                                     std::vector<std::size_t> order = {});

SortedEmbedding sufficient_statistic(const Barcode& bars, std::size_t n, RegularizationParam m);

// Drops zero-persistence bars and orders the rest by (birth, persistence).
Barcode canonicalize(const Barcode& bars, std::size_t n);

// Largest positive-bar count over a collection (at least 1).
std::size_t pooled_capacity(std::span<const Barcode> barcodes);

}  // namespace tropitest::tropical
