#include "tropitest/tropical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "tropitest/error.hpp"

namespace tropitest::tropical {

namespace {

// A bar reduced to the two max-plus variables of its block:
// first = min(b, m l), second = l.
template <class T>
struct Block {
  T first;
  T second;
};

template <class T>
T sentinel() {
  return std::numeric_limits<T>::lowest();
}

void check_capacity(std::size_t bars, std::size_t n) {
  if (bars > n)
    throw CapacityError("barcode has " + std::to_string(bars) + " bars but capacity n = " +
                        std::to_string(n));
}

template <class T>
std::vector<Block<T>> padded_blocks(const std::vector<Block<T>>& blocks, std::size_t n) {
  check_capacity(blocks.size(), n);
  auto out = blocks;
  out.resize(n, Block<T>{T{0}, T{0}});
  return out;
}

std::vector<Block<double>> to_blocks(const Barcode& bars, RegularizationParam m) {
  const double mm = static_cast<double>(m.value());
  std::vector<Block<double>> out;
  out.reserve(bars.size());
  for (const auto& bar : bars.bars) {
    const double l = bar.persistence();
    out.push_back({std::min(bar.birth(), mm * l), l});
  }
  return out;
}

std::vector<Block<std::int64_t>> to_blocks(std::span<const IntegerBar> bars,
                                           RegularizationParam m) {
  const auto mm = static_cast<std::int64_t>(m.value());
  std::vector<Block<std::int64_t>> out;
  out.reserve(bars.size());
  for (const auto& bar : bars) {
    if (bar.birth < 0 || bar.persistence < 0)
      throw InputError("integer bar with negative birth or persistence");
    out.push_back({std::min(bar.birth, mm * bar.persistence), bar.persistence});
  }
  return out;
}

// table[(a*(j+1) + b)*(k+1) + c] = best sum with exactly a (0,1), b (1,1) and
// c (1,0) roles filled by distinct blocks.
template <class T>
T dp_eval(const std::vector<Block<T>>& blocks, const OrbitIndex& idx) {
  const std::size_t si = idx.i + 1, sj = idx.j + 1, sk = idx.k + 1;
  std::vector<T> table(si * sj * sk, sentinel<T>());
  auto at = [&](std::size_t a, std::size_t b, std::size_t c) -> T& {
    return table[(a * sj + b) * sk + c];
  };
  at(0, 0, 0) = T{0};
  for (const auto& blk : blocks) {
    const T gains[3] = {blk.second, blk.first + blk.second, blk.first};
    // Descending sweep so each block fills at most one role.
    for (std::size_t a = si; a-- > 0;)
      for (std::size_t b = sj; b-- > 0;)
        for (std::size_t c = sk; c-- > 0;) {
          T best = at(a, b, c);
          if (a > 0 && at(a - 1, b, c) != sentinel<T>())
            best = std::max(best, at(a - 1, b, c) + gains[0]);
          if (b > 0 && at(a, b - 1, c) != sentinel<T>())
            best = std::max(best, at(a, b - 1, c) + gains[1]);
          if (c > 0 && at(a, b, c - 1) != sentinel<T>())
            best = std::max(best, at(a, b, c - 1) + gains[2]);
          at(a, b, c) = best;
        }
  }
  return at(idx.i, idx.j, idx.k);
}

template <class T>
std::vector<T> dp_all(const std::vector<Block<T>>& blocks, std::size_t n) {
  const std::size_t s = n + 1;
  std::vector<T> table(s * s, sentinel<T>());
  table[0] = T{0};
  std::size_t seen = 0;
  for (const auto& blk : blocks) {
    ++seen;
    const T g01 = blk.second;
    const T g11 = blk.first + blk.second;
    for (std::size_t a = std::min(seen, n) + 1; a-- > 0;)
      for (std::size_t b = std::min(seen, n - a) + 1; b-- > 0;) {
        T& cell = table[a * s + b];
        if (a > 0 && table[(a - 1) * s + b] != sentinel<T>())
          cell = std::max(cell, table[(a - 1) * s + b] + g01);
        if (b > 0 && table[a * s + b - 1] != sentinel<T>())
          cell = std::max(cell, table[a * s + b - 1] + g11);
      }
  }
  std::vector<T> out;
  out.reserve(embedding_dimension(n));
  for (const auto& idx : orbit_indices(n)) out.push_back(table[idx.i * s + idx.j]);
  return out;
}

template <class T>
T brute_eval(const std::vector<Block<T>>& blocks, const OrbitIndex& idx) {
  // Row roles: 0 = (0,0), 1 = (0,1), 2 = (1,1), 3 = (1,0). next_permutation
  // over the sorted multiset visits each matrix of the orbit exactly once.
  std::vector<int> roles(blocks.size(), 0);
  std::size_t pos = blocks.size() - idx.i - idx.j - idx.k;
  for (std::size_t t = 0; t < idx.i; ++t) roles[pos++] = 1;
  for (std::size_t t = 0; t < idx.j; ++t) roles[pos++] = 2;
  for (std::size_t t = 0; t < idx.k; ++t) roles[pos++] = 3;

  T best = sentinel<T>();
  do {
    T monomial{0};
    for (std::size_t r = 0; r < roles.size(); ++r) {
      const int a1 = roles[r] == 2 || roles[r] == 3;
      const int a2 = roles[r] == 1 || roles[r] == 2;
      if (a1) monomial += blocks[r].first;
      if (a2) monomial += blocks[r].second;
    }
    best = std::max(best, monomial);
  } while (std::next_permutation(roles.begin(), roles.end()));
  return best;
}

void check_index(const OrbitIndex& idx, std::size_t n) {
  idx.validate();
  if (idx.n != n)
    throw ParameterError("orbit index has n = " + std::to_string(idx.n) + " but capacity is " +
                         std::to_string(n));
}

void check_refusal(std::size_t n) {
  if (n > 7)
    throw RefusalError("gamma_bruteforce enumerates n! matrices and refuses n = " +
                       std::to_string(n) + " > 7");
}

}  // namespace

void OrbitIndex::validate() const {
  if (n < 1) throw ParameterError("orbit index needs n >= 1");
  if (i + j + k > n) throw ParameterError("orbit index has i + j + k > n");
  if (i + j + k == 0) throw ParameterError("orbit index (0, 0, 0) is the excluded zero matrix");
}

RegularizationParam::RegularizationParam(std::uint64_t m) : m_(m) {
  if (m < 1) throw ParameterError("regularization parameter m must be >= 1");
}

std::size_t embedding_dimension(std::size_t n) { return n + n * (n + 1) / 2; }

std::vector<OrbitIndex> orbit_indices(std::size_t n) {
  if (n < 1) throw ParameterError("orbit_indices needs n >= 1");
  std::vector<OrbitIndex> out;
  out.reserve(embedding_dimension(n));
  for (std::size_t i = 0; i <= n; ++i)
    for (std::size_t j = 0; i + j <= n; ++j)
      if (i + j > 0) out.push_back({i, j, 0, n});
  return out;
}

double gamma_eval(const Barcode& bars, std::size_t n, RegularizationParam m,
                  const OrbitIndex& idx) {
  check_index(idx, n);
  return dp_eval(padded_blocks(to_blocks(bars, m), n), idx);
}

std::int64_t gamma_eval(std::span<const IntegerBar> bars, std::size_t n, RegularizationParam m,
                        const OrbitIndex& idx) {
  check_index(idx, n);
  return dp_eval(padded_blocks(to_blocks(bars, m), n), idx);
}

double gamma_bruteforce(const Barcode& bars, std::size_t n, RegularizationParam m,
                        const OrbitIndex& idx) {
  check_refusal(n);
  check_index(idx, n);
  return brute_eval(padded_blocks(to_blocks(bars, m), n), idx);
}

std::int64_t gamma_bruteforce(std::span<const IntegerBar> bars, std::size_t n,
                              RegularizationParam m, const OrbitIndex& idx) {
  check_refusal(n);
  check_index(idx, n);
  return brute_eval(padded_blocks(to_blocks(bars, m), n), idx);
}

std::vector<double> tropical_coordinates(const Barcode& bars, std::size_t n,
                                         RegularizationParam m) {
  if (n < 1) throw ParameterError("capacity n must be >= 1");
  return dp_all(padded_blocks(to_blocks(bars, m), n), n);
}

std::vector<std::int64_t> tropical_coordinates(std::span<const IntegerBar> bars, std::size_t n,
                                               RegularizationParam m) {
  if (n < 1) throw ParameterError("capacity n must be >= 1");
  return dp_all(padded_blocks(to_blocks(bars, m), n), n);
}

std::uint64_t required_m(const Barcode& bars) {
  double ratio = 0;
  for (const auto& bar : bars.bars)
    if (bar.persistence() > 0) ratio = std::max(ratio, bar.birth() / bar.persistence());
  if (ratio > 9.0e15)
    throw DegenerateInputError("birth/persistence ratio " + std::to_string(ratio) +
                               " is too large for a regularization parameter");
  auto m = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(ratio)));
  // The division may round down; settle on the first m that passes the test.
  while (!check_regularized(bars, RegularizationParam(m))) ++m;
  return m;
}

RegularizationParam regularization_parameter(std::span<const Barcode> barcodes, MPolicy policy) {
  if (policy == MPolicy::kUniversal) return RegularizationParam(kUniversalM);
  bool any_positive = false;
  std::uint64_t m = 1;
  for (const auto& bc : barcodes) {
    any_positive = any_positive || bc.positive_count() > 0;
    m = std::max(m, required_m(bc));
  }
  if (!any_positive)
    throw DegenerateInputError(
        "data-driven m needs at least one bar with positive persistence");
  return RegularizationParam(m);
}

bool check_regularized(const Barcode& bars, RegularizationParam m) {
  const double mm = static_cast<double>(m.value());
  return std::all_of(bars.bars.begin(), bars.bars.end(), [&](const Bar& bar) {
    const double l = bar.persistence();
    return !(l > 0) || bar.birth() <= mm * l;
  });
}

Barcode clip_to_regularized(const Barcode& bars, RegularizationParam m) {
  const double mm = static_cast<double>(m.value());
  Barcode out;
  out.homology_dim = bars.homology_dim;
  for (const auto& bar : bars.bars) {
    const double l = bar.persistence();
    if (l > 0 && bar.birth() > mm * l) {
      // death - birth is recomputed in floating point; nudge birth down until
      // the stored bar satisfies the constraint exactly.
      double birth = mm * l;
      const double death = birth + l;
      while (birth > mm * (death - birth)) birth = std::nextafter(birth, 0.0);
      out.bars.push_back(Bar::from_birth_death(birth, death));
    } else
      out.bars.push_back(bar);
  }
  return out;
}

TropicalEmbedding tropical_embedding(const Barcode& bars, std::size_t n, RegularizationParam m,
                                     std::vector<std::size_t> order) {
  if (!check_regularized(bars, m))
    throw RegularizationError("barcode is not regularized for m = " + std::to_string(m.value()) +
                              "; it needs m >= " + std::to_string(required_m(bars)));
  auto coords = tropical_coordinates(bars, n, m);
  const std::size_t d = coords.size();
  if (order.empty()) {
    order.resize(d);
    std::iota(order.begin(), order.end(), 0);
  }
  if (order.size() != d) throw ParameterError("coordinate order has the wrong length");
  std::vector<bool> hit(d, false);
  for (std::size_t t : order) {
    if (t >= d || hit[t]) throw ParameterError("coordinate order is not a permutation");
    hit[t] = true;
  }
  TropicalEmbedding out{{}, n, m, std::move(order)};
  out.values.reserve(d);
  for (std::size_t t : out.coordinate_order) out.values.push_back(coords[t]);
  return out;
}

SortedEmbedding sufficient_statistic(const Barcode& bars, std::size_t n, RegularizationParam m) {
  auto values = tropical_embedding(bars, n, m).values;
  std::sort(values.begin(), values.end());
  return {std::move(values)};
}

Barcode canonicalize(const Barcode& bars, std::size_t n) {
  Barcode out;
  out.homology_dim = bars.homology_dim;
  for (const auto& bar : bars.bars)
    if (bar.persistence() > 0) out.bars.push_back(bar);
  check_capacity(out.bars.size(), n);
  std::sort(out.bars.begin(), out.bars.end(), [](const Bar& a, const Bar& b) {
    if (a.birth() != b.birth()) return a.birth() < b.birth();
    return a.persistence() < b.persistence();
  });
  return out;
}

std::size_t pooled_capacity(std::span<const Barcode> barcodes) {
  std::size_t n = 1;
  for (const auto& bc : barcodes) n = std::max(n, bc.positive_count());
  return n;
}

}  // namespace tropitest::tropical
