#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <string>

#include "tropitest/error.hpp"
#include "tropitest/persistence.hpp"

namespace tropitest::persistence {

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

// Sparse Z/2 column: ascending local row indices, pivot = back().
using Column = std::vector<std::size_t>;

void add_into(Column& target, const Column& source, Column& scratch) {
  scratch.clear();
  std::set_symmetric_difference(target.begin(), target.end(), source.begin(), source.end(),
                                std::back_inserter(scratch));
  target.swap(scratch);
}

// Reduces the boundary matrix from `dim`-simplices to (dim-1)-simplices, in
// filtration order. Columns listed in `cleared` are known to reduce to zero and
// are skipped. Returns, per local column, the local pivot row or kNone.
std::vector<std::size_t> reduce(const Filtration& f, const std::vector<std::size_t>& columns,
                                const std::vector<std::size_t>& local_row,
                                std::size_t num_rows, const std::vector<bool>& cleared) {
  std::vector<std::size_t> pivot_of(columns.size(), kNone);
  std::vector<std::size_t> column_with_pivot(num_rows, kNone);
  std::vector<Column> reduced(columns.size());
  Column scratch;

  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (!cleared.empty() && cleared[c]) continue;
    Column col;
    for (std::size_t face : f.boundary(columns[c])) col.push_back(local_row[face]);
    std::sort(col.begin(), col.end());
    while (!col.empty()) {
      const std::size_t other = column_with_pivot[col.back()];
      if (other == kNone) break;
      add_into(col, reduced[other], scratch);
    }
    if (!col.empty()) {
      pivot_of[c] = col.back();
      column_with_pivot[col.back()] = c;
      reduced[c] = std::move(col);
    }
  }
  return pivot_of;
}

}  // namespace

Bar Bar::from_birth_death(double birth, double death) {
  if (!(birth >= 0) || !std::isfinite(birth)) throw InputError("bar birth must be finite and >= 0");
  if (!std::isfinite(death)) throw InputError("bar death must be finite");
  if (!(death >= birth)) throw InputError("bar death must not precede its birth");
  return Bar(birth, death);
}

Bar Bar::from_birth_persistence(double birth, double persistence) {
  if (!(persistence >= 0) || !std::isfinite(persistence))
    throw InputError("bar persistence must be finite and >= 0");
  return from_birth_death(birth, birth + persistence);
}

std::size_t Barcode::positive_count() const {
  return static_cast<std::size_t>(
      std::count_if(bars.begin(), bars.end(), [](const Bar& b) { return b.persistence() > 0; }));
}

Barcode Barcode::sorted() const {
  Barcode out = *this;
  std::sort(out.bars.begin(), out.bars.end(), [](const Bar& a, const Bar& b) {
    if (a.birth() != b.birth()) return a.birth() < b.birth();
    return a.death() < b.death();
  });
  return out;
}

Barcode compute_barcode(const Filtration& f, int homology_dim, EssentialPolicy essential_policy) {
  if (homology_dim < 0) throw ConfigurationError("homology dimension must be nonnegative");
  if (homology_dim >= f.max_dim())
    throw ConfigurationError("homology dimension " + std::to_string(homology_dim) +
                             " requires a filtration with max_dim > " +
                             std::to_string(homology_dim) + " (got " +
                             std::to_string(f.max_dim()) + ")");

  const int d = homology_dim;
  // Local indices per dimension, in filtration order.
  std::vector<std::size_t> local(f.size(), kNone);
  std::vector<std::size_t> low, mid, high;  // dims d-1, d, d+1
  for (std::size_t i = 0; i < f.size(); ++i) {
    const int k = f.dim(i);
    if (k == d - 1) {
      local[i] = low.size();
      low.push_back(i);
    } else if (k == d) {
      local[i] = mid.size();
      mid.push_back(i);
    } else if (k == d + 1) {
      local[i] = high.size();
      high.push_back(i);
    }
  }

  // Pairs (d-simplex, (d+1)-simplex) come from reducing the top boundary.
  const auto high_pivots = reduce(f, high, local, mid.size(), {});
  std::vector<bool> killed(mid.size(), false);
  Barcode out;
  out.homology_dim = d;
  for (std::size_t c = 0; c < high.size(); ++c) {
    if (high_pivots[c] == kNone) continue;
    killed[high_pivots[c]] = true;
    const double birth = f.scale(mid[high_pivots[c]]);
    const double death = f.scale(high[c]);
    if (birth < death) out.bars.push_back(Bar::from_birth_death(birth, death));
  }

  // A d-simplex creates a class iff its boundary reduces to zero. Killed
  // simplices are creators already (clearing), so their columns are skipped.
  std::vector<bool> creator(mid.size(), true);
  if (d > 0) {
    const auto mid_pivots = reduce(f, mid, local, low.size(), killed);
    for (std::size_t c = 0; c < mid.size(); ++c) creator[c] = killed[c] || mid_pivots[c] == kNone;
  }

  if (essential_policy == EssentialPolicy::kTruncate) {
    for (std::size_t c = 0; c < mid.size(); ++c) {
      if (!creator[c] || killed[c]) continue;
      const double birth = f.scale(mid[c]);
      if (birth < f.max_scale()) out.bars.push_back(Bar::from_birth_death(birth, f.max_scale()));
    }
  }
  return out.sorted();
}

}  // namespace tropitest::persistence
