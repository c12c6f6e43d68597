#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "tropitest/error.hpp"
#include "tropitest/persistence.hpp"

namespace tropitest::persistence {

namespace {

void check_dims(const Barcode& b1, const Barcode& b2) {
  if (b1.homology_dim != b2.homology_dim)
    throw InputError("bottleneck distance between barcodes of different homology dimensions (" +
                     std::to_string(b1.homology_dim) + " vs " +
                     std::to_string(b2.homology_dim) + ")");
}

// Augmenting-path bipartite matching on an explicit adjacency list.
class BipartiteMatcher {
 public:
  explicit BipartiteMatcher(std::size_t size) : adj_(size), match_right_(size), seen_(size) {}

  void add_edge(std::size_t left, std::size_t right) { adj_[left].push_back(right); }

  // Returns the right partner of every left vertex, or empty if no perfect matching exists.
  std::vector<std::size_t> perfect_matching() {
    constexpr auto kFree = std::numeric_limits<std::size_t>::max();
    std::fill(match_right_.begin(), match_right_.end(), kFree);
    for (std::size_t u = 0; u < adj_.size(); ++u) {
      std::fill(seen_.begin(), seen_.end(), false);
      if (!augment(u)) return {};
    }
    std::vector<std::size_t> left_partner(adj_.size());
    for (std::size_t v = 0; v < match_right_.size(); ++v) left_partner[match_right_[v]] = v;
    return left_partner;
  }

 private:
  bool augment(std::size_t u) {
    for (std::size_t v : adj_[u]) {
      if (seen_[v]) continue;
      seen_[v] = true;
      if (match_right_[v] == std::numeric_limits<std::size_t>::max() || augment(match_right_[v])) {
        match_right_[v] = u;
        return true;
      }
    }
    return false;
  }

  std::vector<std::vector<std::size_t>> adj_;
  std::vector<std::size_t> match_right_;
  std::vector<bool> seen_;
};

}  // namespace

double bar_distance(const Bar& a, const Bar& b) {
  return std::max(std::abs(a.birth() - b.birth()), std::abs(a.death() - b.death()));
}

double diagonal_distance(const Bar& a) { return a.persistence() / 2; }

BottleneckResult bottleneck_matching(const Barcode& b1, const Barcode& b2) {
  check_dims(b1, b2);
  const std::size_t n1 = b1.size();
  const std::size_t n2 = b2.size();
  BottleneckResult result;
  if (n1 + n2 == 0) return result;

  // Left side: bars of b1, then diagonal slots for b2. Right side: bars of b2,
  // then diagonal slots for b1. Diagonal-to-diagonal edges are free.
  std::vector<double> cross(n1 * n2);
  std::vector<double> candidates{0.0};
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t j = 0; j < n2; ++j)
      candidates.push_back(cross[i * n2 + j] = bar_distance(b1.bars[i], b2.bars[j]));
  for (const auto& b : b1.bars) candidates.push_back(diagonal_distance(b));
  for (const auto& b : b2.bars) candidates.push_back(diagonal_distance(b));
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  auto try_threshold = [&](double t) {
    BipartiteMatcher m(n1 + n2);
    for (std::size_t i = 0; i < n1; ++i) {
      for (std::size_t j = 0; j < n2; ++j)
        if (cross[i * n2 + j] <= t) m.add_edge(i, j);
      if (diagonal_distance(b1.bars[i]) <= t) m.add_edge(i, n2 + i);
    }
    for (std::size_t j = 0; j < n2; ++j) {
      if (diagonal_distance(b2.bars[j]) <= t) m.add_edge(n1 + j, j);
      for (std::size_t i = 0; i < n1; ++i) m.add_edge(n1 + j, n2 + i);
    }
    return m.perfect_matching();
  };

  // Matching everything to the diagonal always works at the largest candidate.
  std::size_t lo = 0;
  std::size_t hi = candidates.size() - 1;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (!try_threshold(candidates[mid]).empty())
      hi = mid;
    else
      lo = mid + 1;
  }
  result.distance = candidates[lo];
  const auto partner = try_threshold(result.distance);

  std::vector<bool> second_matched(n2, false);
  for (std::size_t i = 0; i < n1; ++i) {
    if (partner[i] < n2) {
      result.matching.pairs.emplace_back(i, partner[i]);
      second_matched[partner[i]] = true;
    } else {
      result.matching.unmatched_first.push_back(i);
    }
  }
  for (std::size_t j = 0; j < n2; ++j)
    if (!second_matched[j]) result.matching.unmatched_second.push_back(j);
  return result;
}

double bottleneck_distance(const Barcode& b1, const Barcode& b2) {
  return bottleneck_matching(b1, b2).distance;
}

double bottleneck_bruteforce(const Barcode& b1, const Barcode& b2) {
  check_dims(b1, b2);
  const std::size_t n1 = b1.size();
  const std::size_t n2 = b2.size();
  if (n1 + n2 > 8)
    throw RefusalError("bottleneck_bruteforce handles at most 8 bars in total (got " +
                       std::to_string(n1 + n2) + ")");

  // Each bar of b1 goes to a distinct bar of b2 or to nothing.
  std::vector<bool> used(n2, false);
  std::vector<std::size_t> assign(n1);
  double best = std::numeric_limits<double>::infinity();
  std::function<void(std::size_t)> visit = [&](std::size_t i) {
    if (i == n1) {
      double penalty = 0;
      for (std::size_t a = 0; a < n1; ++a)
        penalty = std::max(penalty, assign[a] < n2 ? bar_distance(b1.bars[a], b2.bars[assign[a]])
                                                   : diagonal_distance(b1.bars[a]));
      for (std::size_t j = 0; j < n2; ++j)
        if (!used[j]) penalty = std::max(penalty, diagonal_distance(b2.bars[j]));
      best = std::min(best, penalty);
      return;
    }
    assign[i] = n2;
    visit(i + 1);
    for (std::size_t j = 0; j < n2; ++j) {
      if (used[j]) continue;
      used[j] = true;
      assign[i] = j;
      visit(i + 1);
      used[j] = false;
    }
  };
  visit(0);
  return best;
}

}  // namespace tropitest::persistence
