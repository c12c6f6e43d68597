#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tropitest/error.hpp"
#include "tropitest/persistence.hpp"

namespace tropitest::persistence {

namespace {

// binom[k][v] = C(v, k), used for the combinatorial number system.
std::vector<std::vector<std::uint64_t>> binomial_table(std::size_t n, int max_k) {
  std::vector<std::vector<std::uint64_t>> t(max_k + 1, std::vector<std::uint64_t>(n + 1, 0));
  for (std::size_t v = 0; v <= n; ++v) t[0][v] = 1;
  for (int k = 1; k <= max_k; ++k)
    for (std::size_t v = 1; v <= n; ++v) t[k][v] = t[k - 1][v - 1] + t[k][v - 1];
  return t;
}

}  // namespace

std::uint64_t Filtration::key_of(std::span<const std::uint32_t> vertices) const {
  // Vertices are stored ascending; this is the colexicographic rank.
  std::uint64_t key = 0;
  for (std::size_t k = 0; k < vertices.size(); ++k) key += binom_[k + 1][vertices[k]];
  return key;
}

std::size_t Filtration::index_of(std::span<const std::uint32_t> vertices) const {
  const auto& table = lookup_[vertices.size() - 1];
  const std::uint64_t key = key_of(vertices);
  auto it = std::lower_bound(table.begin(), table.end(), std::make_pair(key, std::size_t{0}));
  return it->second;
}

std::vector<std::size_t> Filtration::boundary(std::size_t i) const {
  const auto v = vertices(i);
  std::vector<std::size_t> faces;
  if (v.size() < 2) return faces;
  std::vector<std::uint32_t> face(v.size() - 1);
  faces.reserve(v.size());
  for (std::size_t skip = 0; skip < v.size(); ++skip) {
    std::size_t w = 0;
    for (std::size_t k = 0; k < v.size(); ++k)
      if (k != skip) face[w++] = v[k];
    faces.push_back(index_of(face));
  }
  return faces;
}

std::size_t Filtration::count(int dim) const {
  if (dim < 0 || dim >= static_cast<int>(lookup_.size())) return 0;
  return lookup_[dim].size();
}

Filtration build_rips_filtration(const DistanceMatrix& dm, int max_dim, double max_scale) {
  if (max_dim < 0) throw ParameterError("max_dim must be nonnegative");
  if (!(max_scale > 0) || std::isnan(max_scale))
    throw ParameterError("max_scale must be positive");

  const std::size_t n = dm.size();
  Filtration f;
  f.max_dim_ = max_dim;
  f.max_scale_ = max_scale;
  f.num_vertices_ = n;
  f.binom_ = binomial_table(n, max_dim + 1);

  struct Candidate {
    double scale;
    std::uint32_t dim;
    std::uint32_t offset;
  };
  std::vector<Candidate> found;
  std::vector<std::uint32_t> data;

  // Depth-first clique enumeration over ascending vertex tuples.
  std::vector<std::uint32_t> stack;
  auto extend = [&](auto&& self, double scale) -> void {
    const auto offset = static_cast<std::uint32_t>(data.size());
    data.insert(data.end(), stack.begin(), stack.end());
    found.push_back({scale, static_cast<std::uint32_t>(stack.size() - 1), offset});
    if (static_cast<int>(stack.size()) > max_dim) return;
    for (std::uint32_t next = stack.back() + 1; next < n; ++next) {
      double s = scale;
      bool ok = true;
      for (std::uint32_t v : stack) {
        const double d = dm(v, next);
        if (d > max_scale) {
          ok = false;
          break;
        }
        s = std::max(s, d);
      }
      if (!ok) continue;
      stack.push_back(next);
      self(self, s);
      stack.pop_back();
    }
  };
  for (std::uint32_t v = 0; v < n; ++v) {
    stack.assign(1, v);
    extend(extend, 0.0);
  }

  std::vector<std::size_t> order(found.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = found[a];
    const auto& y = found[b];
    if (x.scale != y.scale) return x.scale < y.scale;
    if (x.dim != y.dim) return x.dim < y.dim;
    return std::lexicographical_compare(data.begin() + x.offset,
                                        data.begin() + x.offset + x.dim + 1,
                                        data.begin() + y.offset,
                                        data.begin() + y.offset + y.dim + 1);
  });

  f.simplices_.reserve(found.size());
  f.vertex_data_.reserve(data.size());
  for (std::size_t idx : order) {
    const auto& c = found[idx];
    const auto offset = static_cast<std::uint32_t>(f.vertex_data_.size());
    f.vertex_data_.insert(f.vertex_data_.end(), data.begin() + c.offset,
                          data.begin() + c.offset + c.dim + 1);
    f.simplices_.push_back({offset, c.dim, c.scale});
  }

  f.lookup_.assign(max_dim + 1, {});
  for (std::size_t i = 0; i < f.simplices_.size(); ++i)
    f.lookup_[f.simplices_[i].dim].emplace_back(f.key_of(f.vertices(i)), i);
  for (auto& table : f.lookup_) std::sort(table.begin(), table.end());
  return f;
}

}  // namespace tropitest::persistence
