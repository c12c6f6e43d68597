#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "tropitest/synthgeo.hpp"

namespace tropitest::persistence {

using synthgeo::DistanceMatrix;

// Vietoris-Rips filtration. Simplices are stored in filtration order:
// by (scale, dimension, lexicographic vertices), which refines the face order.
class Filtration {
 public:
  struct Simplex {
    std::uint32_t offset;  // into vertex storage
    std::uint32_t dim;
    double scale;
  };

  Filtration() = default;

  std::size_t size() const { return simplices_.size(); }
  int max_dim() const { return max_dim_; }
  double max_scale() const { return max_scale_; }
  std::size_t num_vertices() const { return num_vertices_; }

  int dim(std::size_t i) const { return static_cast<int>(simplices_[i].dim); }
  double scale(std::size_t i) const { return simplices_[i].scale; }
  std::span<const std::uint32_t> vertices(std::size_t i) const {
    return {vertex_data_.data() + simplices_[i].offset, simplices_[i].dim + 1};
  }

  // Filtration indices of the codimension-1 faces of simplex i (empty for vertices).
  std::vector<std::size_t> boundary(std::size_t i) const;

  // Number of simplices of dimension `dim`.
  std::size_t count(int dim) const;

 private:
  friend Filtration build_rips_filtration(const DistanceMatrix&, int, double);

  std::uint64_t key_of(std::span<const std::uint32_t> vertices) const;
  std::size_t index_of(std::span<const std::uint32_t> vertices) const;

  int max_dim_ = 0;
  double max_scale_ = 0;
  std::size_t num_vertices_ = 0;
  std::vector<Simplex> simplices_;
  std::vector<std::uint32_t> vertex_data_;
  // Per dimension: sorted (combinatorial key, filtration index).
  std::vector<std::vector<std::pair<std::uint64_t, std::size_t>>> lookup_;
  std::vector<std::vector<std::uint64_t>> binom_;
};

// A finite interval [birth, death). Death is stored exactly; persistence is derived.
class Bar {
 public:
  Bar() = default;
  static Bar from_birth_death(double birth, double death);
  static Bar from_birth_persistence(double birth, double persistence);

  double birth() const { return birth_; }
  double death() const { return death_; }
  double persistence() const { return death_ - birth_; }

  bool operator==(const Bar&) const = default;

 private:
  Bar(double b, double d) : birth_(b), death_(d) {}
  double birth_ = 0;
  double death_ = 0;
};

struct Barcode {
  int homology_dim = 0;
  std::vector<Bar> bars;

  std::size_t size() const { return bars.size(); }
  // Count of bars with positive persistence.
  std::size_t positive_count() const;
  // Bars ordered by birth, then death.
  Barcode sorted() const;

  bool operator==(const Barcode&) const = default;
};

enum class EssentialPolicy { kTruncate, kDrop };

Filtration build_rips_filtration(const DistanceMatrix& dm, int max_dim, double max_scale);

Barcode compute_barcode(const Filtration& f, int homology_dim,
                        EssentialPolicy essential_policy = EssentialPolicy::kTruncate);

// Partial bijection between bar indices of two barcodes.
struct Matching {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<std::size_t> unmatched_first;
  std::vector<std::size_t> unmatched_second;
};

struct BottleneckResult {
  double distance = 0;
  Matching matching;
};

// L-infinity distance between two bars, and from a bar to the diagonal.
double bar_distance(const Bar& a, const Bar& b);
double diagonal_distance(const Bar& a);

BottleneckResult bottleneck_matching(const Barcode& b1, const Barcode& b2);
double bottleneck_distance(const Barcode& b1, const Barcode& b2);

// Exhaustive enumeration over partial bijections; refuses more than 8 bars in total.
double bottleneck_bruteforce(const Barcode& b1, const Barcode& b2);

}  // namespace tropitest::persistence
