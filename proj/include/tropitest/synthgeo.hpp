#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tropitest::synthgeo {

enum class ShapeKind { kCircle, kAnnulus, kFigureEight, kSphere, kTorus, kClusterBlob };

std::string_view to_string(ShapeKind kind);
ShapeKind shape_kind_from_string(std::string_view name);

// Parametric shape description. Length parameters by kind:
//   circle        radius
//   annulus       inner_radius, outer_radius
//   figure_eight  radius (of each of the two tangent lobes)
//   sphere        radius
//   torus         ring_radius, tube_radius
//   cluster_blob  spread (standard deviation of the isotropic blob)
struct ShapeSpec {
  ShapeKind kind = ShapeKind::kCircle;
  std::map<std::string, double> parameters;
  int ambient_dim = 2;

  // Throws ParameterError when a required parameter is missing, non-positive,
  // or the shape does not fit in ambient_dim.
  void validate() const;
  double parameter(const std::string& name) const;

  static ShapeSpec circle(double radius, int ambient_dim = 2);
  static ShapeSpec annulus(double inner_radius, double outer_radius, int ambient_dim = 2);
  static ShapeSpec figure_eight(double radius, int ambient_dim = 2);
  static ShapeSpec sphere(double radius, int ambient_dim = 3);
  static ShapeSpec torus(double ring_radius, double tube_radius, int ambient_dim = 3);
  static ShapeSpec cluster_blob(double spread, int ambient_dim = 2);
};

// Finite sample of a geometric object, stored row-major.
class PointCloud {
 public:
  PointCloud(std::size_t dim, std::vector<double> coords, std::optional<std::string> label = {});
  static PointCloud from_rows(const std::vector<std::vector<double>>& rows,
                              std::optional<std::string> label = {});

  std::size_t size() const { return coords_.size() / dim_; }
  std::size_t dim() const { return dim_; }
  std::span<const double> point(std::size_t i) const { return {coords_.data() + i * dim_, dim_}; }
  const std::vector<double>& coords() const { return coords_; }
  const std::optional<std::string>& label() const { return label_; }

  bool operator==(const PointCloud& other) const = default;

 private:
  std::size_t dim_;
  std::vector<double> coords_;
  std::optional<std::string> label_;
};

class DistanceMatrix {
 public:
  // Validates zero diagonal, symmetry, finiteness and nonnegativity; throws InputError.
  DistanceMatrix(std::size_t size, std::vector<double> entries);

  std::size_t size() const { return size_; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * size_ + j]; }
  const std::vector<double>& entries() const { return entries_; }

  // Checks the triangle inequality on `samples` random triples (all triples
  // when the matrix is small). Tolerance is relative to the largest entry.
  bool satisfies_triangle_inequality(std::size_t samples, std::uint64_t seed,
                                     double rel_tol = 1e-12) const;

  // Smallest over points of the largest distance to any other point.
  double enclosing_radius() const;

 private:
  std::size_t size_;
  std::vector<double> entries_;
};

PointCloud sample_shape(const ShapeSpec& spec, std::size_t count, double noise_sd,
                        std::uint64_t seed);

DistanceMatrix pairwise_distances(const PointCloud& pc);

}  // namespace tropitest::synthgeo
