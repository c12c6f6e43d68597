#include "tropitest/synthgeo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "tropitest/error.hpp"

namespace tropitest::synthgeo {

namespace {

struct KindName {
  ShapeKind kind;
  std::string_view name;
  int intrinsic_dim;  // minimal ambient dimension that holds the shape
};

constexpr KindName kKinds[] = {
    {ShapeKind::kCircle, "circle", 2},         {ShapeKind::kAnnulus, "annulus", 2},
    {ShapeKind::kFigureEight, "figure_eight", 2}, {ShapeKind::kSphere, "sphere", 3},
    {ShapeKind::kTorus, "torus", 3},           {ShapeKind::kClusterBlob, "cluster_blob", 1},
};

const KindName& lookup(ShapeKind kind) {
  for (const auto& k : kKinds)
    if (k.kind == kind) return k;
  throw ParameterError("unknown shape kind");
}

std::vector<std::string> required_parameters(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::kCircle:
    case ShapeKind::kFigureEight:
    case ShapeKind::kSphere:
      return {"radius"};
    case ShapeKind::kAnnulus:
      return {"inner_radius", "outer_radius"};
    case ShapeKind::kTorus:
      return {"ring_radius", "tube_radius"};
    case ShapeKind::kClusterBlob:
      return {"spread"};
  }
  return {};
}

}  // namespace

std::string_view to_string(ShapeKind kind) { return lookup(kind).name; }

ShapeKind shape_kind_from_string(std::string_view name) {
  for (const auto& k : kKinds)
    if (k.name == name) return k.kind;
  throw ParameterError("unknown shape kind '" + std::string(name) + "'");
}

double ShapeSpec::parameter(const std::string& name) const {
  auto it = parameters.find(name);
  if (it == parameters.end())
    throw ParameterError(std::string(to_string(kind)) + ": missing parameter '" + name + "'");
  return it->second;
}

void ShapeSpec::validate() const {
  const auto& info = lookup(kind);
  if (ambient_dim < info.intrinsic_dim)
    throw ParameterError(std::string(info.name) + " needs ambient_dim >= " +
                         std::to_string(info.intrinsic_dim));
  for (const auto& name : required_parameters(kind)) {
    const double v = parameter(name);
    if (!(std::isfinite(v) && v > 0))
      throw ParameterError(std::string(info.name) + ": parameter '" + name +
                           "' must be strictly positive");
  }
  if (kind == ShapeKind::kAnnulus && !(parameter("inner_radius") < parameter("outer_radius")))
    throw ParameterError("annulus: inner_radius must be smaller than outer_radius");
  if (kind == ShapeKind::kTorus && !(parameter("tube_radius") < parameter("ring_radius")))
    throw ParameterError("torus: tube_radius must be smaller than ring_radius");
}

ShapeSpec ShapeSpec::circle(double radius, int ambient_dim) {
  return {ShapeKind::kCircle, {{"radius", radius}}, ambient_dim};
}
ShapeSpec ShapeSpec::annulus(double inner_radius, double outer_radius, int ambient_dim) {
  return {ShapeKind::kAnnulus,
          {{"inner_radius", inner_radius}, {"outer_radius", outer_radius}},
          ambient_dim};
}
ShapeSpec ShapeSpec::figure_eight(double radius, int ambient_dim) {
  return {ShapeKind::kFigureEight, {{"radius", radius}}, ambient_dim};
}
ShapeSpec ShapeSpec::sphere(double radius, int ambient_dim) {
  return {ShapeKind::kSphere, {{"radius", radius}}, ambient_dim};
}
ShapeSpec ShapeSpec::torus(double ring_radius, double tube_radius, int ambient_dim) {
  return {ShapeKind::kTorus,
          {{"ring_radius", ring_radius}, {"tube_radius", tube_radius}},
          ambient_dim};
}
ShapeSpec ShapeSpec::cluster_blob(double spread, int ambient_dim) {
  return {ShapeKind::kClusterBlob, {{"spread", spread}}, ambient_dim};
}

PointCloud::PointCloud(std::size_t dim, std::vector<double> coords,
                       std::optional<std::string> label)
    : dim_(dim), coords_(std::move(coords)), label_(std::move(label)) {
  if (dim_ == 0) throw InputError("point cloud dimension must be positive");
  if (coords_.empty()) throw InputError("point cloud must be nonempty");
  if (coords_.size() % dim_ != 0)
    throw InputError("point cloud coordinates are not a multiple of the dimension");
  for (double c : coords_)
    if (!std::isfinite(c)) throw InputError("point cloud has a non-finite coordinate");
}

PointCloud PointCloud::from_rows(const std::vector<std::vector<double>>& rows,
                                 std::optional<std::string> label) {
  if (rows.empty()) throw InputError("point cloud must be nonempty");
  const std::size_t dim = rows.front().size();
  std::vector<double> coords;
  coords.reserve(rows.size() * dim);
  for (const auto& row : rows) {
    if (row.size() != dim) throw InputError("point cloud rows differ in dimension");
    coords.insert(coords.end(), row.begin(), row.end());
  }
  return PointCloud(dim, std::move(coords), std::move(label));
}

DistanceMatrix::DistanceMatrix(std::size_t size, std::vector<double> entries)
    : size_(size), entries_(std::move(entries)) {
  if (size_ == 0) throw InputError("distance matrix must be nonempty");
  if (entries_.size() != size_ * size_)
    throw InputError("distance matrix entry count does not match its size");
  for (std::size_t i = 0; i < size_; ++i) {
    if ((*this)(i, i) != 0.0)
      throw InputError("distance matrix has a nonzero diagonal entry at " + std::to_string(i));
    for (std::size_t j = i + 1; j < size_; ++j) {
      const double a = (*this)(i, j);
      if (!std::isfinite(a) || a < 0)
        throw InputError("distance matrix entry (" + std::to_string(i) + "," +
                         std::to_string(j) + ") is negative or not finite");
      if (a != (*this)(j, i))
        throw InputError("distance matrix is not symmetric at (" + std::to_string(i) + "," +
                         std::to_string(j) + ")");
    }
  }
}

bool DistanceMatrix::satisfies_triangle_inequality(std::size_t samples, std::uint64_t seed,
                                                   double rel_tol) const {
  const double scale = *std::max_element(entries_.begin(), entries_.end());
  const double tol = rel_tol * std::max(scale, 1.0);
  auto ok = [&](std::size_t i, std::size_t j, std::size_t k) {
    return (*this)(i, k) <= (*this)(i, j) + (*this)(j, k) + tol;
  };
  if (size_ * size_ * size_ <= samples) {
    for (std::size_t i = 0; i < size_; ++i)
      for (std::size_t j = 0; j < size_; ++j)
        for (std::size_t k = 0; k < size_; ++k)
          if (!ok(i, j, k)) return false;
    return true;
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  for (std::size_t s = 0; s < samples; ++s)
    if (!ok(pick(rng), pick(rng), pick(rng))) return false;
  return true;
}

double DistanceMatrix::enclosing_radius() const {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < size_; ++i) {
    double far = 0;
    for (std::size_t j = 0; j < size_; ++j) far = std::max(far, (*this)(i, j));
    best = std::min(best, far);
  }
  return best;
}

PointCloud sample_shape(const ShapeSpec& spec, std::size_t count, double noise_sd,
                        std::uint64_t seed) {
  spec.validate();
  if (count == 0) throw ParameterError("sample count must be at least 1");
  if (!(noise_sd >= 0) || !std::isfinite(noise_sd))
    throw ParameterError("noise_sd must be a finite nonnegative number");

  constexpr double kTwoPi = 2 * std::numbers::pi;
  const auto dim = static_cast<std::size_t>(spec.ambient_dim);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<double> coords(count * dim, 0.0);
  for (std::size_t p = 0; p < count; ++p) {
    double* x = coords.data() + p * dim;
    switch (spec.kind) {
      case ShapeKind::kCircle: {
        const double r = spec.parameter("radius");
        const double t = kTwoPi * unit(rng);
        x[0] = r * std::cos(t);
        x[1] = r * std::sin(t);
        break;
      }
      case ShapeKind::kAnnulus: {
        // Uniform in area: r^2 is uniform between the squared radii.
        const double a = spec.parameter("inner_radius");
        const double b = spec.parameter("outer_radius");
        const double r = std::sqrt(a * a + (b * b - a * a) * unit(rng));
        const double t = kTwoPi * unit(rng);
        x[0] = r * std::cos(t);
        x[1] = r * std::sin(t);
        break;
      }
      case ShapeKind::kFigureEight: {
        // Two tangent circles centred at (-r, 0) and (r, 0); equal arc length.
        const double r = spec.parameter("radius");
        const double side = unit(rng) < 0.5 ? -1.0 : 1.0;
        const double t = kTwoPi * unit(rng);
        x[0] = side * r + r * std::cos(t);
        x[1] = r * std::sin(t);
        break;
      }
      case ShapeKind::kSphere: {
        const double r = spec.parameter("radius");
        double g[3];
        double norm = 0;
        do {
          for (double& v : g) v = gauss(rng);
          norm = std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
        } while (norm < 1e-12);
        for (int k = 0; k < 3; ++k) x[k] = r * g[k] / norm;
        break;
      }
      case ShapeKind::kTorus: {
        // Surface element is proportional to (R + r cos(theta)); reject to correct it.
        const double big = spec.parameter("ring_radius");
        const double small = spec.parameter("tube_radius");
        double theta = 0;
        while (true) {
          theta = kTwoPi * unit(rng);
          if (unit(rng) * (big + small) <= big + small * std::cos(theta)) break;
        }
        const double phi = kTwoPi * unit(rng);
        const double ring = big + small * std::cos(theta);
        x[0] = ring * std::cos(phi);
        x[1] = ring * std::sin(phi);
        x[2] = small * std::sin(theta);
        break;
      }
      case ShapeKind::kClusterBlob: {
        const double s = spec.parameter("spread");
        for (std::size_t k = 0; k < dim; ++k) x[k] = s * gauss(rng);
        break;
      }
    }
    if (noise_sd > 0)
      for (std::size_t k = 0; k < dim; ++k) x[k] += noise_sd * gauss(rng);
  }
  return PointCloud(dim, std::move(coords), std::string(to_string(spec.kind)));
}

DistanceMatrix pairwise_distances(const PointCloud& pc) {
  const std::size_t n = pc.size();
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = pc.point(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto b = pc.point(j);
      double s = 0;
      for (std::size_t k = 0; k < a.size(); ++k) {
        const double diff = a[k] - b[k];
        s += diff * diff;
      }
      d[i * n + j] = d[j * n + i] = std::sqrt(s);
    }
  }
  return DistanceMatrix(n, std::move(d));
}

}  // namespace tropitest::synthgeo
