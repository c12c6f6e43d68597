#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "tropitest/persistence.hpp"
#include "tropitest/synthgeo.hpp"
#include "tropitest/tropical.hpp"
#include "tropitest/twosample.hpp"

namespace tropitest::io {

using Json = nlohmann::json;
namespace fs = std::filesystem;

// 17 significant digits; parses back to the same double.
std::string format_double(double value);

// Deterministic serialization: keys sorted, fixed float format, 2-space indent.
std::string dump_json(const Json& value);

Json read_json(const fs::path& path);
void write_text(const fs::path& path, const std::string& text);

// FNV-1a 64-bit, rendered as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

// Point cloud CSV: one point per row, comma-separated coordinates, no header.
synthgeo::PointCloud read_point_cloud_csv(const fs::path& path);
void write_point_cloud_csv(const fs::path& path, const synthgeo::PointCloud& pc);

// Square matrix CSV, same conventions as point clouds.
synthgeo::DistanceMatrix read_distance_matrix_csv(const fs::path& path);

synthgeo::ShapeSpec shape_spec_from_json(const Json& j);
Json shape_spec_to_json(const synthgeo::ShapeSpec& spec);

// {"dim": k, "bars": [[birth, death], ...]} ordered by birth, then death.
Json barcode_to_json(const persistence::Barcode& barcode);
persistence::Barcode barcode_from_json(const Json& j);
persistence::Barcode read_barcode(const fs::path& path);
void write_barcode(const fs::path& path, const persistence::Barcode& barcode);

struct ManifestEntry {
  fs::path path;  // resolved against the manifest directory when read
  std::string label;
};

// Manifest: {"<key>": [{"path": str, "label": str}, ...]}; key is "clouds"
// for point clouds and distance matrices, "barcodes" for barcode files.
std::vector<ManifestEntry> read_manifest(const fs::path& path, const std::string& key);
void write_manifest(const fs::path& path, const std::string& key,
                    const std::vector<ManifestEntry>& entries);

struct EmbeddingDump {
  std::size_t n = 1;
  std::uint64_t m = 1;
  std::size_t d = 2;
  std::vector<tropical::SortedEmbedding> vectors;
};

// {"n": int, "m": int, "d": int, "vectors": [[...], ...]}.
Json embedding_dump_to_json(const EmbeddingDump& dump);
EmbeddingDump embedding_dump_from_json(const Json& j);

// {"statistic", "critical_value", "p_value", "alpha", "permutations", "reject", "seed"}.
Json test_result_to_json(const twosample::TestResult& result);

}  // namespace tropitest::io
