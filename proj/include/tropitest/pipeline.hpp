#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tropitest/error.hpp"
#include "tropitest/io.hpp"
#include "tropitest/persistence.hpp"
#include "tropitest/synthgeo.hpp"
#include "tropitest/tropical.hpp"
#include "tropitest/twosample.hpp"

namespace tropitest::pipeline {

using io::Json;
namespace fs = std::filesystem;

inline constexpr std::string_view kVersion = "0.1.0";

enum class InputKind { kPointClouds, kDistanceMatrices, kBarcodes };

std::string_view to_string(InputKind kind);
InputKind input_kind_from_string(std::string_view name);

std::string_view to_string(persistence::EssentialPolicy policy);
persistence::EssentialPolicy essential_policy_from_string(std::string_view name);

std::string_view to_string(tropical::MPolicy policy);
tropical::MPolicy m_policy_from_string(std::string_view name);

struct PersistenceOptions {
  int homology_dim = 1;
  std::optional<int> max_dim;        // default homology_dim + 1
  std::optional<double> max_scale;   // default: enclosing radius of each cloud
  persistence::EssentialPolicy essential_policy = persistence::EssentialPolicy::kTruncate;

  void validate() const;
};

struct EmbeddingOptions {
  tropical::MPolicy m_policy = tropical::MPolicy::kDataDriven;
  std::optional<std::uint64_t> m;  // overrides the policy
  bool clip = false;
  std::optional<std::size_t> n;    // default: pooled positive-bar count
};

struct TestOptions {
  double alpha = 0.05;
  std::size_t num_permutations = 999;
  std::uint64_t seed = 7;

  void validate() const;
};

// Error that carries the stage it came from but keeps the original class.
class StageError : public Error {
 public:
  StageError(std::string_view stage, const Error& cause)
      : Error(cause.error_class(), std::string(stage) + ": " + cause.what()) {}
};

struct PipelineConfig {
  // Paths exactly as written; relative ones resolve against base_dir.
  std::string a;
  std::string b;
  InputKind input_kind = InputKind::kPointClouds;
  PersistenceOptions persistence;
  EmbeddingOptions embedding;
  TestOptions test;
  std::string output;
  std::optional<std::string> embedding_dump_a;
  std::optional<std::string> embedding_dump_b;
  unsigned threads = 0;
  fs::path base_dir;  // not serialized

  fs::path resolve(const std::string& path) const;

  // Parameter checks plus existence of the input paths.
  void validate() const;

  // Unknown keys are rejected so typos do not pass silently.
  static PipelineConfig from_json(const Json& j, const fs::path& base_dir = {});
  static PipelineConfig load(const fs::path& path);
  Json to_json() const;
  std::string hash() const;
};

using Collection = std::variant<std::vector<synthgeo::PointCloud>,
                                std::vector<synthgeo::DistanceMatrix>,
                                std::vector<persistence::Barcode>>;

// `path` is a manifest file or a directory. A directory with a manifest.json
// uses it; otherwise its *.csv (or *.json for barcodes) files are taken in
// name order.
Collection load_collection(const fs::path& path, InputKind kind);

// Paths of a collection in load order with their labels.
std::vector<io::ManifestEntry> collection_entries(const fs::path& path, InputKind kind);

std::vector<persistence::Barcode> compute_barcodes(const Collection& collection,
                                                   const PersistenceOptions& options,
                                                   unsigned threads = 0);

struct Embedded {
  std::size_t n = 1;
  tropical::RegularizationParam m{1};
  std::vector<std::vector<tropical::SortedEmbedding>> collections;
  std::size_t clipped_bars = 0;
};

// One shared n and m over all collections, then the sorted embedding of each barcode.
Embedded embed_collections(const std::vector<std::vector<persistence::Barcode>>& collections,
                           const EmbeddingOptions& options, unsigned threads = 0);

struct CollectionSummary {
  std::size_t count = 0;
  std::size_t total_bars = 0;
  std::size_t max_positive_bars = 0;
  double max_persistence = 0;
  double mean_persistence = 0;
};

CollectionSummary summarize(const std::vector<persistence::Barcode>& barcodes);
Json summary_to_json(const CollectionSummary& s);

struct Report {
  twosample::TestResult result;
  std::size_t n = 1;
  std::uint64_t m = 1;
  std::size_t d = 2;
  CollectionSummary a;
  CollectionSummary b;
  Json config;
  std::string config_hash;
  std::optional<std::string> embedding_dump_a;
  std::optional<std::string> embedding_dump_b;
  std::size_t clipped_bars = 0;
};

Report run_pipeline(const PipelineConfig& config);

Json report_to_json(const Report& report);
void emit_report(const Report& report, const fs::path& path);

}  // namespace tropitest::pipeline
