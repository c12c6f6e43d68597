#include "tropitest/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <type_traits>

#include "tropitest/parallel.hpp"

namespace tropitest::pipeline {

namespace {

template <class F>
auto in_stage(std::string_view stage, F&& body) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e);
  } catch (const std::exception& e) {
    throw StageError(stage, Error(ErrorClass::kInternal, e.what()));
  }
}

template <class T>
T config_field(const Json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigurationError(std::string("config field '") + key + "' has the wrong type");
  }
}

std::string collection_key(InputKind kind) {
  return kind == InputKind::kBarcodes ? "barcodes" : "clouds";
}

double auto_max_scale(const synthgeo::DistanceMatrix& dm) {
  const double r = dm.enclosing_radius();
  return r > 0 ? r : 1.0;
}

persistence::Barcode barcode_of(const synthgeo::DistanceMatrix& dm,
                                const PersistenceOptions& options) {
  const int max_dim = options.max_dim.value_or(options.homology_dim + 1);
  const double max_scale = options.max_scale.value_or(auto_max_scale(dm));
  const auto f = persistence::build_rips_filtration(dm, max_dim, max_scale);
  return persistence::compute_barcode(f, options.homology_dim, options.essential_policy);
}

}  // namespace

std::string_view to_string(InputKind kind) {
  switch (kind) {
    case InputKind::kPointClouds: return "pointclouds";
    case InputKind::kDistanceMatrices: return "distance_matrices";
    case InputKind::kBarcodes: return "barcodes";
  }
  return "pointclouds";
}

InputKind input_kind_from_string(std::string_view name) {
  if (name == "pointclouds") return InputKind::kPointClouds;
  if (name == "distance_matrices") return InputKind::kDistanceMatrices;
  if (name == "barcodes") return InputKind::kBarcodes;
  throw ConfigurationError("unknown input kind '" + std::string(name) +
                           "' (expected pointclouds, distance_matrices or barcodes)");
}

std::string_view to_string(persistence::EssentialPolicy policy) {
  return policy == persistence::EssentialPolicy::kDrop ? "drop" : "truncate";
}

persistence::EssentialPolicy essential_policy_from_string(std::string_view name) {
  if (name == "truncate") return persistence::EssentialPolicy::kTruncate;
  if (name == "drop") return persistence::EssentialPolicy::kDrop;
  throw ConfigurationError("unknown essential policy '" + std::string(name) +
                           "' (expected truncate or drop)");
}

std::string_view to_string(tropical::MPolicy policy) {
  return policy == tropical::MPolicy::kUniversal ? "universal" : "data_driven";
}

tropical::MPolicy m_policy_from_string(std::string_view name) {
  if (name == "data_driven") return tropical::MPolicy::kDataDriven;
  if (name == "universal") return tropical::MPolicy::kUniversal;
  throw ConfigurationError("unknown m policy '" + std::string(name) +
                           "' (expected data_driven or universal)");
}

void PersistenceOptions::validate() const {
  if (homology_dim < 0) throw ConfigurationError("homology_dim must be nonnegative");
  if (max_dim && *max_dim <= homology_dim)
    throw ConfigurationError("max_dim must exceed homology_dim");
  if (max_scale && !(std::isfinite(*max_scale) && *max_scale > 0))
    throw ConfigurationError("max_scale must be a positive finite number or \"auto\"");
}

void TestOptions::validate() const {
  if (!(alpha > 0 && alpha < 1)) throw ConfigurationError("alpha must lie in (0, 1)");
  if (num_permutations < 1) throw ConfigurationError("permutations must be at least 1");
}

fs::path PipelineConfig::resolve(const std::string& path) const {
  const fs::path p(path);
  return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
}

void PipelineConfig::validate() const {
  if (a.empty() || b.empty()) throw ConfigurationError("both collections a and b are required");
  for (const auto* p : {&a, &b})
    if (!fs::exists(resolve(*p)))
      throw ConfigurationError("input path does not exist: " + resolve(*p).string());
  persistence.validate();
  test.validate();
  if (embedding.m && *embedding.m < 1) throw ConfigurationError("m must be at least 1");
  if (embedding.n && *embedding.n < 1) throw ConfigurationError("n must be at least 1");
}

PipelineConfig PipelineConfig::from_json(const Json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigurationError("config must be a JSON object");
  static const std::set<std::string> known = {
      "a", "b", "input_kind", "homology_dim", "max_dim", "max_scale", "essential_policy",
      "m_policy", "m", "n", "clip", "alpha", "permutations", "seed", "output",
      "embedding_dump", "threads"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw ConfigurationError("unknown config field '" + it.key() + "'");

  PipelineConfig c;
  c.base_dir = base_dir;
  if (!j.contains("a") || !j.contains("b"))
    throw ConfigurationError("config needs input collections 'a' and 'b'");
  c.a = config_field<std::string>(j, "a");
  c.b = config_field<std::string>(j, "b");
  if (j.contains("input_kind"))
    c.input_kind = input_kind_from_string(config_field<std::string>(j, "input_kind"));
  if (j.contains("homology_dim")) c.persistence.homology_dim = config_field<int>(j, "homology_dim");
  if (j.contains("max_dim") && !j.at("max_dim").is_null())
    c.persistence.max_dim = config_field<int>(j, "max_dim");
  if (j.contains("max_scale") && !j.at("max_scale").is_null()) {
    const Json& v = j.at("max_scale");
    if (v.is_string()) {
      if (v.get<std::string>() != "auto")
        throw ConfigurationError("max_scale must be a number or \"auto\"");
    } else {
      c.persistence.max_scale = config_field<double>(j, "max_scale");
    }
  }
  if (j.contains("essential_policy"))
    c.persistence.essential_policy =
        essential_policy_from_string(config_field<std::string>(j, "essential_policy"));
  if (j.contains("m_policy"))
    c.embedding.m_policy = m_policy_from_string(config_field<std::string>(j, "m_policy"));
  if (j.contains("m") && !j.at("m").is_null()) c.embedding.m = config_field<std::uint64_t>(j, "m");
  if (j.contains("n") && !j.at("n").is_null()) c.embedding.n = config_field<std::size_t>(j, "n");
  if (j.contains("clip")) c.embedding.clip = config_field<bool>(j, "clip");
  if (j.contains("alpha")) c.test.alpha = config_field<double>(j, "alpha");
  if (j.contains("permutations"))
    c.test.num_permutations = config_field<std::size_t>(j, "permutations");
  if (j.contains("seed")) c.test.seed = config_field<std::uint64_t>(j, "seed");
  if (j.contains("output")) c.output = config_field<std::string>(j, "output");
  if (j.contains("embedding_dump") && !j.at("embedding_dump").is_null()) {
    const Json& d = j.at("embedding_dump");
    if (!d.is_object()) throw ConfigurationError("embedding_dump must be {\"a\": path, \"b\": path}");
    if (d.contains("a")) c.embedding_dump_a = config_field<std::string>(d, "a");
    if (d.contains("b")) c.embedding_dump_b = config_field<std::string>(d, "b");
  }
  if (j.contains("threads")) c.threads = config_field<unsigned>(j, "threads");
  return c;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
  Json j;
  try {
    j = io::read_json(path);
  } catch (const IoError& e) {
    throw ConfigurationError(e.what());
  } catch (const ParseError& e) {
    throw ConfigurationError(e.what());
  }
  return from_json(j, path.parent_path());
}

Json PipelineConfig::to_json() const {
  Json j = {{"a", a},
            {"b", b},
            {"input_kind", std::string(to_string(input_kind))},
            {"homology_dim", persistence.homology_dim},
            {"essential_policy", std::string(to_string(persistence.essential_policy))},
            {"m_policy", std::string(to_string(embedding.m_policy))},
            {"clip", embedding.clip},
            {"alpha", test.alpha},
            {"permutations", test.num_permutations},
            {"seed", test.seed},
            {"output", output},
            {"threads", threads}};
  j["max_dim"] = persistence.max_dim ? Json(*persistence.max_dim) : Json(nullptr);
  j["max_scale"] = persistence.max_scale ? Json(*persistence.max_scale) : Json("auto");
  j["m"] = embedding.m ? Json(*embedding.m) : Json(nullptr);
  j["n"] = embedding.n ? Json(*embedding.n) : Json(nullptr);
  if (embedding_dump_a || embedding_dump_b) {
    Json d = Json::object();
    if (embedding_dump_a) d["a"] = *embedding_dump_a;
    if (embedding_dump_b) d["b"] = *embedding_dump_b;
    j["embedding_dump"] = d;
  } else {
    j["embedding_dump"] = nullptr;
  }
  return j;
}

std::string PipelineConfig::hash() const {
  // threads only affects scheduling, never results.
  Json j = to_json();
  j.erase("threads");
  return io::fnv1a_hex(io::dump_json(j));
}

std::vector<io::ManifestEntry> collection_entries(const fs::path& path, InputKind kind) {
  const std::string key = collection_key(kind);
  std::vector<io::ManifestEntry> entries;
  if (fs::is_directory(path)) {
    const fs::path manifest = path / "manifest.json";
    if (fs::exists(manifest)) {
      entries = io::read_manifest(manifest, key);
    } else {
      const std::string ext = kind == InputKind::kBarcodes ? ".json" : ".csv";
      for (const auto& e : fs::directory_iterator(path))
        if (e.is_regular_file() && e.path().extension() == ext)
          entries.push_back({e.path(), e.path().stem().string()});
      std::sort(entries.begin(), entries.end(),
                [](const auto& x, const auto& y) { return x.path.filename() < y.path.filename(); });
    }
  } else if (fs::exists(path)) {
    entries = io::read_manifest(path, key);
  } else {
    throw IoError("no such manifest or directory: " + path.string());
  }
  if (entries.empty()) throw InputError("collection " + path.string() + " is empty");
  return entries;
}

Collection load_collection(const fs::path& path, InputKind kind) {
  const auto entries = collection_entries(path, kind);
  switch (kind) {
    case InputKind::kPointClouds: {
      std::vector<synthgeo::PointCloud> out;
      for (const auto& e : entries) {
        auto pc = io::read_point_cloud_csv(e.path);
        if (!e.label.empty()) pc = synthgeo::PointCloud(pc.dim(), pc.coords(), e.label);
        out.push_back(std::move(pc));
      }
      return out;
    }
    case InputKind::kDistanceMatrices: {
      std::vector<synthgeo::DistanceMatrix> out;
      for (const auto& e : entries) out.push_back(io::read_distance_matrix_csv(e.path));
      return out;
    }
    case InputKind::kBarcodes: {
      std::vector<persistence::Barcode> out;
      for (const auto& e : entries) out.push_back(io::read_barcode(e.path));
      return out;
    }
  }
  throw Error(ErrorClass::kInternal, "unhandled input kind");
}

std::vector<persistence::Barcode> compute_barcodes(const Collection& collection,
                                                   const PersistenceOptions& options,
                                                   unsigned threads) {
  options.validate();
  return std::visit(
      [&](const auto& items) -> std::vector<persistence::Barcode> {
        using T = typename std::decay_t<decltype(items)>::value_type;
        if constexpr (std::is_same_v<T, persistence::Barcode>) {
          return items;
        } else {
          std::vector<persistence::Barcode> out(items.size());
          parallel_for(
              items.size(),
              [&](std::size_t i) {
                if constexpr (std::is_same_v<T, synthgeo::PointCloud>)
                  out[i] = barcode_of(synthgeo::pairwise_distances(items[i]), options);
                else
                  out[i] = barcode_of(items[i], options);
              },
              threads);
          return out;
        }
      },
      collection);
}

Embedded embed_collections(const std::vector<std::vector<persistence::Barcode>>& collections,
                           const EmbeddingOptions& options, unsigned threads) {
  std::vector<persistence::Barcode> pooled;
  for (const auto& c : collections) pooled.insert(pooled.end(), c.begin(), c.end());
  if (pooled.empty()) throw InputError("nothing to embed");
  for (const auto& bc : pooled)
    if (bc.homology_dim != pooled.front().homology_dim)
      throw InputError("barcodes of different homology dimensions cannot share an embedding");

  Embedded out;
  const std::size_t needed = tropical::pooled_capacity(pooled);
  out.n = options.n.value_or(needed);
  if (out.n < needed)
    throw CapacityError("n = " + std::to_string(out.n) + " is below the pooled positive-bar count " +
                        std::to_string(needed));
  out.m = options.m ? tropical::RegularizationParam(*options.m)
                    : tropical::regularization_parameter(pooled, options.m_policy);

  // Regularization check before any embedding so the report names every offender.
  std::vector<std::vector<persistence::Barcode>> ready = collections;
  std::vector<std::string> offenders;
  std::uint64_t worst = 0;
  const double mm = static_cast<double>(out.m.value());
  for (std::size_t c = 0; c < ready.size(); ++c)
    for (std::size_t k = 0; k < ready[c].size(); ++k) {
      auto& bc = ready[c][k];
      if (tropical::check_regularized(bc, out.m)) continue;
      if (options.clip) {
        for (const auto& bar : bc.bars)
          if (bar.persistence() > 0 && bar.birth() > mm * bar.persistence()) ++out.clipped_bars;
        bc = tropical::clip_to_regularized(bc, out.m);
        continue;
      }
      worst = std::max(worst, tropical::required_m(bc));
      offenders.push_back("collection " + std::to_string(c) + " barcode " + std::to_string(k));
    }
  if (!offenders.empty()) {
    std::string list;
    for (std::size_t i = 0; i < offenders.size() && i < 5; ++i)
      list += (i ? ", " : "") + offenders[i];
    if (offenders.size() > 5) list += ", ...";
    throw RegularizationError(std::to_string(offenders.size()) +
                              " barcode(s) violate birth <= m * persistence for m = " +
                              std::to_string(out.m.value()) + " (" + list + "); they need m >= " +
                              std::to_string(worst) + ", or enable clip");
  }

  for (const auto& c : ready) {
    std::vector<tropical::SortedEmbedding> emb(c.size());
    parallel_for(
        c.size(),
        [&](std::size_t i) {
          emb[i] = tropical::sufficient_statistic(tropical::canonicalize(c[i], out.n), out.n, out.m);
        },
        threads);
    out.collections.push_back(std::move(emb));
  }
  return out;
}

CollectionSummary summarize(const std::vector<persistence::Barcode>& barcodes) {
  CollectionSummary s;
  s.count = barcodes.size();
  double total = 0;
  std::size_t positive = 0;
  for (const auto& bc : barcodes) {
    s.total_bars += bc.size();
    s.max_positive_bars = std::max(s.max_positive_bars, bc.positive_count());
    for (const auto& bar : bc.bars)
      if (bar.persistence() > 0) {
        total += bar.persistence();
        ++positive;
        s.max_persistence = std::max(s.max_persistence, bar.persistence());
      }
  }
  s.mean_persistence = positive ? total / static_cast<double>(positive) : 0.0;
  return s;
}

Json summary_to_json(const CollectionSummary& s) {
  return {{"count", s.count},
          {"total_bars", s.total_bars},
          {"max_positive_bars", s.max_positive_bars},
          {"max_persistence", s.max_persistence},
          {"mean_persistence", s.mean_persistence}};
}

Report run_pipeline(const PipelineConfig& config) {
  in_stage("config", [&] {
    config.validate();
    return 0;
  });

  const auto load = [&](const std::string& p) {
    return in_stage("load", [&] { return load_collection(config.resolve(p), config.input_kind); });
  };
  const Collection ca = load(config.a);
  const Collection cb = load(config.b);

  std::vector<std::vector<persistence::Barcode>> barcodes = in_stage("persistence", [&] {
    return std::vector<std::vector<persistence::Barcode>>{
        compute_barcodes(ca, config.persistence, config.threads),
        compute_barcodes(cb, config.persistence, config.threads)};
  });

  const Embedded emb = in_stage("embedding", [&] {
    return embed_collections(barcodes, config.embedding, config.threads);
  });

  Report r;
  r.n = emb.n;
  r.m = emb.m.value();
  r.d = tropical::embedding_dimension(emb.n);
  r.a = summarize(barcodes[0]);
  r.b = summarize(barcodes[1]);
  r.config = config.to_json();
  r.config_hash = config.hash();
  r.clipped_bars = emb.clipped_bars;
  r.embedding_dump_a = config.embedding_dump_a;
  r.embedding_dump_b = config.embedding_dump_b;

  in_stage("embedding dump", [&] {
    const std::optional<std::string>* targets[] = {&config.embedding_dump_a,
                                                   &config.embedding_dump_b};
    for (std::size_t c = 0; c < 2; ++c) {
      if (!*targets[c]) continue;
      io::EmbeddingDump dump{r.n, r.m, r.d, emb.collections[c]};
      io::write_text(config.resolve(**targets[c]), io::dump_json(io::embedding_dump_to_json(dump)));
    }
    return 0;
  });

  r.result = in_stage("test", [&] {
    const auto sa = twosample::Sample::from_embeddings(emb.collections[0]);
    const auto sb = twosample::Sample::from_embeddings(emb.collections[1]);
    return twosample::permutation_test(sa, sb, config.test.alpha, config.test.num_permutations,
                                       config.test.seed, config.threads);
  });

  if (!config.output.empty())
    in_stage("report", [&] {
      emit_report(r, config.resolve(config.output));
      return 0;
    });
  return r;
}

Json report_to_json(const Report& r) {
  Json provenance = {{"n", r.n},
                     {"m", r.m},
                     {"d", r.d},
                     {"version", std::string(kVersion)},
                     {"collections", {{"a", summary_to_json(r.a)}, {"b", summary_to_json(r.b)}}},
                     {"clipped_bars", r.clipped_bars},
                     {"config", r.config},
                     {"config_hash", r.config_hash}};
  Json j = {{"result", io::test_result_to_json(r.result)}, {"provenance", provenance}};
  if (r.embedding_dump_a || r.embedding_dump_b) {
    Json d = Json::object();
    if (r.embedding_dump_a) d["a"] = *r.embedding_dump_a;
    if (r.embedding_dump_b) d["b"] = *r.embedding_dump_b;
    j["embedding_dump"] = d;
  }
  return j;
}

void emit_report(const Report& report, const fs::path& path) {
  const fs::path dir = path.parent_path();
  if (!dir.empty() && !fs::is_directory(dir))
    throw IoError("output directory does not exist: " + dir.string());
  io::write_text(path, io::dump_json(report_to_json(report)));
}

}  // namespace tropitest::pipeline
