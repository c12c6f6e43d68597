// tropitest command line: synth, ph, embed, test, pipeline.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tropitest/error.hpp"
#include "tropitest/io.hpp"
#include "tropitest/parallel.hpp"
#include "tropitest/pipeline.hpp"
#include "tropitest/synthgeo.hpp"
#include "tropitest/twosample.hpp"

namespace {

using namespace tropitest;
using io::Json;
namespace fs = std::filesystem;

int exit_code(ErrorClass c) {
  switch (c) {
    case ErrorClass::kUsage: return 1;
    case ErrorClass::kData: return 2;
    case ErrorClass::kInternal: return 3;
  }
  return 3;
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

void ensure_parent(const fs::path& file) {
  const auto dir = file.parent_path();
  if (!dir.empty() && !fs::is_directory(dir))
    throw IoError("output directory does not exist: " + dir.string());
}

std::string numbered(const std::string& stem, std::size_t i, const std::string& ext) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04zu", i);
  return stem + "_" + buf + ext;
}

void print_result(const twosample::TestResult& r) {
  std::cout << "statistic " << io::format_double(r.statistic) << "\n"
            << "critical_value " << io::format_double(r.critical_value) << "\n"
            << "p_value " << io::format_double(r.p_value) << "\n"
            << "reject " << (r.reject ? "true" : "false") << "\n";
}

struct SynthArgs {
  std::string spec;
  std::size_t count = 1;
  std::size_t points = 50;
  double noise = 0.05;
  std::uint64_t seed = 0;
  std::string out;
};

void run_synth(const SynthArgs& a) {
  Json j;
  try {
    j = io::read_json(a.spec);
  } catch (const IoError& e) {
    throw ConfigurationError(e.what());
  }
  const auto spec = io::shape_spec_from_json(j);
  if (a.points < 1) throw ParameterError("--points must be at least 1");
  if (!(a.noise >= 0)) throw ParameterError("--noise must be nonnegative");
  const fs::path dir(a.out);
  ensure_directory(dir);
  std::vector<synthgeo::PointCloud> clouds(a.count, synthgeo::PointCloud(1, {0.0}));
  parallel_for(a.count, [&](std::size_t i) {
    clouds[i] = synthgeo::sample_shape(spec, a.points, a.noise, a.seed + i);
  });
  std::vector<io::ManifestEntry> entries;
  for (std::size_t i = 0; i < a.count; ++i) {
    const std::string name = numbered("cloud", i, ".csv");
    io::write_point_cloud_csv(dir / name, clouds[i]);
    entries.push_back({name, std::string(synthgeo::to_string(spec.kind))});
  }
  io::write_manifest(dir / "manifest.json", "clouds", entries);
  std::cout << "wrote " << a.count << " clouds to " << dir.string() << "\n";
}

struct PhArgs {
  std::string in;
  std::string kind = "pointclouds";
  int dim = 1;
  std::optional<int> max_dim;
  std::string max_scale = "auto";
  std::string essential = "truncate";
  std::string out;
};

void run_ph(const PhArgs& a) {
  pipeline::PersistenceOptions opt;
  opt.homology_dim = a.dim;
  opt.max_dim = a.max_dim;
  if (a.max_scale != "auto") {
    try {
      std::size_t used = 0;
      opt.max_scale = std::stod(a.max_scale, &used);
      if (used != a.max_scale.size()) throw std::invalid_argument(a.max_scale);
    } catch (const std::exception&) {
      throw ParameterError("--max-scale must be a number or 'auto'");
    }
  }
  opt.essential_policy = pipeline::essential_policy_from_string(a.essential);
  opt.validate();
  const auto kind = pipeline::input_kind_from_string(a.kind);
  if (kind == pipeline::InputKind::kBarcodes)
    throw ParameterError("ph takes point clouds or distance matrices");

  const auto entries = pipeline::collection_entries(a.in, kind);
  const auto barcodes = pipeline::compute_barcodes(pipeline::load_collection(a.in, kind), opt);
  const fs::path dir(a.out);
  ensure_directory(dir);
  std::vector<io::ManifestEntry> out;
  for (std::size_t i = 0; i < barcodes.size(); ++i) {
    const std::string name = numbered("barcode", i, ".json");
    io::write_barcode(dir / name, barcodes[i]);
    out.push_back({name, entries[i].label});
  }
  io::write_manifest(dir / "manifest.json", "barcodes", out);
  std::cout << "wrote " << barcodes.size() << " barcodes to " << dir.string() << "\n";
}

struct EmbedArgs {
  std::vector<std::string> in;
  std::vector<std::string> out;
  std::string m_policy = "data_driven";
  std::optional<std::uint64_t> m;
  std::optional<std::size_t> n;
  bool clip = false;
};

void run_embed(const EmbedArgs& a) {
  if (a.in.size() != a.out.size())
    throw ParameterError("give one --out per --in (" + std::to_string(a.in.size()) + " inputs, " +
                         std::to_string(a.out.size()) + " outputs)");
  pipeline::EmbeddingOptions opt;
  opt.m_policy = pipeline::m_policy_from_string(a.m_policy);
  opt.m = a.m;
  opt.n = a.n;
  opt.clip = a.clip;
  if (opt.m && *opt.m < 1) throw ParameterError("--m must be at least 1");
  if (opt.n && *opt.n < 1) throw ParameterError("--n must be at least 1");
  for (const auto& o : a.out) ensure_parent(o);

  std::vector<std::vector<persistence::Barcode>> collections;
  for (const auto& p : a.in)
    collections.push_back(std::get<std::vector<persistence::Barcode>>(
        pipeline::load_collection(p, pipeline::InputKind::kBarcodes)));
  const auto emb = pipeline::embed_collections(collections, opt);
  const std::size_t d = tropical::embedding_dimension(emb.n);
  for (std::size_t c = 0; c < a.out.size(); ++c) {
    io::EmbeddingDump dump{emb.n, emb.m.value(), d, emb.collections[c]};
    io::write_text(a.out[c], io::dump_json(io::embedding_dump_to_json(dump)));
  }
  std::cout << "n " << emb.n << "\nm " << emb.m.value() << "\nd " << d << "\n";
  if (emb.clipped_bars) std::cout << "clipped_bars " << emb.clipped_bars << "\n";
}

struct TestArgs {
  std::string a;
  std::string b;
  double alpha = 0.05;
  std::size_t perms = 999;
  std::uint64_t seed = 7;
  std::string out;
};

void run_test(const TestArgs& t) {
  pipeline::TestOptions opt{t.alpha, t.perms, t.seed};
  try {
    opt.validate();
  } catch (const ConfigurationError& e) {
    throw ParameterError(e.what());
  }
  if (!t.out.empty()) ensure_parent(t.out);
  const auto da = io::embedding_dump_from_json(io::read_json(t.a));
  const auto db = io::embedding_dump_from_json(io::read_json(t.b));
  if (da.n != db.n || da.m != db.m)
    throw InputError("embedding dumps disagree on n or m (n " + std::to_string(da.n) + " vs " +
                     std::to_string(db.n) + ", m " + std::to_string(da.m) + " vs " +
                     std::to_string(db.m) + "); embed both collections in one call");
  const auto r = twosample::permutation_test(twosample::Sample::from_embeddings(da.vectors),
                                             twosample::Sample::from_embeddings(db.vectors),
                                             opt.alpha, opt.num_permutations, opt.seed);
  const Json report = {
      {"result", io::test_result_to_json(r)},
      {"provenance",
       {{"n", da.n}, {"m", da.m}, {"d", da.d}, {"version", std::string(pipeline::kVersion)}}}};
  if (!t.out.empty()) io::write_text(t.out, io::dump_json(report));
  print_result(r);
}

void run_pipeline_cmd(const std::string& config_path) {
  const auto config = pipeline::PipelineConfig::load(config_path);
  const auto report = pipeline::run_pipeline(config);
  std::cout << "n " << report.n << "\nm " << report.m << "\nd " << report.d << "\n";
  print_result(report.result);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-sample tests on persistence barcodes via sorted tropical coordinates"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(pipeline::kVersion));

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Sample point clouds from a shape spec");
  s->add_option("--spec", synth.spec, "ShapeSpec JSON file")->required();
  s->add_option("--count", synth.count, "Number of clouds")->required();
  s->add_option("--points", synth.points, "Points per cloud")->capture_default_str();
  s->add_option("--noise", synth.noise, "Gaussian noise standard deviation")->capture_default_str();
  s->add_option("--seed", synth.seed, "Cloud i uses seed + i")->capture_default_str();
  s->add_option("--out", synth.out, "Output directory")->required();

  PhArgs ph;
  auto* p = app.add_subcommand("ph", "Rips persistence barcodes for a collection");
  p->add_option("--in", ph.in, "Manifest or directory")->required();
  p->add_option("--kind", ph.kind, "pointclouds or distance_matrices")->capture_default_str();
  p->add_option("--dim", ph.dim, "Homology dimension")->capture_default_str();
  p->add_option("--max-dim", ph.max_dim, "Largest simplex dimension (default dim + 1)");
  p->add_option("--max-scale", ph.max_scale, "Filtration cutoff or 'auto'")->capture_default_str();
  p->add_option("--essential", ph.essential, "truncate or drop")->capture_default_str();
  p->add_option("--out", ph.out, "Output directory")->required();

  EmbedArgs embed;
  auto* e = app.add_subcommand("embed", "Sorted tropical embeddings with a shared n and m");
  e->add_option("--in", embed.in, "Barcode manifest or directory (repeatable)")->required();
  e->add_option("--out", embed.out, "Embedding dump per --in, in order")->required();
  e->add_option("--m-policy", embed.m_policy, "data_driven or universal")->capture_default_str();
  e->add_option("--m", embed.m, "Explicit regularization parameter");
  e->add_option("--n", embed.n, "Explicit bar capacity");
  e->add_flag("--clip", embed.clip, "Shrink births to m * persistence instead of failing");

  TestArgs test;
  auto* t = app.add_subcommand("test", "Energy-statistic permutation test on two dumps");
  t->add_option("--a", test.a, "Embedding dump of the first sample")->required();
  t->add_option("--b", test.b, "Embedding dump of the second sample")->required();
  t->add_option("--alpha", test.alpha, "Significance level")->capture_default_str();
  t->add_option("--perms", test.perms, "Permutation replicates")->capture_default_str();
  t->add_option("--seed", test.seed, "Random seed")->capture_default_str();
  t->add_option("--out", test.out, "Report JSON");

  std::string config_path;
  auto* pl = app.add_subcommand("pipeline", "Run every stage from a config file");
  pl->add_option("--config", config_path, "PipelineConfig JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (s->parsed()) run_synth(synth);
    else if (p->parsed()) run_ph(ph);
    else if (e->parsed()) run_embed(embed);
    else if (t->parsed()) run_test(test);
    else if (pl->parsed()) run_pipeline_cmd(config_path);
  } catch (const Error& err) {
    std::cerr << "tropitest: error: " << err.what() << "\n";
    return exit_code(err.error_class());
  } catch (const std::exception& err) {
    std::cerr << "tropitest: internal error: " << err.what() << "\n";
    return 3;
  }
  return 0;
}
