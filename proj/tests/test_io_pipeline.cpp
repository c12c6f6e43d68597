#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "tropitest/error.hpp"
#include "tropitest/io.hpp"
#include "tropitest/parallel.hpp"
#include "tropitest/pipeline.hpp"

using namespace tropitest;
using io::Json;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("tropitest_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

persistence::Barcode bp(std::initializer_list<std::pair<double, double>> bars) {
  persistence::Barcode bc;
  bc.homology_dim = 1;
  for (auto [b, l] : bars) bc.bars.push_back(persistence::Bar::from_birth_persistence(b, l));
  return bc;
}

void write_barcodes(const fs::path& dir, const std::vector<persistence::Barcode>& bcs) {
  fs::create_directories(dir);
  std::vector<io::ManifestEntry> entries;
  for (std::size_t i = 0; i < bcs.size(); ++i) {
    const std::string name = "b" + std::to_string(i) + ".json";
    io::write_barcode(dir / name, bcs[i]);
    entries.push_back({name, "toy"});
  }
  io::write_manifest(dir / "manifest.json", "barcodes", entries);
}

void write_clouds(const fs::path& dir, const synthgeo::ShapeSpec& spec, std::size_t count,
                  std::uint64_t seed) {
  fs::create_directories(dir);
  std::vector<io::ManifestEntry> entries;
  for (std::size_t i = 0; i < count; ++i) {
    const std::string name = "c" + std::to_string(i) + ".csv";
    io::write_point_cloud_csv(dir / name, synthgeo::sample_shape(spec, 40, 0.05, seed + i));
    entries.push_back({name, "shape"});
  }
  io::write_manifest(dir / "manifest.json", "clouds", entries);
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(TROPITEST_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Format, DoublesRoundTrip) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 10000; ++i) {
    const double x = i % 3 == 0 ? u(rng) : std::ldexp(u(rng), static_cast<int>(rng() % 200) - 100);
    EXPECT_EQ(std::stod(io::format_double(x)), x);
  }
  EXPECT_EQ(io::format_double(0.5), "0.5");
  EXPECT_EQ(io::format_double(3.0), "3");
}

TEST(Format, DumpIsSortedAndStable) {
  Json j = {{"zeta", 1}, {"alpha", {{"b", 0.1}, {"a", Json::array({1.5, 2, true})}}}, {"mid", "x"}};
  const std::string text = io::dump_json(j);
  EXPECT_EQ(text,
            "{\n"
            "  \"alpha\": {\n"
            "    \"a\": [1.5, 2, true],\n"
            "    \"b\": 0.10000000000000001\n"
            "  },\n"
            "  \"mid\": \"x\",\n"
            "  \"zeta\": 1\n"
            "}\n");
  EXPECT_EQ(Json::parse(text), j);
}

TEST(Csv, PointCloudRoundTrip) {
  TempDir tmp;
  const auto pc = synthgeo::sample_shape(synthgeo::ShapeSpec::torus(2, 0.5), 30, 0.1, 3);
  io::write_point_cloud_csv(tmp / "p.csv", pc);
  const auto back = io::read_point_cloud_csv(tmp / "p.csv");
  EXPECT_EQ(back.coords(), pc.coords());
  EXPECT_EQ(back.dim(), 3u);
}

TEST(Csv, NonNumericFieldNamesTheRow) {
  TempDir tmp;
  spit(tmp / "bad.csv", "1,2\n3,4\n5,abc\n");
  try {
    io::read_point_cloud_csv(tmp / "bad.csv");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.csv:3"), std::string::npos) << e.what();
  }
  spit(tmp / "ragged.csv", "1,2\n3\n");
  EXPECT_THROW(io::read_point_cloud_csv(tmp / "ragged.csv"), ParseError);
  spit(tmp / "empty.csv", "\n");
  EXPECT_THROW(io::read_point_cloud_csv(tmp / "empty.csv"), ParseError);
  EXPECT_THROW(io::read_point_cloud_csv(tmp / "missing.csv"), IoError);
}

TEST(Csv, DistanceMatrix) {
  TempDir tmp;
  spit(tmp / "dm.csv", "0,1,2\n1,0,1.5\n2,1.5,0\n");
  const auto dm = io::read_distance_matrix_csv(tmp / "dm.csv");
  EXPECT_EQ(dm(1, 2), 1.5);
  spit(tmp / "wide.csv", "0,1\n1,0\n2,2\n");
  EXPECT_THROW(io::read_distance_matrix_csv(tmp / "wide.csv"), ParseError);
  spit(tmp / "asym.csv", "0,1\n2,0\n");
  EXPECT_THROW(io::read_distance_matrix_csv(tmp / "asym.csv"), InputError);
}

TEST(Barcodes, JsonRoundTrip) {
  TempDir tmp;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 3);
  for (int trial = 0; trial < 50; ++trial) {
    persistence::Barcode bc;
    bc.homology_dim = trial % 3;
    for (int k = 0; k < trial % 7; ++k) {
      const double b = u(rng);
      bc.bars.push_back(persistence::Bar::from_birth_death(b, b + u(rng)));
    }
    io::write_barcode(tmp / "bc.json", bc);
    EXPECT_EQ(io::read_barcode(tmp / "bc.json"), bc.sorted());
  }
  spit(tmp / "bad.json", R"({"dim": 1, "bars": [[2, 1]]})");
  EXPECT_THROW(io::read_barcode(tmp / "bad.json"), ParseError);
  spit(tmp / "bad2.json", R"({"bars": []})");
  EXPECT_THROW(io::read_barcode(tmp / "bad2.json"), ParseError);
}

TEST(Barcodes, Shapes) {
  const auto spec = synthgeo::ShapeSpec::annulus(1, 2);
  EXPECT_EQ(io::shape_spec_from_json(io::shape_spec_to_json(spec)).parameters, spec.parameters);
  EXPECT_THROW(io::shape_spec_from_json(Json{{"kind", "cube"}, {"parameters", Json::object()}}),
               ParameterError);
}

TEST(EmbeddingDump, RoundTripAndValidation) {
  io::EmbeddingDump dump{2, 3, 5, {{{1, 2, 4, 5, 7}}, {{4, 4, 8, 8, 8}}}};
  const auto back = io::embedding_dump_from_json(io::embedding_dump_to_json(dump));
  EXPECT_EQ(back.vectors, dump.vectors);
  EXPECT_EQ(back.m, 3u);
  auto j = io::embedding_dump_to_json(dump);
  j["d"] = 6;
  EXPECT_THROW(io::embedding_dump_from_json(j), ParseError);
  j = io::embedding_dump_to_json(dump);
  j["vectors"][0] = Json::array({2, 1, 0, 0, 0});
  EXPECT_THROW(io::embedding_dump_from_json(j), ParseError);
}

TEST(LoadCollection, ManifestOrderAndLabels) {
  TempDir tmp;
  std::vector<synthgeo::PointCloud> clouds;
  std::vector<io::ManifestEntry> entries;
  for (int i = 0; i < 3; ++i) {
    clouds.push_back(synthgeo::sample_shape(synthgeo::ShapeSpec::circle(1 + i), 10, 0, i));
    const std::string name = "z" + std::to_string(2 - i) + ".csv";
    io::write_point_cloud_csv(tmp / name, clouds.back());
    entries.push_back({name, "shape" + std::to_string(i)});
  }
  io::write_manifest(tmp / "list.json", "clouds", entries);
  const auto got = std::get<std::vector<synthgeo::PointCloud>>(
      pipeline::load_collection(tmp / "list.json", pipeline::InputKind::kPointClouds));
  ASSERT_EQ(got.size(), 3u);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(got[i].coords(), clouds[i].coords());
    EXPECT_EQ(got[i].label(), "shape" + std::to_string(i));
  }
  // Directory without a manifest: file-name order.
  fs::remove(tmp / "list.json");
  const auto by_name = std::get<std::vector<synthgeo::PointCloud>>(
      pipeline::load_collection(tmp.path(), pipeline::InputKind::kPointClouds));
  EXPECT_EQ(by_name[0].coords(), clouds[2].coords());
}

TEST(LoadCollection, Errors) {
  TempDir tmp;
  EXPECT_THROW(pipeline::load_collection(tmp / "nope", pipeline::InputKind::kBarcodes), IoError);
  EXPECT_THROW(pipeline::load_collection(tmp.path(), pipeline::InputKind::kBarcodes), InputError);
  spit(tmp / "m.json", R"({"clouds": [{"label": "x"}]})");
  EXPECT_THROW(pipeline::load_collection(tmp / "m.json", pipeline::InputKind::kPointClouds),
               ParseError);
  spit(tmp / "m2.json", R"({"barcodes": []})");
  EXPECT_THROW(pipeline::load_collection(tmp / "m2.json", pipeline::InputKind::kPointClouds),
               ParseError);
}

TEST(Config, RoundTripAndValidation) {
  TempDir tmp;
  fs::create_directories(tmp / "a");
  fs::create_directories(tmp / "b");
  const Json j = {{"a", "a"},          {"b", "b"},        {"input_kind", "barcodes"},
                  {"homology_dim", 0}, {"max_scale", 2.5}, {"m_policy", "universal"},
                  {"clip", true},      {"alpha", 0.1},     {"permutations", 199},
                  {"seed", 3}};
  const auto c = pipeline::PipelineConfig::from_json(j, tmp.path());
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.input_kind, pipeline::InputKind::kBarcodes);
  EXPECT_EQ(c.persistence.max_scale, 2.5);
  EXPECT_EQ(c.test.num_permutations, 199u);
  const auto again = pipeline::PipelineConfig::from_json(c.to_json(), tmp.path());
  EXPECT_EQ(again.to_json(), c.to_json());
  EXPECT_EQ(again.hash(), c.hash());

  auto bad = j;
  bad["alpah"] = 0.1;
  EXPECT_THROW(pipeline::PipelineConfig::from_json(bad), ConfigurationError);
  bad = j;
  bad["alpha"] = 1.5;
  EXPECT_THROW(pipeline::PipelineConfig::from_json(bad, tmp.path()).validate(), ConfigurationError);
  bad = j;
  bad["homology_dim"] = -1;
  EXPECT_THROW(pipeline::PipelineConfig::from_json(bad, tmp.path()).validate(), ConfigurationError);
  bad = j;
  bad["a"] = "missing";
  EXPECT_THROW(pipeline::PipelineConfig::from_json(bad, tmp.path()).validate(), ConfigurationError);
  bad = j;
  bad["seed"] = "seven";
  EXPECT_THROW(pipeline::PipelineConfig::from_json(bad), ConfigurationError);
}

TEST(Pipeline, IdenticalCollections) {
  TempDir tmp;
  write_clouds(tmp / "a", synthgeo::ShapeSpec::circle(1), 6, 10);
  pipeline::PipelineConfig c;
  c.a = c.b = (tmp / "a").string();
  c.test.num_permutations = 199;
  const auto r = pipeline::run_pipeline(c);
  EXPECT_EQ(r.result.statistic, 0.0);
  EXPECT_FALSE(r.result.reject);
  EXPECT_EQ(r.result.p_value, 1.0);
}

TEST(Pipeline, PaperExampleDump) {
  TempDir tmp;
  write_barcodes(tmp / "a", {bp({{2, 1}, {3, 1}})});
  write_barcodes(tmp / "b", {bp({{4, 4}})});
  const Json j = {{"a", "a"},
                  {"b", "b"},
                  {"input_kind", "barcodes"},
                  {"permutations", 10},
                  {"embedding_dump", {{"a", "ea.json"}, {"b", "eb.json"}}},
                  {"output", "report.json"}};
  spit(tmp / "cfg.json", io::dump_json(j));
  const auto r = pipeline::run_pipeline(pipeline::PipelineConfig::load(tmp / "cfg.json"));
  EXPECT_EQ(r.n, 2u);
  EXPECT_EQ(r.m, 3u);
  EXPECT_EQ(r.d, 5u);
  const auto da = io::embedding_dump_from_json(io::read_json(tmp / "ea.json"));
  const auto db = io::embedding_dump_from_json(io::read_json(tmp / "eb.json"));
  EXPECT_EQ(da.vectors.at(0).values, (std::vector<double>{1, 2, 4, 5, 7}));
  EXPECT_EQ(db.vectors.at(0).values, (std::vector<double>{4, 4, 8, 8, 8}));
  EXPECT_TRUE(fs::exists(tmp / "report.json"));
  const auto report = io::read_json(tmp / "report.json");
  EXPECT_EQ(report["embedding_dump"]["a"], "ea.json");
  EXPECT_EQ(report["provenance"]["d"], 5);
}

TEST(Pipeline, PooledCapacityRule) {
  TempDir tmp;
  write_barcodes(tmp / "a", {bp({{0, 1}}), bp({{1, 2}, {0, 1}, {2, 0}})});
  write_barcodes(tmp / "b", {bp({{0, 1}, {1, 1}, {2, 1}}), bp({})});
  pipeline::PipelineConfig c;
  c.a = (tmp / "a").string();
  c.b = (tmp / "b").string();
  c.input_kind = pipeline::InputKind::kBarcodes;
  c.embedding_dump_a = (tmp / "ea.json").string();
  c.test.num_permutations = 50;
  const auto r = pipeline::run_pipeline(c);
  EXPECT_EQ(r.n, 3u);
  EXPECT_EQ(r.d, 9u);
  for (const auto& v : io::embedding_dump_from_json(io::read_json(tmp / "ea.json")).vectors)
    EXPECT_EQ(v.values.size(), 9u);

  c.embedding.n = 2;
  try {
    pipeline::run_pipeline(c);
    FAIL() << "expected a capacity error";
  } catch (const Error& e) {
    EXPECT_EQ(e.error_class(), ErrorClass::kData);
    EXPECT_EQ(std::string(e.what()).rfind("embedding:", 0), 0u) << e.what();
  }
}

TEST(Pipeline, UniversalPolicyNeedsClip) {
  TempDir tmp;
  write_barcodes(tmp / "a", {bp({{500, 1}}), bp({{1, 1}})});
  write_barcodes(tmp / "b", {bp({{2, 1}})});
  pipeline::PipelineConfig c;
  c.a = (tmp / "a").string();
  c.b = (tmp / "b").string();
  c.input_kind = pipeline::InputKind::kBarcodes;
  c.embedding.m_policy = tropical::MPolicy::kUniversal;
  c.test.num_permutations = 10;
  try {
    pipeline::run_pipeline(c);
    FAIL() << "expected a regularization error";
  } catch (const Error& e) {
    const std::string msg = e.what();
    EXPECT_EQ(e.error_class(), ErrorClass::kData);
    EXPECT_NE(msg.find("embedding:"), std::string::npos) << msg;
    EXPECT_NE(msg.find("m >= 500"), std::string::npos) << msg;
  }
  c.embedding.clip = true;
  const auto r = pipeline::run_pipeline(c);
  EXPECT_EQ(r.m, 100u);
  EXPECT_EQ(r.clipped_bars, 1u);
}

TEST(Pipeline, ReportsAreByteIdentical) {
  TempDir tmp;
  write_clouds(tmp / "a", synthgeo::ShapeSpec::circle(1), 5, 100);
  write_clouds(tmp / "b", synthgeo::ShapeSpec::figure_eight(1), 5, 200);
  const Json j = {{"a", "a"}, {"b", "b"}, {"permutations", 99}, {"output", "r1.json"}};
  spit(tmp / "cfg.json", io::dump_json(j));
  const auto config = pipeline::PipelineConfig::load(tmp / "cfg.json");
  const auto report = pipeline::run_pipeline(config);
  pipeline::emit_report(pipeline::run_pipeline(config), tmp / "r2.json");
  EXPECT_EQ(slurp(tmp / "r1.json"), slurp(tmp / "r2.json"));
  const auto parsed = io::read_json(tmp / "r1.json");
  EXPECT_EQ(parsed["provenance"]["config_hash"], config.hash());
  EXPECT_EQ(parsed["provenance"]["version"], "0.1.0");
  EXPECT_EQ(parsed["provenance"]["config"], config.to_json());
}

TEST(Pipeline, EmitReportMissingDirectory) {
  TempDir tmp;
  const pipeline::Report r;
  try {
    pipeline::emit_report(r, tmp / "no" / "such" / "report.json");
    FAIL() << "expected an I/O error";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("no/such"), std::string::npos) << e.what();
  }
}

TEST(Threads, EnvironmentCap) {
  ::setenv("TROPITEST_THREADS", "1", 1);
  EXPECT_EQ(default_threads(), 1u);
  ::setenv("TROPITEST_THREADS", "junk", 1);
  EXPECT_GE(default_threads(), 1u);
  ::unsetenv("TROPITEST_THREADS");
  std::vector<int> hits(100, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; }, 4);
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(10, [](std::size_t i) { if (i == 7) throw InputError("x"); }, 2),
               InputError);
}

TEST(Cli, StagesMatchPipeline) {
  TempDir tmp;
  const std::string d = tmp.path().string();
  spit(tmp / "circle.json", io::dump_json(io::shape_spec_to_json(synthgeo::ShapeSpec::circle(1))));
  spit(tmp / "eight.json",
       io::dump_json(io::shape_spec_to_json(synthgeo::ShapeSpec::figure_eight(1))));
  ASSERT_EQ(run_cli("synth --spec " + d + "/circle.json --count 6 --points 30 --seed 1 --out " + d +
                    "/ca"),
            0);
  ASSERT_EQ(run_cli("synth --spec " + d + "/eight.json --count 5 --points 30 --seed 50 --out " + d +
                    "/cb"),
            0);
  ASSERT_EQ(run_cli("ph --in " + d + "/ca/manifest.json --dim 1 --max-scale auto --out " + d + "/ba"),
            0);
  ASSERT_EQ(run_cli("ph --in " + d + "/cb --dim 1 --out " + d + "/bb"), 0);
  ASSERT_EQ(run_cli("embed --in " + d + "/ba --in " + d + "/bb --m-policy data_driven --out " + d +
                    "/ea.json --out " + d + "/eb.json"),
            0);
  ASSERT_EQ(run_cli("test --a " + d + "/ea.json --b " + d +
                    "/eb.json --alpha 0.05 --perms 299 --seed 11 --out " + d + "/staged.json"),
            0);

  const Json cfg = {{"a", "ca"},          {"b", "cb"},
                    {"permutations", 299}, {"seed", 11},
                    {"output", "full.json"}, {"embedding_dump", {{"a", "pa.json"}, {"b", "pb.json"}}}};
  spit(tmp / "cfg.json", io::dump_json(cfg));
  ASSERT_EQ(run_cli("pipeline --config " + d + "/cfg.json"), 0);

  const auto staged = io::read_json(tmp / "staged.json");
  const auto full = io::read_json(tmp / "full.json");
  EXPECT_EQ(staged["result"], full["result"]);
  EXPECT_EQ(slurp(tmp / "ea.json"), slurp(tmp / "pa.json"));
  EXPECT_EQ(slurp(tmp / "eb.json"), slurp(tmp / "pb.json"));
}

TEST(Cli, ExitCodes) {
  TempDir tmp;
  const std::string d = tmp.path().string();
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_EQ(run_cli(""), 1);
  EXPECT_EQ(run_cli("frobnicate"), 1);
  EXPECT_EQ(run_cli("test --a x.json"), 1);
  EXPECT_EQ(run_cli("test --a " + d + "/none.json --b " + d + "/none.json"), 2);
  EXPECT_EQ(run_cli("pipeline --config " + d + "/none.json"), 1);

  spit(tmp / "alpha.json", R"({"a": ".", "b": ".", "alpha": 2})");
  EXPECT_EQ(run_cli("pipeline --config " + d + "/alpha.json"), 1);

  fs::create_directories(tmp / "bad");
  spit(tmp / "bad" / "c.csv", "1,2\nx,3\n");
  EXPECT_EQ(run_cli("ph --in " + d + "/bad --out " + d + "/out"), 2);
  EXPECT_EQ(run_cli("ph --in " + d + "/bad --dim 1 --max-dim 1 --out " + d + "/out"), 1);

  // Universal m without clip on a barcode that needs m >= 500.
  write_barcodes(tmp / "reg", {bp({{500, 1}})});
  EXPECT_EQ(run_cli("embed --in " + d + "/reg --m-policy universal --out " + d + "/e.json"), 2);
  EXPECT_EQ(run_cli("embed --in " + d + "/reg --m-policy universal --clip --out " + d + "/e.json"),
            0);
  EXPECT_EQ(run_cli("embed --in " + d + "/reg --out " + d + "/e.json --out " + d + "/f.json"), 1);
}
