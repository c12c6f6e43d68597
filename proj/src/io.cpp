#include "tropitest/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <cstdint>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "tropitest/error.hpp"

namespace tropitest::io {

namespace {

void write_value(const Json& v, std::string& out, int indent) {
  const std::string pad(indent + 2, ' ');
  switch (v.type()) {
    case Json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad + Json(it.key()).dump() + ": ";
        write_value(it.value(), out, indent + 2);
      }
      out += "\n" + std::string(indent, ' ') + "}";
      return;
    }
    case Json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      const bool flat = std::all_of(v.begin(), v.end(), [](const Json& e) {
        return e.is_number() || e.is_boolean() || e.is_null();
      });
      if (flat) {
        out += "[";
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (i) out += ", ";
          write_value(v[i], out, indent);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        write_value(v[i], out, indent + 2);
      }
      out += "\n" + std::string(indent, ' ') + "]";
      return;
    }
    case Json::value_t::number_float:
      out += format_double(v.get<double>());
      return;
    default:
      out += v.dump();
  }
}

std::vector<std::vector<double>> read_numeric_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      const auto b = field.find_first_not_of(" \t");
      const auto e = field.find_last_not_of(" \t");
      const std::string trimmed = b == std::string::npos ? "" : field.substr(b, e - b + 1);
      double value = 0;
      const char* first = trimmed.data();
      const char* last = first + trimmed.size();
      if (!trimmed.empty() && *first == '+') ++first;
      auto [ptr, ec] = std::from_chars(first, last, value);
      if (trimmed.empty() || ec != std::errc() || ptr != last || !std::isfinite(value))
        throw ParseError(path.string() + ":" + std::to_string(line_no) +
                         ": non-numeric field '" + trimmed + "'");
      row.push_back(value);
    }
    if (!line.empty() && line.back() == ',')
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": trailing comma");
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(rows.front().size()) + " fields, found " +
                       std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(path.string() + ": no rows");
  return rows;
}

template <class T>
T required(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key))
    throw ParseError(where + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(where + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace

std::string format_double(double value) { return fmt::format("{:.17g}", value); }

std::string dump_json(const Json& value) {
  std::string out;
  write_value(value, out, 0);
  out += "\n";
  return out;
}

Json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": invalid JSON (" + e.what() + ")");
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

synthgeo::PointCloud read_point_cloud_csv(const fs::path& path) {
  return synthgeo::PointCloud::from_rows(read_numeric_csv(path), path.stem().string());
}

void write_point_cloud_csv(const fs::path& path, const synthgeo::PointCloud& pc) {
  std::string text;
  for (std::size_t i = 0; i < pc.size(); ++i) {
    const auto p = pc.point(i);
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (k) text += ",";
      text += format_double(p[k]);
    }
    text += "\n";
  }
  write_text(path, text);
}

synthgeo::DistanceMatrix read_distance_matrix_csv(const fs::path& path) {
  const auto rows = read_numeric_csv(path);
  const std::size_t n = rows.size();
  std::vector<double> entries;
  entries.reserve(n * n);
  for (const auto& row : rows) {
    if (row.size() != n)
      throw ParseError(path.string() + ": distance matrix is not square");
    entries.insert(entries.end(), row.begin(), row.end());
  }
  try {
    return synthgeo::DistanceMatrix(n, std::move(entries));
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

synthgeo::ShapeSpec shape_spec_from_json(const Json& j) {
  const std::string where = "shape spec";
  synthgeo::ShapeSpec spec;
  spec.kind = synthgeo::shape_kind_from_string(required<std::string>(j, "kind", where));
  spec.parameters = required<std::map<std::string, double>>(j, "parameters", where);
  spec.ambient_dim = j.value("ambient_dim", spec.kind == synthgeo::ShapeKind::kSphere ||
                                                    spec.kind == synthgeo::ShapeKind::kTorus
                                                ? 3
                                                : 2);
  spec.validate();
  return spec;
}

Json shape_spec_to_json(const synthgeo::ShapeSpec& spec) {
  Json params = Json::object();
  for (const auto& [k, v] : spec.parameters) params[k] = v;
  return {{"kind", std::string(synthgeo::to_string(spec.kind))},
          {"parameters", params},
          {"ambient_dim", spec.ambient_dim}};
}

Json barcode_to_json(const persistence::Barcode& barcode) {
  Json bars = Json::array();
  for (const auto& b : barcode.sorted().bars) bars.push_back(Json::array({b.birth(), b.death()}));
  return {{"dim", barcode.homology_dim}, {"bars", bars}};
}

persistence::Barcode barcode_from_json(const Json& j) {
  const std::string where = "barcode";
  persistence::Barcode out;
  out.homology_dim = required<int>(j, "dim", where);
  if (out.homology_dim < 0) throw ParseError("barcode: negative dim");
  const auto bars = required<std::vector<std::vector<double>>>(j, "bars", where);
  for (std::size_t i = 0; i < bars.size(); ++i) {
    if (bars[i].size() != 2)
      throw ParseError("barcode: bar " + std::to_string(i) + " is not a [birth, death] pair");
    try {
      out.bars.push_back(persistence::Bar::from_birth_death(bars[i][0], bars[i][1]));
    } catch (const InputError& e) {
      throw ParseError("barcode: bar " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

persistence::Barcode read_barcode(const fs::path& path) {
  try {
    return barcode_from_json(read_json(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_barcode(const fs::path& path, const persistence::Barcode& barcode) {
  write_text(path, dump_json(barcode_to_json(barcode)));
}

std::vector<ManifestEntry> read_manifest(const fs::path& path, const std::string& key) {
  const Json j = read_json(path);
  const std::string where = path.string();
  if (!j.is_object() || !j.contains(key) || !j.at(key).is_array())
    throw ParseError(where + ": manifest needs an array field '" + key + "'");
  std::vector<ManifestEntry> out;
  const fs::path base = path.parent_path();
  for (std::size_t i = 0; i < j.at(key).size(); ++i) {
    const Json& e = j.at(key)[i];
    const std::string item = where + ": entry " + std::to_string(i);
    ManifestEntry entry;
    entry.path = base / required<std::string>(e, "path", item);
    entry.label = e.is_object() && e.contains("label") && e.at("label").is_string()
                      ? e.at("label").get<std::string>()
                      : std::string();
    out.push_back(std::move(entry));
  }
  return out;
}

void write_manifest(const fs::path& path, const std::string& key,
                    const std::vector<ManifestEntry>& entries) {
  Json list = Json::array();
  for (const auto& e : entries)
    list.push_back({{"path", e.path.generic_string()}, {"label", e.label}});
  write_text(path, dump_json(Json{{key, list}}));
}

Json embedding_dump_to_json(const EmbeddingDump& dump) {
  Json vectors = Json::array();
  for (const auto& v : dump.vectors) vectors.push_back(v.values);
  return {{"n", dump.n}, {"m", dump.m}, {"d", dump.d}, {"vectors", vectors}};
}

EmbeddingDump embedding_dump_from_json(const Json& j) {
  const std::string where = "embedding dump";
  EmbeddingDump dump;
  dump.n = required<std::size_t>(j, "n", where);
  dump.m = required<std::uint64_t>(j, "m", where);
  dump.d = required<std::size_t>(j, "d", where);
  if (dump.d != tropical::embedding_dimension(dump.n))
    throw ParseError(where + ": d = " + std::to_string(dump.d) + " does not match n = " +
                     std::to_string(dump.n));
  for (auto& row : required<std::vector<std::vector<double>>>(j, "vectors", where)) {
    if (row.size() != dump.d) throw ParseError(where + ": vector of the wrong length");
    if (!std::is_sorted(row.begin(), row.end()))
      throw ParseError(where + ": vector is not nondecreasing");
    dump.vectors.push_back({std::move(row)});
  }
  return dump;
}

Json test_result_to_json(const twosample::TestResult& r) {
  return {{"statistic", r.statistic},  {"critical_value", r.critical_value},
          {"p_value", r.p_value},      {"alpha", r.alpha},
          {"permutations", r.num_permutations}, {"reject", r.reject},
          {"seed", r.seed}};
}

}  // namespace tropitest::io
