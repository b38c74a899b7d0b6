#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "rieszlab/experiment.hpp"

namespace rieszlab {

using json = nlohmann::json;

// 17 significant digits: enough to round-trip doubles, fixed for byte-stable
// output files
inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline uint64_t fnv1a(std::string_view s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : ncols_(header.size()) {
    for (size_t i = 0; i < header.size(); ++i) {
      if (i) body_ += ',';
      body_ += header[i];
    }
    body_ += '\n';
  }
  void row(const std::vector<std::string>& cells) {
    if (cells.size() != ncols_) throw std::logic_error("csv: column count mismatch");
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) body_ += ',';
      body_ += cells[i];
    }
    body_ += '\n';
  }
  const std::string& str() const { return body_; }

 private:
  size_t ncols_;
  std::string body_;
};

inline GaugeFunction gauge_from_json(const json& j, int d) {
  if (!j.is_object() || !j.contains("kind"))
    throw std::invalid_argument("gauge config: expected an object with a \"kind\" field");
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "power") return GaugeFunction::power(j.at("beta").get<double>(), d);
  if (kind == "table") {
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : j.at("points")) pts.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    return GaugeFunction::table(std::move(pts), d);
  }
  throw std::invalid_argument("gauge config: unknown kind \"" + kind + "\"");
}

// "power:2", "table:<path>"
inline GaugeFunction gauge_from_spec(const std::string& spec, int d) {
  auto colon = spec.find(':');
  std::string kind = spec.substr(0, colon);
  std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "power") return GaugeFunction::power(std::stod(arg), d);
  if (kind == "table") {
    std::ifstream in(arg);
    if (!in) throw std::invalid_argument("gauge spec: cannot read table file " + arg);
    json j = json::parse(in);
    return gauge_from_json(j.is_object() ? j : json{{"kind", "table"}, {"points", j}}, d);
  }
  throw std::invalid_argument("gauge spec: expected power:<beta> or table:<path>");
}

inline DiscreteMeasure atoms_from_json(const json& j) {
  const json& list = j.is_array() ? j : j.at("atoms");
  std::vector<std::vector<double>> pts;
  std::vector<double> ws;
  for (const auto& a : list) {
    pts.push_back(a.at("x").get<std::vector<double>>());
    ws.push_back(a.at("w").get<double>());
  }
  return DiscreteMeasure::from_points(pts, ws);
}

inline json atoms_to_json(const DiscreteMeasure& nu) {
  json list = json::array();
  for (size_t i = 0; i < nu.natoms(); ++i) {
    json a;
    a["x"] = std::vector<double>(nu.atom(i).begin(), nu.atom(i).end());
    a["w"] = nu.weight(i);
    list.push_back(a);
  }
  return list;
}

inline CantorMeasure cantor_from_json(const json& j) {
  CantorSpec spec;
  spec.d = j.at("d").get<int>();
  spec.ell = j.at("ell").get<std::vector<double>>();
  spec.lambda = j.value("lambda", 0.49);
  return build_cantor(spec, j.at("s").get<double>());
}

// measure file: atom list, {"kind":"atoms"...}, or {"kind":"cantor"...}
struct LoadedMeasure {
  std::optional<DiscreteMeasure> atoms;
  std::optional<CantorMeasure> cantor;
  std::string id;
  int dim() const { return atoms ? atoms->dim() : cantor->dim(); }
};

inline LoadedMeasure measure_from_json(const json& j) {
  LoadedMeasure m;
  if (j.is_array() || (j.is_object() && j.value("kind", "atoms") == std::string("atoms"))) {
    m.atoms = atoms_from_json(j);
    m.id = "atoms:" + std::to_string(m.atoms->natoms());
  } else if (j.is_object() && j.at("kind") == "cantor") {
    m.cantor = cantor_from_json(j);
    m.id = "cantor:n=" + std::to_string(m.cantor->levels());
  } else {
    throw std::invalid_argument("measure config: unknown kind");
  }
  return m;
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read file: " + path);
  return json::parse(in);
}

inline void write_text_file(const std::filesystem::path& path, const std::string& body,
                            bool force) {
  namespace fs = std::filesystem;
  if (fs::exists(path) && !force)
    throw std::invalid_argument("refusing to overwrite " + path.string() + " (pass --force)");
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << body;
  if (!out) throw std::runtime_error("failed to write " + path.string());
}

inline std::string run_hash(const json& config, uint64_t seed) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                (unsigned long long)fnv1a(config.dump() + "#" + std::to_string(seed)));
  return buf;
}

inline std::string manifest_body(const std::string& command, const json& config, uint64_t seed) {
  json m;
  m["command"] = command;
  m["config_hash"] = run_hash(config, seed);
  m["seed"] = seed;
  m["versions"] = {{"rieszlab", "0.1.0"}, {"format", 1}};
  return m.dump(2) + "\n";
}

}  // namespace rieszlab
