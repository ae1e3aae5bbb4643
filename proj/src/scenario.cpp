#include "scenario.hpp"

#include <nlohmann/json.hpp>
#include <set>

namespace nullcollapse {

namespace {

using nlohmann::json;

// "lam" is the family parameter and may not be used by scenario documents.
constexpr const char* kReservedName = "lam";

[[noreturn]] void fail(const std::string& what, const std::string& path) {
  throw SchemaError(what, path);
}

std::vector<std::string> read_name_array(const json& j, std::size_t count,
                                         const std::string& path) {
  if (!j.is_array() || j.size() != count) {
    fail("expected an array of " + std::to_string(count) + " names", path);
  }
  std::vector<std::string> names;
  for (std::size_t i = 0; i < count; ++i) {
    const json& e = j[i];
    std::string epath = path + "/" + std::to_string(i);
    if (!e.is_string() || e.get<std::string>().empty()) {
      fail("expected a coordinate name", epath);
    }
    std::string name = e.get<std::string>();
    if (name == kReservedName) {
      fail("'lam' is reserved for the family parameter", epath);
    }
    names.push_back(std::move(name));
  }
  std::set<std::string> distinct(names.begin(), names.end());
  if (distinct.size() != names.size()) {
    fail("coordinate names must be distinct", path);
  }
  return names;
}

std::vector<std::optional<double>> read_periods(
    const json& doc, const std::vector<std::string>& coords,
    const std::string& path) {
  std::vector<std::optional<double>> periods(coords.size(), std::nullopt);
  if (!doc.contains("periods")) return periods;
  const json& j = doc.at("periods");
  if (!j.is_object()) fail("expected an object mapping name to period", path);
  for (auto it = j.begin(); it != j.end(); ++it) {
    auto pos = std::find(coords.begin(), coords.end(), it.key());
    if (pos == coords.end()) {
      fail("period for unknown coordinate '" + it.key() + "'", path);
    }
    std::string epath = path + "/" + it.key();
    if (it.value().is_null()) continue;
    if (!it.value().is_number()) fail("period must be a number or null", epath);
    double p = it.value().get<double>();
    if (!(p > 0.0)) fail("period must be positive", epath);
    periods[pos - coords.begin()] = p;
  }
  return periods;
}

Expr parse_component(const json& j, const std::set<std::string>& allowed,
                     const std::string& path) {
  if (!j.is_string()) fail("expected an expression string", path);
  Expr e;
  try {
    e = parse_expr(j.get<std::string>());
  } catch (const ParseError& pe) {
    fail(std::string("bad expression: ") + pe.what(), path);
  }
  for (const auto& v : free_variables(e)) {
    if (v == kReservedName) {
      fail("'lam' is reserved for the family parameter", path);
    }
    if (!allowed.count(v)) {
      fail("expression uses unknown variable '" + v + "'", path);
    }
  }
  return e;
}

}  // namespace

Scenario load_scenario(const json& doc, const std::string& name) {
  if (!doc.is_object()) fail("scenario must be a JSON object", "/");

  Scenario sc;
  sc.name = name;

  if (!doc.contains("coordinates")) fail("missing 'coordinates'", "/");
  auto coords = read_name_array(doc.at("coordinates"), 4, "/coordinates");
  std::set<std::string> coord_set(coords.begin(), coords.end());

  Chart chart;
  chart.coords = coords;
  chart.periods = read_periods(doc, coords, "/periods");

  if (!doc.contains("metric")) fail("missing 'metric'", "/metric");
  const json& m = doc.at("metric");
  if (!m.is_array() || m.size() != 4) {
    fail("metric must be a 4x4 array", "/metric");
  }
  std::vector<Expr> upper;
  for (std::size_t i = 0; i < 4; ++i) {
    const json& row = m[i];
    if (!row.is_array() || row.size() != 4) {
      fail("metric row must have 4 entries", "/metric/" + std::to_string(i));
    }
    for (std::size_t j = i; j < 4; ++j) {
      upper.push_back(parse_component(
          row[j], coord_set, "/metric/" + std::to_string(i) + "/" +
                                 std::to_string(j)));
    }
    // The lower triangle is mirrored; entries there must be null or repeat
    // the mirrored string exactly.
    for (std::size_t j = 0; j < i; ++j) {
      const json& e = row[j];
      std::string epath =
          "/metric/" + std::to_string(i) + "/" + std::to_string(j);
      if (e.is_null()) continue;
      if (!e.is_string() || e != m[j][i]) {
        fail("lower-triangle entry must be null or mirror the upper triangle",
             epath);
      }
    }
  }
  sc.metric =
      make_metric_spec(std::move(chart), std::move(upper),
                       SignatureTag::kLorentzian);

  if (!doc.contains("timelike")) fail("missing 'timelike'", "/timelike");
  const json& t = doc.at("timelike");
  if (!t.is_array() || t.size() != 4) {
    fail("timelike field must have 4 components", "/timelike");
  }
  for (std::size_t i = 0; i < 4; ++i) {
    sc.timelike.push_back(
        parse_component(t[i], coord_set, "/timelike/" + std::to_string(i)));
  }

  if (doc.contains("hypersurface") && !doc.at("hypersurface").is_null()) {
    const json& h = doc.at("hypersurface");
    if (!h.is_object()) fail("hypersurface must be an object", "/hypersurface");
    Embedding emb;
    if (!h.contains("chart")) {
      fail("missing 'chart'", "/hypersurface/chart");
    }
    auto scoords = read_name_array(h.at("chart"), 3, "/hypersurface/chart");
    emb.chart.coords = scoords;
    emb.chart.periods = read_periods(h, scoords, "/hypersurface/periods");
    std::set<std::string> surf_set(scoords.begin(), scoords.end());

    if (!h.contains("embedding")) {
      fail("missing 'embedding'", "/hypersurface/embedding");
    }
    const json& e = h.at("embedding");
    if (!e.is_array() || e.size() != 4) {
      fail("embedding must have 4 components", "/hypersurface/embedding");
    }
    for (std::size_t i = 0; i < 4; ++i) {
      emb.map.push_back(parse_component(
          e[i], surf_set, "/hypersurface/embedding/" + std::to_string(i)));
    }

    if (!h.contains("generator") || !h.at("generator").is_string()) {
      fail("missing 'generator'", "/hypersurface/generator");
    }
    auto gen = h.at("generator").get<std::string>();
    auto pos = std::find(scoords.begin(), scoords.end(), gen);
    if (pos == scoords.end()) {
      fail("generator must name a surface coordinate",
           "/hypersurface/generator");
    }
    emb.generator = pos - scoords.begin();
    sc.hypersurface = std::move(emb);
  }

  if (doc.contains("summary") && doc.at("summary").is_string()) {
    sc.summary = doc.at("summary").get<std::string>();
  }
  return sc;
}

Scenario load_scenario_text(const std::string& json_text,
                            const std::string& name) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("invalid JSON: ") + e.what(), "/");
  }
  return load_scenario(doc, name);
}

}  // namespace nullcollapse
