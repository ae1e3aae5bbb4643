// Scenario documents: a 4D spacetime metric, an embedded 3D hypersurface
// with a designated generator coordinate, and a timelike reference field.
// Catalog entries and user files share one JSON schema.
#pragma once

#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "chartgeom.hpp"
#include "expr.hpp"

namespace nullcollapse {

class SchemaError : public std::runtime_error {
 public:
  SchemaError(const std::string& what, std::string path)
      : std::runtime_error(what + " (at " + path + ")"), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct Embedding {
  Chart chart;             // three surface coordinates
  std::vector<Expr> map;   // spacetime coordinates as functions of the chart
  std::size_t generator;   // index of the generator coordinate
};

struct Scenario {
  std::string name;
  MetricSpec metric;  // 4D Lorentzian
  std::optional<Embedding> hypersurface;
  std::vector<Expr> timelike;  // four components, not yet normalized
  std::string summary;
};

Scenario load_scenario(const nlohmann::json& doc, const std::string& name);
Scenario load_scenario_text(const std::string& json_text,
                            const std::string& name);

// Built-in scenarios; the JSON documents double as schema examples.
std::vector<std::string> catalog_names();
bool catalog_has(const std::string& name);
const char* catalog_document(const std::string& name);  // throws on unknown
std::string catalog_summary(const std::string& name);
Scenario catalog_get(const std::string& name);

}  // namespace nullcollapse
