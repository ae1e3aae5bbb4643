// Built-in scenarios with known analytic behavior. Each entry is stored as a
// JSON document in the same schema accepted for user scenarios, so they also
// serve as worked examples of the input format.
#include <nlohmann/json.hpp>

#include "scenario.hpp"

namespace nullcollapse {

namespace {

struct CatalogEntry {
  const char* name;
  const char* summary;
  const char* doc;
};

// A closed generator circle over a flat torus cross-section. The horizon
// t = 0 is null with closed non-affine generators; the pulled-back family is
// (lam/4) dpsi^2 + dx^2 + dy^2, so curvature stays zero, the diameter
// settles at the flat two-torus value and the volume scales like sqrt(lam).
constexpr const char* kMisner = R"json({
  "coordinates": ["t", "psi", "x", "y"],
  "metric": [
    ["0", "1", "0", "0"],
    [null, "t", "0", "0"],
    [null, null, "1", "0"],
    [null, null, null, "1"]
  ],
  "periods": {"t": null, "psi": 6.283185307179586, "x": 6.283185307179586, "y": 6.283185307179586},
  "hypersurface": {
    "chart": ["psi", "x", "y"],
    "periods": {"psi": 6.283185307179586, "x": 6.283185307179586, "y": 6.283185307179586},
    "embedding": ["0", "psi", "x", "y"],
    "generator": "psi"
  },
  "timelike": ["-(1+t)/2", "1", "0", "0"],
  "summary": "flat compact horizon at t=0; expansion-free, vacuum; expected verdict COLLAPSE_BOUNDED_DIAMETER"
})json";

// Plane-fronted wave with curvature concentrated along the wave direction.
// The horizon u = 0 has zero expansion and the mixed Ricci terms vanish on it
// even though the ambient Ricci tensor is nonzero, so the curved-ambient
// cancellations are exercised for real.
constexpr const char* kPpwave = R"json({
  "coordinates": ["u", "v", "x", "y"],
  "metric": [
    ["sin(x)*sin(y)", "1", "0", "0"],
    [null, "0", "0", "0"],
    [null, null, "1", "0"],
    [null, null, null, "1"]
  ],
  "periods": {"u": null, "v": 6.283185307179586, "x": 6.283185307179586, "y": 6.283185307179586},
  "hypersurface": {
    "chart": ["v", "x", "y"],
    "periods": {"v": 6.283185307179586, "x": 6.283185307179586, "y": 6.283185307179586},
    "embedding": ["0", "v", "x", "y"],
    "generator": "v"
  },
  "timelike": ["1", "-(1+sin(x)*sin(y))/2", "0", "0"],
  "summary": "curved ambient wave, horizon u=0 still expansion-free; expected verdict COLLAPSE_BOUNDED_DIAMETER"
})json";

// Same horizon as misner-t3 but with a psi-dependent conformal factor on the
// cross-section, which makes the expansion nonzero (theta = 0.6 at psi = 0).
// The pulled-back curvature then blows up like 1/lam.
constexpr const char* kExpanding = R"json({
  "coordinates": ["t", "psi", "x", "y"],
  "metric": [
    ["0", "1", "0", "0"],
    [null, "t", "0", "0"],
    [null, null, "(1+0.3*sin(psi))^2", "0"],
    [null, null, null, "(1+0.3*sin(psi))^2"]
  ],
  "periods": {"t": null, "psi": 6.283185307179586, "x": 6.283185307179586, "y": 6.283185307179586},
  "hypersurface": {
    "chart": ["psi", "x", "y"],
    "periods": {"psi": 6.283185307179586, "x": 6.283185307179586, "y": 6.283185307179586},
    "embedding": ["0", "psi", "x", "y"],
    "generator": "psi"
  },
  "timelike": ["-(1+t)/2", "1", "0", "0"],
  "summary": "negative control with nonzero expansion; expected verdict UNBOUNDED_CURVATURE"
})json";

constexpr const char* kMinkowski = R"json({
  "coordinates": ["t", "x", "y", "z"],
  "metric": [
    ["-1", "0", "0", "0"],
    [null, "1", "0", "0"],
    [null, null, "1", "0"],
    [null, null, null, "1"]
  ],
  "periods": {"t": null, "x": null, "y": null, "z": null},
  "timelike": ["1", "0", "0", "0"],
  "summary": "flat reference spacetime without a hypersurface; for unit checks only"
})json";

constexpr CatalogEntry kCatalog[] = {
    {"misner-t3",
     "flat T^3 horizon, vacuum, expansion-free -> COLLAPSE_BOUNDED_DIAMETER",
     kMisner},
    {"ppwave-t3",
     "pp-wave with curved ambient metric, expansion-free horizon -> "
     "COLLAPSE_BOUNDED_DIAMETER",
     kPpwave},
    {"expanding-t3",
     "expanding cross-section, theta != 0 -> UNBOUNDED_CURVATURE",
     kExpanding},
    {"minkowski", "flat spacetime, no hypersurface; unit-test reference",
     kMinkowski},
};

const CatalogEntry* find(const std::string& name) {
  for (const auto& e : kCatalog) {
    if (name == e.name) return &e;
  }
  return nullptr;
}

}  // namespace

std::vector<std::string> catalog_names() {
  std::vector<std::string> names;
  for (const auto& e : kCatalog) names.emplace_back(e.name);
  return names;
}

bool catalog_has(const std::string& name) { return find(name) != nullptr; }

const char* catalog_document(const std::string& name) {
  const CatalogEntry* e = find(name);
  if (!e) throw SchemaError("unknown catalog scenario '" + name + "'", "/");
  return e->doc;
}

std::string catalog_summary(const std::string& name) {
  const CatalogEntry* e = find(name);
  if (!e) throw SchemaError("unknown catalog scenario '" + name + "'", "/");
  return e->summary;
}

Scenario catalog_get(const std::string& name) {
  return load_scenario_text(catalog_document(name), name);
}

}  // namespace nullcollapse
