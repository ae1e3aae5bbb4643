#include "report.hpp"

#include <cstdio>
#include <nlohmann/json.hpp>

namespace nullcollapse {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json fit_json(const FitResult& f) {
  json j;
  j["below_floor"] = f.below_floor;
  if (f.exponent) {
    j["exponent"] = *f.exponent;
    j["fit_residual"] = f.residual;
  } else {
    j["exponent"] = nullptr;
    j["bounded"] = true;
  }
  return j;
}

json hypothesis_json(const HypothesisResult& h) {
  return json{{"pass", h.pass()},
              {"theta_sup", h.theta_sup},
              {"rZZ_sup", h.rzz_sup},
              {"rZX_sup", h.rzx_sup}};
}

}  // namespace

std::string to_json(const CheckReport& report) {
  json j;
  j["scenario"] = report.scenario;
  j["grid"] = report.grid;
  j["nullness"] = json{
      {"pass", report.nullness.pass()},
      {"is_null", report.nullness.is_null},
      {"generator_aligned", report.nullness.generator_aligned},
      {"max_abs_det", report.nullness.max_abs_det},
      {"max_misalignment", report.nullness.max_misalignment},
  };
  if (!report.nullness.failure.empty()) {
    j["nullness"]["failure"] = report.nullness.failure;
  }
  if (report.hypothesis_evaluated) {
    j["hypothesis"] = hypothesis_json(report.hypothesis);
  } else {
    j["hypothesis"] = nullptr;
  }
  j["pass"] = report.pass();
  return j.dump(2) + "\n";
}

std::string to_json(const ScanReport& report) {
  json j;
  j["scenario"] = report.scenario;
  j["config"] = json{{"lambda_start", report.config.lambda_start},
                     {"lambda_factor", report.config.lambda_factor},
                     {"lambda_count", report.config.lambda_count},
                     {"grid", report.config.grid}};
  j["hypothesis"] = hypothesis_json(report.hypothesis);
  json rows = json::array();
  for (const ScanRow& r : report.rows) {
    rows.push_back(json{{"lam", r.lam},
                        {"sup_ricci", r.sup_ricci},
                        {"volume", r.volume},
                        {"diameter", r.diameter},
                        {"gauss_vs_direct", r.gauss_vs_direct},
                        {"sup_tr_k", r.sup_tr_k},
                        {"sup_k_pq", r.sup_k_pq}});
  }
  j["rows"] = rows;
  j["fits"] = json{{"sup_curvature", fit_json(report.fit_sup_curvature)},
                   {"volume", fit_json(report.fit_volume)},
                   {"tr_k", fit_json(report.fit_tr_k)},
                   {"k_pq", fit_json(report.fit_k_pq)}};
  j["diameter_variation"] = report.diameter_variation;
  j["truncated"] = report.truncated;
  j["verdict"] = verdict_name(report.verdict);
  return j.dump(2) + "\n";
}

std::string to_json(const ResidualReport& report) {
  json j;
  j["scenario"] = report.scenario;
  j["steps"] = report.steps;
  j["rows"] = report.rows.size();
  j["max_ray_residual"] = report.max_ray;
  j["max_bev_residual"] = report.max_bev;
  return j.dump(2) + "\n";
}

std::string to_csv(const ScanReport& report) {
  std::string out =
      "lam,sup_ricci,volume,diameter,gauss_vs_direct,theta_res,rZZ_res,"
      "rZX_res\n";
  for (const ScanRow& r : report.rows) {
    out += fmt(r.lam) + "," + fmt(r.sup_ricci) + "," + fmt(r.volume) + "," +
           fmt(r.diameter) + "," + fmt(r.gauss_vs_direct) + "," +
           fmt(report.hypothesis.theta_sup) + "," +
           fmt(report.hypothesis.rzz_sup) + "," +
           fmt(report.hypothesis.rzx_sup) + "\n";
  }
  return out;
}

std::string to_csv(const ResidualReport& report) {
  std::string out = "s,theta,dtheta_ds,ray_residual,bev_residual\n";
  for (const auto& r : report.rows) {
    out += fmt(r.s) + "," + fmt(r.theta) + "," + fmt(r.dtheta_ds) + "," +
           fmt(r.ray_residual) + "," + fmt(r.bev_residual) + "\n";
  }
  return out;
}

}  // namespace nullcollapse
