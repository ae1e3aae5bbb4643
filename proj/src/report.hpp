// Report payloads and their CSV/JSON serializations. Output is deterministic
// for identical inputs.
#pragma once

#include <string>

#include "collapse.hpp"

namespace nullcollapse {

struct CheckReport {
  std::string scenario;
  int grid = 24;
  Horizon::NullnessReport nullness;
  bool hypothesis_evaluated = false;
  HypothesisResult hypothesis;
  bool pass() const {
    return nullness.pass() && hypothesis_evaluated && hypothesis.pass();
  }
};

struct ResidualReport {
  std::string scenario;
  int steps = 400;
  struct Row {
    double s, theta, dtheta_ds, ray_residual, bev_residual;
  };
  std::vector<Row> rows;
  double max_ray = 0.0;
  double max_bev = 0.0;
};

std::string to_json(const CheckReport& report);
std::string to_json(const ScanReport& report);
std::string to_json(const ResidualReport& report);

// Columns: lam,sup_ricci,volume,diameter,gauss_vs_direct,theta_res,rZZ_res,rZX_res
std::string to_csv(const ScanReport& report);
// Columns: s,theta,dtheta_ds,ray_residual,bev_residual
std::string to_csv(const ResidualReport& report);

}  // namespace nullcollapse
