// The one-parameter family g_lam(X,Y) = g(X,Y) + lam g(T,X) g(T,Y) built from
// a unit timelike reference field, its pullback h_lam to the hypersurface,
// the second fundamental form at positive lam, the pulled-back Ricci tensor
// through two independent routes (the ambient curvature plus quadratic
// second-fundamental-form terms, and directly from the 3D metric), volume
// and diameter estimates, and the lam -> 0 scan with fitted scaling
// exponents and a verdict.
//
// All lam > 0 objects use the Levi-Civita connection and curvature of g_lam;
// all lam = 0 diagnostics live in nullsurf and use g.
#pragma once

#include <memory>
#include <optional>

#include "nullsurf.hpp"

namespace nullcollapse {

struct TimelikeField {
  std::vector<Expr> comps;
  bool rescaled = false;
};

// Verifies g(T,T) < 0 on the sample points (error names the offending point)
// and divides by sqrt(-g(T,T)) symbolically unless T is already unit.
TimelikeField normalize_timelike(
    const MetricField& g, const std::vector<Expr>& timelike,
    const std::vector<std::array<double, 4>>& samples);

struct NormalData {
  double z = 0.0;  // g_lam(Z,Z)
  double u = 0.0;  // -g_lam(U,U)
  double gDD = 0.0;
  Vec4 U, D, unit_normal;
};

struct KFrameData {
  Vec4 X, Y, Zhat;
  Vec3 Xs, Ys, Zhats;
  Eigen::Matrix3d k;  // frame order (X, Y, Zhat)
  double z = 0.0, u = 0.0;
  double trace() const { return k(0, 0) + k(1, 1) + k(2, 2); }
};

class LambdaFamily {
 public:
  explicit LambdaFamily(const Scenario& scenario, int sample_grid = 5);

  const Horizon& horizon() const { return horizon_; }
  const MetricField& g_lambda() const { return *glam_; }
  const MetricField& h_lambda() const { return *hlam_; }
  const TimelikeField& unit_timelike() const { return unit_t_; }

  struct Workspace {
    Horizon::Workspace h;
    MetricField::Workspace m4, m3;
    std::vector<double> slots, out;
  };

  Vec4 timelike_at(const Vec4& x, Workspace& ws) const;
  NormalData normal_decomposition(double lam, const Vec3& s,
                                  Workspace& ws) const;
  KFrameData second_fundamental_form(double lam, const Vec3& s,
                                     Workspace& ws) const;
  Eigen::Matrix3d gauss_ricci(double lam, const Vec3& s, Workspace& ws) const;
  Eigen::Matrix3d intrinsic_ricci(double lam, const Vec3& s,
                                  Workspace& ws) const;

  double volume(double lam, int grid, int workers) const;
  double diameter(double lam, int grid, int workers) const;

 private:
  NormalData normal_from(const SmallMat& glam, const Horizon::EmbedData& emb,
                         const Vec4& t) const;

  Scenario scenario_;
  Horizon horizon_;
  TimelikeField unit_t_;
  Tape t4_tape_;  // unit timelike components at an ambient point
  std::unique_ptr<MetricField> glam_, hlam_;
};

struct HypothesisResult {
  double theta_sup = 0.0;
  double rzz_sup = 0.0;
  double rzx_sup = 0.0;
  bool pass() const {
    return theta_sup < 1e-8 && rzz_sup < 1e-8 && rzx_sup < 1e-8;
  }
};
HypothesisResult hypothesis_check(const Horizon& horizon, int grid,
                                  int workers);

struct FitResult {
  std::optional<double> exponent;  // absent when the data sits below the floor
  double residual = 0.0;           // rms residual of the log-log line
  bool below_floor = false;        // treated as bounded (exponent +inf)
};
// Ordinary least squares on (log lam, log q); values below 1e-12 are treated
// as exact zeros.
FitResult fit_loglog(std::span<const double> lams,
                     std::span<const double> values);

enum class Verdict {
  kCollapseBoundedDiameter,
  kUnboundedCurvature,
  kInconclusive,
};
const char* verdict_name(Verdict v);

Verdict decide_verdict(bool hypothesis_pass, const FitResult& curvature,
                       const FitResult& volume, double diameter_variation);

struct ScanConfig {
  double lambda_start = 0.1;
  double lambda_factor = 0.25;
  int lambda_count = 8;
  int grid = 24;
  int workers = 0;  // 0: NULLCOLLAPSE_WORKERS or hardware concurrency
};

struct ScanRow {
  double lam = 0.0;
  double sup_ricci = 0.0;       // orthonormal-frame components, direct route
  double volume = 0.0;
  double diameter = 0.0;
  double gauss_vs_direct = 0.0;
  double sup_tr_k = 0.0;
  double sup_k_pq = 0.0;
};

struct ScanReport {
  std::string scenario;
  ScanConfig config;
  HypothesisResult hypothesis;
  std::vector<ScanRow> rows;
  FitResult fit_sup_curvature, fit_volume, fit_tr_k, fit_k_pq;
  double diameter_variation = 0.0;
  bool truncated = false;
  Verdict verdict = Verdict::kInconclusive;
};

ScanReport scan(const Scenario& scenario, const ScanConfig& config);

}  // namespace nullcollapse
