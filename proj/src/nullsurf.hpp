// The embedded hypersurface at family parameter zero: adapted frames, the
// expansion, the deformation tensor B(F,G) = g(∇_F Z, G), parallel transport
// along generators, and the evolution-equation residual traces.
//
// Generators need not be affinely parametrized: the coordinate generator Z
// satisfies ∇_Z Z = f Z with a smooth factor f. Residuals are evaluated in
// the affine gauge normalized at each sample point, which keeps every term
// O(1) along closed generators where a global affine scale would grow
// exponentially.
#pragma once

#include <Eigen/Dense>

#include "chartgeom.hpp"
#include "scenario.hpp"

namespace nullcollapse {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat43 = Eigen::Matrix<double, 4, 3>;

class Horizon {
 public:
  explicit Horizon(const Scenario& scenario);

  const Scenario& scenario() const { return scenario_; }
  const MetricField& ambient() const { return ambient_; }
  const Embedding& embedding() const { return *scenario_.hypersurface; }
  int generator() const { return static_cast<int>(embedding().generator); }

  struct Workspace {
    MetricField::Workspace metric;
    std::vector<double> slots, out;
  };

  struct EmbedData {
    Vec3 s;
    Vec4 x;
    Mat43 E;               // pushforward ∂x^a/∂s^i
    double d2[4][3][3];    // ∂²x^a/∂s^i∂s^j
  };
  EmbedData embed_at(const Vec3& s, Workspace& ws) const;

  struct SurfacePoint {
    EmbedData emb;
    MetricField::Connection conn;  // ambient metric and connection at x
    Vec4 T;                        // timelike reference (not normalized)
    Vec4 Z;                        // generator vector E_gen
    Vec4 X, Y;                     // orthonormal basis of the T-orthogonal
    Vec3 Xs, Ys;                   // plane in TH; surface components
    double f = 0.0;                // ∇_Z Z = f Z
    double geodesic_residual = 0.0;
  };
  SurfacePoint point_at(const Vec3& s, Workspace& ws) const;

  // B(F,G) = g(∇_F Z, G); the first argument is differentiated along the
  // surface, so it is passed in surface components.
  double b_tensor(const SurfacePoint& p, const Vec3& Fs, const Vec4& G) const;
  Eigen::Matrix2d b_plane(const SurfacePoint& p) const;  // on (X, Y)
  double expansion(const SurfacePoint& p) const;

  // grid points per surface coordinate over the periodic fundamental domain
  std::vector<Vec3> surface_grid(int grid) const;

  struct NullnessReport {
    bool is_null = false;
    bool generator_aligned = false;
    double max_abs_det = 0.0;
    double max_misalignment = 0.0;
    double min_transverse_eigenvalue = 0.0;
    std::string failure;  // empty when the check passed
    bool pass() const { return is_null && generator_aligned; }
  };
  NullnessReport nullness(int grid, int workers) const;

  struct GeneratorCurve {
    Vec3 start = Vec3::Zero();
    double range = 6.283185307179586;
    int steps = 400;
  };

  struct TransportResult {
    std::vector<double> s;
    std::vector<Vec4> v;
    double norm_drift = 0.0;
  };
  // Solves ∇_Z V = 0 along the generator through curve.start with classical
  // fourth-order Runge-Kutta steps.
  TransportResult transport(const Vec4& v0, const GeneratorCurve& curve) const;

  struct ResidualTrace {
    // Interior sample nodes only (centered differencing).
    std::vector<double> tau;        // affine parameter, unit scale at start
    std::vector<double> theta;      // expansion
    std::vector<double> dtheta;     // affine-gauge derivative of theta
    std::vector<double> ray;        // Raychaudhuri residual
    std::vector<double> bev;        // B-evolution residual for (F, G)
    std::vector<double> b_fg;       // B(F,G) samples
    double max_ray = 0.0;
    double max_bev = 0.0;
    double max_curvature_term = 0.0;  // sup |g(R(Z,F)Z,G)|
    double max_b_plane = 0.0;         // sup |B| on the transverse plane
  };
  // F0/G0 are surface components of the fields transported for the
  // B-evolution equation; they default to the plane vector X at the start.
  ResidualTrace residual_trace(const GeneratorCurve& curve,
                               const Vec3* F0 = nullptr,
                               const Vec3* G0 = nullptr) const;

  double raychaudhuri_residual(const GeneratorCurve& curve) const;
  double b_evolution_residual(const GeneratorCurve& curve, const Vec3& F0,
                              const Vec3& G0) const;

  // Surface components of a tangent vector given in ambient components.
  Vec3 surface_components(const EmbedData& emb, const Vec4& v) const;

 private:
  Scenario scenario_;
  MetricField ambient_;
  Tape embed_tape_;   // x, E, second derivatives
  Tape t_tape_;       // timelike field at an ambient point
  std::size_t embed_scratch_ = 0;
};

}  // namespace nullcollapse
