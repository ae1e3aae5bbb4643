// Curvature of a chart-based pseudo-Riemannian metric in dimension 3 or 4.
// Metric components are analytic expressions; first and second coordinate
// derivatives are taken symbolically once at construction and evaluated
// through tapes, so curvature is exact up to floating-point rounding. A
// finite-difference path over the same assembly serves as an independent
// oracle.
//
// Conventions: Christoffel  Γ^a_bc = ½ g^{ad}(∂_b g_dc + ∂_c g_bd − ∂_d g_bc);
// Riemann  R^a_bcd = ∂_c Γ^a_db − ∂_d Γ^a_cb + Γ^a_ce Γ^e_db − Γ^a_de Γ^e_cb,
// equivalently [∇_c,∇_d] V^a = R^a_bcd V^b;  Ricci  r_bd = R^a_bad.
#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "expr.hpp"
#include "tape.hpp"

namespace nullcollapse {

class GeometryError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Chart {
  std::vector<std::string> coords;
  std::vector<std::optional<double>> periods;  // positive when present
  std::size_t dim() const { return coords.size(); }
};

enum class SignatureTag { kLorentzian, kRiemannian };

struct MetricSpec {
  Chart chart;
  std::vector<Expr> comp;  // dim*dim, row-major, symmetric
  SignatureTag signature = SignatureTag::kRiemannian;

  const Expr& at(std::size_t i, std::size_t j) const {
    return comp[i * chart.dim() + j];
  }
};

// Builds a spec from the upper triangle (i <= j), mirroring the rest.
MetricSpec make_metric_spec(Chart chart, std::vector<Expr> upper,
                            SignatureTag signature);

using SmallMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4>;
using SmallVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 4, 1>;

struct PointGeometry {
  int n = 0;
  SmallMat g, ginv, ricci;
  double det = 0.0;
  std::array<double, 64> gamma{};      // Γ^a_bc at a*n*n + b*n + c
  std::array<double, 256> riem{};      // R^a_bcd at ((a*n + b)*n + c)*n + d
  std::array<double, 256> riem_low{};  // R_abcd, same layout

  double christoffel(int a, int b, int c) const {
    return gamma[(a * n + b) * n + c];
  }
  double riemann(int a, int b, int c, int d) const {
    return riem[((a * n + b) * n + c) * n + d];
  }
  double riemann_low(int a, int b, int c, int d) const {
    return riem_low[((a * n + b) * n + c) * n + d];
  }
};

class MetricField {
 public:
  // extra_vars are appended to the chart coordinates in the variable
  // ordering (used for the family parameter "lam").
  explicit MetricField(MetricSpec spec,
                       std::vector<std::string> extra_vars = {});

  const MetricSpec& spec() const { return spec_; }
  int dim() const { return static_cast<int>(spec_.chart.dim()); }
  const std::vector<std::string>& variables() const { return vars_; }

  struct Workspace {
    std::vector<double> slots;
    std::vector<double> out;
    std::vector<double> dg, ddg;   // scratch for the FD path
  };

  // Metric values with invertibility and signature checks.
  SmallMat metric_at(std::span<const double> v, Workspace& ws) const;
  // Metric values only; Riemannian specs are verified positive definite
  // through a Cholesky factorization (cheap), Lorentzian ones through the
  // determinant sign.
  SmallMat metric_values(std::span<const double> v, Workspace& ws) const;

  struct Connection {
    SmallMat g, ginv;
    double det = 0.0;
    std::array<double, 64> gamma{};
    double christoffel(int a, int b, int c) const;
  };
  Connection connection_at(std::span<const double> v, Workspace& ws) const;

  PointGeometry geometry_at(std::span<const double> v, Workspace& ws) const;
  // Same assembly with central finite differences of the metric components
  // in place of the symbolic derivatives.
  PointGeometry fd_geometry_at(std::span<const double> v, double step,
                               Workspace& ws) const;

 private:
  SmallMat values_to_matrix(const double* vals) const;
  void check_metric(const SmallMat& g, double* det_out,
                    bool check_signature) const;
  PointGeometry assemble(const SmallMat& g, const double* dg,
                         const double* ddg) const;

  MetricSpec spec_;
  std::vector<std::string> vars_;
  Tape values_tape_;   // g (upper triangle)
  Tape conn_tape_;     // g, ∂g
  Tape full_tape_;     // g, ∂g, ∂∂g
  std::size_t scratch_size_ = 0;
};

inline double MetricField::Connection::christoffel(int a, int b, int c) const {
  int n = static_cast<int>(g.rows());
  return gamma[(a * n + b) * n + c];
}

}  // namespace nullcollapse
