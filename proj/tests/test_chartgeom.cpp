#include <doctest.h>

#include <cmath>
#include <random>

#include "chartgeom.hpp"
#include "oracles.hpp"

using namespace nullcollapse;

namespace {

MetricSpec spec_from_strings(std::vector<std::string> coords,
                             std::vector<std::string> upper,
                             SignatureTag sig) {
  Chart chart;
  chart.coords = coords;
  chart.periods.assign(coords.size(), std::nullopt);
  std::vector<Expr> comps;
  for (const auto& s : upper) comps.push_back(parse_expr(s));
  return make_metric_spec(std::move(chart), std::move(comps), sig);
}

MetricSpec minkowski_spec() {
  return spec_from_strings(
      {"t", "x", "y", "z"},
      {"-1", "0", "0", "0", "1", "0", "0", "1", "0", "1"},
      SignatureTag::kLorentzian);
}

MetricSpec misner_spec() {
  // 2 dt dpsi + t dpsi^2 + dx^2 + dy^2
  return spec_from_strings(
      {"t", "psi", "x", "y"},
      {"0", "1", "0", "0", "t", "0", "0", "1", "0", "1"},
      SignatureTag::kLorentzian);
}

MetricSpec ppwave_spec() {
  // 2 du dv + sin(x)sin(y) du^2 + dx^2 + dy^2
  return spec_from_strings(
      {"u", "v", "x", "y"},
      {"sin(x)*sin(y)", "1", "0", "0", "0", "0", "0", "1", "0", "1"},
      SignatureTag::kLorentzian);
}

MetricSpec expanding_spec() {
  return spec_from_strings(
      {"t", "psi", "x", "y"},
      {"0", "1", "0", "0", "t", "0", "0", "(1+0.3*sin(psi))^2", "0",
       "(1+0.3*sin(psi))^2"},
      SignatureTag::kLorentzian);
}

double max_abs_riemann(const PointGeometry& pg) {
  double m = 0.0;
  const int n = pg.n;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d)
          m = std::max(m, std::abs(pg.riemann_low(a, b, c, d)));
  return m;
}

}  // namespace

TEST_CASE("minkowski is flat with vanishing connection") {
  MetricField field(minkowski_spec());
  MetricField::Workspace ws;
  std::vector<double> p{0.3, -1.2, 0.7, 2.0};
  auto pg = field.geometry_at(p, ws);
  CHECK(pg.g(0, 0) == doctest::Approx(-1.0));
  CHECK(pg.g(1, 1) == doctest::Approx(1.0));
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        CHECK(std::abs(pg.christoffel(a, b, c)) < 1e-15);
  CHECK(max_abs_riemann(pg) < 1e-15);
  CHECK(pg.ricci.cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("misner metric values and connection at the horizon") {
  MetricField field(misner_spec());
  MetricField::Workspace ws;
  std::vector<double> p{0.0, 1.3, 0.4, 5.0};
  auto g = field.metric_at(p, ws);
  CHECK(g(0, 1) == doctest::Approx(1.0));
  CHECK(g(1, 1) == doctest::Approx(0.0));
  CHECK(g(2, 2) == doctest::Approx(1.0));
  CHECK(g(3, 3) == doctest::Approx(1.0));
  CHECK(g(0, 0) == doctest::Approx(0.0));

  auto conn = field.connection_at(p, ws);
  CHECK(conn.christoffel(1, 1, 1) == doctest::Approx(-0.5));  // psi,psipsi
  CHECK(std::abs(conn.christoffel(0, 1, 1)) < 1e-15);         // t,psipsi

  auto pg = field.geometry_at(p, ws);
  CHECK(max_abs_riemann(pg) < 1e-9);
  CHECK(pg.ricci.cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("christoffel symmetry in the lower pair") {
  MetricField field(expanding_spec());
  MetricField::Workspace ws;
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int k = 0; k < 5; ++k) {
    std::vector<double> p{0.2 * d(rng), 3.0 * d(rng), 3.0 * d(rng),
                          3.0 * d(rng)};
    auto pg = field.geometry_at(p, ws);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int c = 0; c < 4; ++c)
          CHECK(pg.christoffel(a, b, c) ==
                doctest::Approx(pg.christoffel(a, c, b)));
  }
}

TEST_CASE("ppwave curvature against hand-derived values") {
  MetricField field(ppwave_spec());
  MetricField::Workspace ws;
  const double pi_2 = 1.57079632679489662;
  std::vector<double> p{0.0, 0.0, pi_2, pi_2};
  auto pg = field.geometry_at(p, ws);

  // R_uxux = -1/2 d^2_x H = 1/2 sin(x)sin(y) = 1/2 here.
  CHECK(pg.riemann_low(0, 2, 0, 2) == doctest::Approx(0.5).epsilon(1e-12));
  // r_uu = -1/2 (H_xx + H_yy) = sin(x)sin(y) = 1 here; everything else zero.
  CHECK(pg.ricci(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      if (a == 0 && b == 0) continue;
      CHECK(std::abs(pg.ricci(a, b)) < 1e-9);
    }
  }

  std::vector<double> q{0.2, -0.7, 0.9, 2.1};
  auto pgq = field.geometry_at(q, ws);
  CHECK(pgq.ricci(0, 0) ==
        doctest::Approx(std::sin(0.9) * std::sin(2.1)).epsilon(1e-12));
}

TEST_CASE("round sphere in three dimensions is Einstein") {
  // dr^2 + sin(r)^2 dth^2 + sin(r)^2 sin(th)^2 dph^2 has ricci = 2 g.
  MetricField field(spec_from_strings(
      {"r", "th", "ph"},
      {"1", "0", "0", "sin(r)^2", "0", "sin(r)^2*sin(th)^2"},
      SignatureTag::kRiemannian));
  MetricField::Workspace ws;
  std::vector<double> p{0.7, 1.1, 0.3};
  auto pg = field.geometry_at(p, ws);
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      CHECK(pg.ricci(a, b) == doctest::Approx(2.0 * pg.g(a, b)).epsilon(1e-9));
    }
  }
}

TEST_CASE("schwarzschild is vacuum") {
  MetricField field(spec_from_strings(
      {"t", "r", "th", "ph"},
      {"-(1-1/r)", "0", "0", "0", "1/(1-1/r)", "0", "0", "r^2", "0",
       "r^2*sin(th)^2"},
      SignatureTag::kLorentzian));
  MetricField::Workspace ws;
  std::vector<double> p{0.0, 3.2, 1.05, 0.4};
  auto pg = field.geometry_at(p, ws);
  CHECK(pg.ricci.cwiseAbs().maxCoeff() < 1e-9);
  CHECK(max_abs_riemann(pg) > 1e-3);  // curved but Ricci-flat
}

TEST_CASE("riemann symmetries and first Bianchi identity") {
  std::vector<MetricSpec> specs{ppwave_spec(), expanding_spec()};
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (auto& spec : specs) {
    MetricField field(spec);
    MetricField::Workspace ws;
    for (int k = 0; k < 5; ++k) {
      std::vector<double> p{0.1 * d(rng), 3.0 * d(rng), 3.0 * d(rng),
                            3.0 * d(rng)};
      auto pg = field.geometry_at(p, ws);
      double scale = std::max(1e-30, max_abs_riemann(pg));
      for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
          for (int c = 0; c < 4; ++c) {
            for (int e = 0; e < 4; ++e) {
              double R = pg.riemann_low(a, b, c, e);
              CHECK(std::abs(R + pg.riemann_low(b, a, c, e)) < 1e-9 * scale);
              CHECK(std::abs(R + pg.riemann_low(a, b, e, c)) < 1e-9 * scale);
              CHECK(std::abs(R - pg.riemann_low(c, e, a, b)) < 1e-9 * scale);
              double bianchi = R + pg.riemann_low(a, c, e, b) +
                               pg.riemann_low(a, e, b, c);
              CHECK(std::abs(bianchi) < 1e-9 * scale);
            }
          }
        }
      }
      // Ricci symmetric; raising then lowering is the identity.
      CHECK((pg.ricci - pg.ricci.transpose()).cwiseAbs().maxCoeff() <
            1e-9 * std::max(1.0, pg.ricci.cwiseAbs().maxCoeff()));
      SmallMat id = pg.g * pg.ginv;
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          CHECK(std::abs(id(a, b) - (a == b ? 1.0 : 0.0)) < 1e-12);
    }
  }
}

TEST_CASE("finite-difference path agrees with the symbolic path") {
  struct Case {
    MetricSpec spec;
    double tspread;
  };
  std::vector<Case> cases{{minkowski_spec(), 1.0},
                          {misner_spec(), 0.2},
                          {ppwave_spec(), 0.2},
                          {expanding_spec(), 0.2}};
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (auto& c : cases) {
    MetricField field(c.spec);
    MetricField::Workspace ws;
    for (int k = 0; k < 20; ++k) {
      std::vector<double> p{c.tspread * d(rng), 3.0 * d(rng), 3.0 * d(rng),
                            3.0 * d(rng)};
      auto sym = field.geometry_at(p, ws);
      auto fd = field.fd_geometry_at(p, 1e-4, ws);
      CHECK((sym.ricci - fd.ricci).cwiseAbs().maxCoeff() < 1e-6);
      double dgam = 0.0, driem = 0.0;
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          for (int cc = 0; cc < 4; ++cc) {
            dgam = std::max(dgam, std::abs(sym.christoffel(a, b, cc) -
                                           fd.christoffel(a, b, cc)));
            for (int e = 0; e < 4; ++e) {
              driem = std::max(driem, std::abs(sym.riemann_low(a, b, cc, e) -
                                               fd.riemann_low(a, b, cc, e)));
            }
          }
      CHECK(dgam < 1e-6);
      CHECK(driem < 1e-6);
    }
  }
}

TEST_CASE("finite-difference error shrinks with the step") {
  MetricField field(ppwave_spec());
  MetricField::Workspace ws;
  std::vector<double> p{0.1, 0.4, 0.9, 1.3};
  auto sym = field.geometry_at(p, ws);
  auto coarse = field.fd_geometry_at(p, 1e-3, ws);
  auto fine = field.fd_geometry_at(p, 1e-4, ws);
  double ec = (sym.ricci - coarse.ricci).cwiseAbs().maxCoeff();
  double ef = (sym.ricci - fine.ricci).cwiseAbs().maxCoeff();
  CHECK(ef < ec);
}

TEST_CASE("signature and singularity diagnostics") {
  // Riemannian tag on a Lorentzian-valued metric.
  MetricField field(spec_from_strings({"a", "b", "c"},
                                      {"-1", "0", "0", "1", "0", "1"},
                                      SignatureTag::kRiemannian));
  MetricField::Workspace ws;
  std::vector<double> p{0.0, 0.0, 0.0};
  CHECK_THROWS_AS(field.metric_at(p, ws), GeometryError);

  MetricField sing(spec_from_strings({"t", "x", "y", "z"},
                                     {"-t", "0", "0", "0", "1", "0", "0", "1",
                                      "0", "1"},
                                     SignatureTag::kLorentzian));
  std::vector<double> q{0.0, 1.0, 1.0, 1.0};
  CHECK_THROWS_AS(sing.metric_at(q, ws), GeometryError);
}
