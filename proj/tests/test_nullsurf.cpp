#include <doctest.h>

#include <cmath>

#include "nullsurf.hpp"
#include "scenario.hpp"

using namespace nullcollapse;

namespace {

// A null plane t = z in flat spacetime; generators are straight lines.
const char* kNullPlane = R"json({
  "coordinates": ["t", "x", "y", "z"],
  "metric": [["-1","0","0","0"],[null,"1","0","0"],
             [null,null,"1","0"],[null,null,null,"1"]],
  "periods": {},
  "hypersurface": {
    "chart": ["v", "x", "y"],
    "periods": {"v": 6.283185307179586, "x": 6.283185307179586,
                "y": 6.283185307179586},
    "embedding": ["v", "x", "y", "v"],
    "generator": "v"
  },
  "timelike": ["1", "0", "0", "0"]
})json";

// A spacelike slice t = 0 in flat spacetime; must fail the null check.
const char* kSpacelike = R"json({
  "coordinates": ["t", "x", "y", "z"],
  "metric": [["-1","0","0","0"],[null,"1","0","0"],
             [null,null,"1","0"],[null,null,null,"1"]],
  "periods": {},
  "hypersurface": {
    "chart": ["a", "b", "c"],
    "periods": {"a": 6.283185307179586, "b": 6.283185307179586,
                "c": 6.283185307179586},
    "embedding": ["0", "a", "b", "c"],
    "generator": "a"
  },
  "timelike": ["1", "0", "0", "0"]
})json";

// expanding-t3 with the generator coordinate traversed at twice the speed;
// the expansion must double.
const char* kExpandingFast = R"json({
  "coordinates": ["t", "psi", "x", "y"],
  "metric": [
    ["0", "1", "0", "0"],
    [null, "t", "0", "0"],
    [null, null, "(1+0.3*sin(psi))^2", "0"],
    [null, null, null, "(1+0.3*sin(psi))^2"]
  ],
  "periods": {},
  "hypersurface": {
    "chart": ["w", "x", "y"],
    "periods": {"w": 3.141592653589793, "x": 6.283185307179586,
                "y": 6.283185307179586},
    "embedding": ["0", "2*w", "x", "y"],
    "generator": "w"
  },
  "timelike": ["-(1+t)/2", "1", "0", "0"]
})json";

}  // namespace

TEST_CASE("nullness check identifies the catalog horizons") {
  for (const char* name : {"misner-t3", "ppwave-t3", "expanding-t3"}) {
    Horizon h(catalog_get(name));
    auto rep = h.nullness(8, 2);
    INFO(name << ": " << rep.failure);
    CHECK(rep.pass());
    CHECK(rep.max_abs_det < 1e-12);
    CHECK(rep.max_misalignment < 1e-10);
    CHECK(rep.min_transverse_eigenvalue > 0.4);
  }
  Horizon plane(load_scenario_text(kNullPlane, "null-plane"));
  CHECK(plane.nullness(6, 1).pass());

  Horizon slice(load_scenario_text(kSpacelike, "spacelike"));
  auto rep = slice.nullness(6, 1);
  CHECK(!rep.pass());
  CHECK(rep.failure == "induced metric kernel is not one-dimensional");
}

TEST_CASE("frames satisfy their defining relations") {
  Horizon h(catalog_get("misner-t3"));
  Horizon::Workspace ws;
  for (Vec3 s : {Vec3(0.0, 0.0, 0.0), Vec3(1.1, 2.0, 4.5), Vec3(3.9, 0.4, 1.0)}) {
    auto p = h.point_at(s, ws);
    const Eigen::Matrix4d G = p.conn.g;
    for (int i = 0; i < 3; ++i) {
      CHECK(std::abs(p.Z.dot(G * p.emb.E.col(i))) < 1e-9);
    }
    CHECK(p.X.dot(G * p.X) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(p.Y.dot(G * p.Y) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(p.X.dot(G * p.Y)) < 1e-9);
    CHECK(std::abs(p.T.dot(G * p.X)) < 1e-9);
    CHECK(std::abs(p.T.dot(G * p.Y)) < 1e-9);
    CHECK(std::abs(p.Z.dot(G * p.X)) < 1e-9);
    CHECK(std::abs(p.Z.dot(G * p.Y)) < 1e-9);
    CHECK(p.geodesic_residual < 1e-8);
    CHECK(p.f == doctest::Approx(-0.5).epsilon(1e-10));
  }
  Horizon pp(catalog_get("ppwave-t3"));
  auto q = pp.point_at(Vec3(0.5, 1.0, 2.0), ws);
  CHECK(std::abs(q.f) < 1e-10);  // affine generator
  CHECK(q.geodesic_residual < 1e-10);
}

TEST_CASE("expansion values across the catalog") {
  Horizon::Workspace ws;
  Horizon misner(catalog_get("misner-t3"));
  Horizon ppwave(catalog_get("ppwave-t3"));
  for (auto& h : {std::ref(misner), std::ref(ppwave)}) {
    for (const Vec3& s : h.get().surface_grid(5)) {
      CHECK(std::abs(h.get().expansion(h.get().point_at(s, ws))) < 1e-10);
    }
  }

  Horizon exp3(catalog_get("expanding-t3"));
  auto p0 = exp3.point_at(Vec3(0.0, 1.0, 2.0), ws);
  CHECK(exp3.expansion(p0) == doctest::Approx(0.6).epsilon(1e-10));
  // theta = 2 a'/a with a = 1 + 0.3 sin(psi)
  for (double psi : {0.7, 2.4, 4.0}) {
    double a = 1.0 + 0.3 * std::sin(psi);
    double expect = 2.0 * 0.3 * std::cos(psi) / a;
    auto p = exp3.point_at(Vec3(psi, 0.3, 0.8), ws);
    CHECK(exp3.expansion(p) == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("deformation tensor on the transverse plane") {
  Horizon::Workspace ws;
  Horizon misner(catalog_get("misner-t3"));
  for (const Vec3& s : misner.surface_grid(4)) {
    auto b = misner.b_plane(misner.point_at(s, ws));
    CHECK(b.cwiseAbs().maxCoeff() < 1e-10);
  }

  Horizon exp3(catalog_get("expanding-t3"));
  auto p = exp3.point_at(Vec3(0.0, 0.4, 1.3), ws);
  auto b = exp3.b_plane(p);
  CHECK(b(0, 0) == doctest::Approx(0.3).epsilon(1e-10));
  CHECK(b(1, 1) == doctest::Approx(0.3).epsilon(1e-10));
  CHECK(std::abs(b(0, 1)) < 1e-10);

  // Trace identity and symmetry at generic points.
  for (double psi : {0.9, 2.2, 5.5}) {
    auto q = exp3.point_at(Vec3(psi, 1.1, 0.2), ws);
    auto bq = exp3.b_plane(q);
    CHECK(bq(0, 0) + bq(1, 1) ==
          doctest::Approx(exp3.expansion(q)).epsilon(1e-12));
    CHECK(std::abs(bq(0, 1) - bq(1, 0)) < 1e-9);
  }
}

TEST_CASE("expansion scales linearly with the generator") {
  Horizon::Workspace ws;
  Horizon slow(catalog_get("expanding-t3"));
  Horizon fast(load_scenario_text(kExpandingFast, "expanding-fast"));
  // Same geometric point: psi = 2w.
  for (double w : {0.0, 0.35, 1.2}) {
    double th_slow = slow.expansion(slow.point_at(Vec3(2.0 * w, 0.5, 0.5), ws));
    double th_fast = fast.expansion(fast.point_at(Vec3(w, 0.5, 0.5), ws));
    if (std::abs(th_slow) > 1e-12) {
      CHECK(th_fast / th_slow == doctest::Approx(2.0).epsilon(1e-9));
    } else {
      CHECK(std::abs(th_fast) < 1e-9);
    }
  }
}

TEST_CASE("parallel transport preserves inner products") {
  Horizon plane(load_scenario_text(kNullPlane, "null-plane"));
  Horizon::GeneratorCurve curve{Vec3(0.0, 0.5, 1.0), 5.0, 200};
  auto res = plane.transport(Vec4(0.3, 1.0, -0.2, 0.7), curve);
  for (const auto& v : res.v) {
    CHECK((v - res.v.front()).norm() < 1e-12);  // flat, straight generators
  }
  CHECK(res.norm_drift < 1e-12);

  Horizon misner(catalog_get("misner-t3"));
  Horizon::GeneratorCurve mcurve{Vec3(0.0, 1.0, 2.0), 6.283185307179586, 400};
  Horizon::Workspace ws;
  auto p0 = misner.point_at(mcurve.start, ws);
  auto zres = misner.transport(p0.Z, mcurve);
  CHECK(zres.norm_drift < 1e-10);
  // With ∇_Z Z = -Z/2, a transported vector starting at Z grows like
  // exp(s/2) along the generator direction.
  for (std::size_t k = 0; k < zres.s.size(); k += 50) {
    double expect = std::exp(0.5 * zres.s[k]);
    CHECK(zres.v[k][1] == doctest::Approx(expect * p0.Z[1]).epsilon(1e-7));
    CHECK(std::abs(zres.v[k][0]) < 1e-9);
    CHECK(std::abs(zres.v[k][2]) < 1e-9);
  }
}

TEST_CASE("evolution equation residuals vanish on the flat-family horizons") {
  for (const char* name : {"misner-t3", "ppwave-t3"}) {
    Horizon h(catalog_get(name));
    for (Vec3 start : {Vec3(0.0, 0.0, 0.0), Vec3(0.0, 1.57, 3.14)}) {
      Horizon::GeneratorCurve curve{start, 6.283185307179586, 400};
      auto tr = h.residual_trace(curve);
      INFO(name);
      CHECK(tr.max_ray < 1e-6);
      CHECK(tr.max_bev < 1e-6);
      CHECK(tr.max_b_plane < 1e-8);
      if (std::string(name) == "ppwave-t3") {
        CHECK(tr.max_curvature_term < 1e-9);
      } else {
        CHECK(tr.max_curvature_term < 1e-6);
      }
    }
  }
}

TEST_CASE("residuals converge on the expanding horizon") {
  Horizon h(catalog_get("expanding-t3"));
  Horizon::GeneratorCurve curve{Vec3(0.0, 0.7, 1.9), 6.283185307179586, 400};
  auto tr = h.residual_trace(curve);
  CAPTURE(tr.max_ray);
  CAPTURE(tr.max_bev);
  CHECK(tr.max_ray < 1e-4);
  CHECK(tr.max_ray > 1e-12);  // a real balance, not a trivial zero
  CHECK(tr.max_bev < 1e-3);
  CHECK(tr.max_curvature_term > 1e-3);  // curvature term genuinely nonzero

  // Centered differencing is second order: quadrupling the resolution
  // should shrink the residual by roughly sixteen.
  Horizon::GeneratorCurve fine = curve;
  fine.steps = 1600;
  auto trf = h.residual_trace(fine);
  CHECK(trf.max_ray < tr.max_ray / 8.0);
}

TEST_CASE("zero initial data stays zero in the B evolution") {
  Horizon h(catalog_get("misner-t3"));
  Horizon::GeneratorCurve curve{Vec3(0.0, 0.3, 0.9), 6.283185307179586, 200};
  auto tr = h.residual_trace(curve);
  for (double b : tr.b_fg) CHECK(std::abs(b) < 1e-10);
}
