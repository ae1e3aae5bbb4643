#include "nullsurf.hpp"

#include <cmath>

#include "parallel.hpp"

namespace nullcollapse {

namespace {

constexpr double kTwoPi = 6.283185307179586;

// One classical Runge-Kutta step for dy/ds = rhs(s, y).
template <typename Rhs>
void rk4_step(double s, double h, std::vector<double>& y, const Rhs& rhs,
              std::vector<double>& k1, std::vector<double>& k2,
              std::vector<double>& k3, std::vector<double>& k4,
              std::vector<double>& tmp) {
  const std::size_t n = y.size();
  rhs(s, y, k1);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
  rhs(s + 0.5 * h, tmp, k2);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
  rhs(s + 0.5 * h, tmp, k3);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
  rhs(s + h, tmp, k4);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
}

}  // namespace

Horizon::Horizon(const Scenario& scenario)
    : scenario_(scenario), ambient_(scenario.metric) {
  if (!scenario_.hypersurface) {
    throw NumericError("scenario '" + scenario_.name +
                       "' declares no hypersurface");
  }
  const Embedding& emb = *scenario_.hypersurface;

  std::vector<Expr> outs;
  std::vector<std::vector<Expr>> jac(4);
  for (int a = 0; a < 4; ++a) {
    outs.push_back(simplify(emb.map[a]));
  }
  for (int a = 0; a < 4; ++a) {
    for (int i = 0; i < 3; ++i) {
      jac[a].push_back(
          simplify(differentiate(outs[a], emb.chart.coords[i])));
    }
  }
  for (int a = 0; a < 4; ++a) {
    for (int i = 0; i < 3; ++i) outs.push_back(jac[a][i]);
  }
  for (int a = 0; a < 4; ++a) {
    for (int i = 0; i < 3; ++i) {
      for (int j = i; j < 3; ++j) {
        outs.push_back(simplify(differentiate(jac[a][i], emb.chart.coords[j])));
      }
    }
  }
  embed_tape_ = Tape(outs, emb.chart.coords);
  t_tape_ = Tape(scenario_.timelike, scenario_.metric.chart.coords);
  embed_scratch_ = std::max(embed_tape_.slot_count(), t_tape_.slot_count());
}

Horizon::EmbedData Horizon::embed_at(const Vec3& s, Workspace& ws) const {
  ws.slots.resize(embed_scratch_);
  ws.out.resize(embed_tape_.output_count());
  std::array<double, 3> in{s[0], s[1], s[2]};
  embed_tape_.eval(in, ws.slots, ws.out);

  EmbedData d;
  d.s = s;
  for (int a = 0; a < 4; ++a) d.x[a] = ws.out[a];
  for (int a = 0; a < 4; ++a) {
    for (int i = 0; i < 3; ++i) d.E(a, i) = ws.out[4 + a * 3 + i];
  }
  int k = 16;
  for (int a = 0; a < 4; ++a) {
    for (int i = 0; i < 3; ++i) {
      for (int j = i; j < 3; ++j) {
        d.d2[a][i][j] = ws.out[k];
        d.d2[a][j][i] = ws.out[k];
        ++k;
      }
    }
  }
  return d;
}

Horizon::SurfacePoint Horizon::point_at(const Vec3& s, Workspace& ws) const {
  SurfacePoint p;
  p.emb = embed_at(s, ws);
  std::array<double, 4> x{p.emb.x[0], p.emb.x[1], p.emb.x[2], p.emb.x[3]};
  p.conn = ambient_.connection_at(x, ws.metric);

  ws.slots.resize(embed_scratch_);
  ws.out.resize(std::max<std::size_t>(ws.out.size(), 4));
  t_tape_.eval(x, ws.slots, std::span<double>(ws.out.data(), 4));
  for (int a = 0; a < 4; ++a) p.T[a] = ws.out[a];

  const int gen = generator();
  p.Z = p.emb.E.col(gen);
  const Eigen::Matrix4d G = p.conn.g;

  const double gTZ = p.T.dot(G * p.Z);
  if (std::abs(gTZ) < 1e-12) {
    throw NumericError("reference field is orthogonal to the generator");
  }

  // Geodesic factor: ∇_Z Z = f Z on the surface.
  Vec4 W;
  for (int a = 0; a < 4; ++a) {
    double acc = p.emb.d2[a][gen][gen];
    for (int b = 0; b < 4; ++b) {
      for (int c = 0; c < 4; ++c) {
        acc += p.conn.christoffel(a, b, c) * p.Z[b] * p.Z[c];
      }
    }
    W[a] = acc;
  }
  p.f = p.T.dot(G * W) / gTZ;
  Vec4 res = W - p.f * p.Z;
  p.geodesic_residual = std::sqrt(std::abs(res.dot(G * res)));

  // Plane basis: project the non-generator tangent directions orthogonal to
  // the reference field (staying inside TH), then Gram-Schmidt, seeded in
  // chart coordinate order.
  int i1 = -1, i2 = -1;
  for (int i = 0; i < 3; ++i) {
    if (i == gen) continue;
    (i1 < 0 ? i1 : i2) = i;
  }
  auto project = [&](int i, Vec3& svec) {
    Vec4 Ei = p.emb.E.col(i);
    double c = p.T.dot(G * Ei) / gTZ;
    svec = Vec3::Zero();
    svec[i] = 1.0;
    svec[gen] -= c;
    return Vec4(Ei - c * p.Z);
  };
  Vec3 p1s, p2s;
  Vec4 P1 = project(i1, p1s);
  Vec4 P2 = project(i2, p2s);
  double n1 = P1.dot(G * P1);
  if (n1 <= 1e-14) {
    throw NumericError("degenerate transverse plane (first direction)");
  }
  p.X = P1 / std::sqrt(n1);
  p.Xs = p1s / std::sqrt(n1);
  double w = p.X.dot(G * P2);
  Vec4 Q = P2 - w * p.X;
  Vec3 qs = p2s - w * p.Xs;
  double n2 = Q.dot(G * Q);
  if (n2 <= 1e-14) {
    throw NumericError("degenerate transverse plane (second direction)");
  }
  p.Y = Q / std::sqrt(n2);
  p.Ys = qs / std::sqrt(n2);
  return p;
}

double Horizon::b_tensor(const SurfacePoint& p, const Vec3& Fs,
                         const Vec4& G) const {
  const int gen = generator();
  Vec4 F4 = p.emb.E * Fs;
  Vec4 DZ;
  for (int a = 0; a < 4; ++a) {
    double acc = 0.0;
    for (int i = 0; i < 3; ++i) acc += Fs[i] * p.emb.d2[a][gen][i];
    for (int b = 0; b < 4; ++b) {
      for (int c = 0; c < 4; ++c) {
        acc += p.conn.christoffel(a, b, c) * F4[b] * p.Z[c];
      }
    }
    DZ[a] = acc;
  }
  return DZ.dot(p.conn.g * G);
}

Eigen::Matrix2d Horizon::b_plane(const SurfacePoint& p) const {
  Eigen::Matrix2d b;
  b(0, 0) = b_tensor(p, p.Xs, p.X);
  b(0, 1) = b_tensor(p, p.Xs, p.Y);
  b(1, 0) = b_tensor(p, p.Ys, p.X);
  b(1, 1) = b_tensor(p, p.Ys, p.Y);
  return b;
}

double Horizon::expansion(const SurfacePoint& p) const {
  return b_tensor(p, p.Xs, p.X) + b_tensor(p, p.Ys, p.Y);
}

std::vector<Vec3> Horizon::surface_grid(int grid) const {
  const Embedding& emb = embedding();
  std::vector<Vec3> pts;
  pts.reserve(static_cast<std::size_t>(grid) * grid * grid);
  double step[3];
  for (int i = 0; i < 3; ++i) {
    step[i] = emb.chart.periods[i] ? *emb.chart.periods[i] / grid
                                   : kTwoPi / grid;
  }
  for (int a = 0; a < grid; ++a) {
    for (int b = 0; b < grid; ++b) {
      for (int c = 0; c < grid; ++c) {
        pts.emplace_back(a * step[0], b * step[1], c * step[2]);
      }
    }
  }
  return pts;
}

Horizon::NullnessReport Horizon::nullness(int grid, int workers) const {
  auto pts = surface_grid(grid);
  const int gen = generator();

  struct Slot {
    int failure = 0;  // 0 ok, 1 rank, 2 kernel count, 3 negative direction
    double abs_det = 0.0;
    double misalignment = 0.0;
    double min_transverse = 0.0;
  };
  std::vector<Slot> slots(pts.size());
  const int nw = resolve_workers(workers);
  std::vector<Workspace> wss(nw);

  parallel_for(pts.size(), nw, [&](int w, std::size_t i) {
    Workspace& ws = wss[w];
    EmbedData d = embed_at(pts[i], ws);
    Eigen::JacobiSVD<Mat43> svd(d.E);
    if (svd.singularValues()[2] <
        1e-8 * std::max(1.0, svd.singularValues()[0])) {
      slots[i].failure = 1;
      return;
    }
    std::array<double, 4> x{d.x[0], d.x[1], d.x[2], d.x[3]};
    SmallMat G = ambient_.metric_values(x, ws.metric);
    Eigen::Matrix3d q = d.E.transpose() * G * d.E;
    slots[i].abs_det = std::abs(q.determinant());

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(q);
    const auto& ev = es.eigenvalues();  // ascending
    double scale = std::max({1.0, std::abs(ev[0]), std::abs(ev[2])});
    const double tol = 1e-9 * scale;
    int kernel = 0;
    double min_pos = 1e300;
    bool negative = false;
    int kernel_index = -1;
    for (int k = 0; k < 3; ++k) {
      if (std::abs(ev[k]) < tol) {
        ++kernel;
        kernel_index = k;
      } else if (ev[k] < 0.0) {
        negative = true;
      } else {
        min_pos = std::min(min_pos, ev[k]);
      }
    }
    if (negative) {
      slots[i].failure = 3;
      return;
    }
    if (kernel != 1) {
      slots[i].failure = 2;
      return;
    }
    slots[i].min_transverse = min_pos;
    Vec3 v = es.eigenvectors().col(kernel_index).normalized();
    Vec3 axis = Vec3::Zero();
    axis[gen] = 1.0;
    slots[i].misalignment = (v - v.dot(axis) * axis).norm();
  });

  NullnessReport rep;
  rep.is_null = true;
  rep.generator_aligned = true;
  rep.min_transverse_eigenvalue = 1e300;
  for (const Slot& s : slots) {
    if (s.failure == 1 && rep.failure.empty()) {
      rep.is_null = false;
      rep.failure = "embedding pushforward is rank deficient";
    } else if (s.failure == 2 && rep.failure.empty()) {
      rep.is_null = false;
      rep.failure = "induced metric kernel is not one-dimensional";
    } else if (s.failure == 3 && rep.failure.empty()) {
      rep.is_null = false;
      rep.failure = "induced metric has a negative direction";
    }
    rep.max_abs_det = std::max(rep.max_abs_det, s.abs_det);
    rep.max_misalignment = std::max(rep.max_misalignment, s.misalignment);
    rep.min_transverse_eigenvalue =
        std::min(rep.min_transverse_eigenvalue, s.min_transverse);
  }
  if (rep.is_null && rep.max_misalignment > 1e-8) {
    rep.generator_aligned = false;
    rep.failure = "degenerate direction is not the declared generator";
  }
  return rep;
}

Vec3 Horizon::surface_components(const EmbedData& emb, const Vec4& v) const {
  Eigen::Matrix3d A = emb.E.transpose() * emb.E;
  return A.ldlt().solve(emb.E.transpose() * v);
}

Horizon::TransportResult Horizon::transport(const Vec4& v0,
                                            const GeneratorCurve& curve) const {
  if (curve.steps < 2) throw NumericError("transport needs at least 2 steps");
  Workspace ws;
  const int gen = generator();
  const double h = curve.range / curve.steps;

  auto rhs = [&](double s, const std::vector<double>& y,
                 std::vector<double>& dy) {
    Vec3 sv = curve.start;
    sv[gen] += s;
    SurfacePoint p = point_at(sv, ws);
    for (int a = 0; a < 4; ++a) {
      double acc = 0.0;
      for (int b = 0; b < 4; ++b) {
        for (int c = 0; c < 4; ++c) {
          acc -= p.conn.christoffel(a, b, c) * p.Z[b] * y[c];
        }
      }
      dy[a] = acc;
    }
  };

  TransportResult out;
  std::vector<double> y{v0[0], v0[1], v0[2], v0[3]};
  std::vector<double> k1(4), k2(4), k3(4), k4(4), tmp(4);

  Vec3 sv = curve.start;
  SurfacePoint p0 = point_at(sv, ws);
  const double norm0 = v0.dot(p0.conn.g * v0);

  out.s.push_back(0.0);
  out.v.push_back(v0);
  for (int k = 0; k < curve.steps; ++k) {
    rk4_step(k * h, h, y, rhs, k1, k2, k3, k4, tmp);
    out.s.push_back((k + 1) * h);
    out.v.emplace_back(y[0], y[1], y[2], y[3]);
  }

  Vec3 send = curve.start;
  send[gen] += curve.range;
  SurfacePoint pe = point_at(send, ws);
  const Vec4 vend = out.v.back();
  out.norm_drift = std::abs(vend.dot(pe.conn.g * vend) - norm0);
  const double tol =
      1e-8 * (1.0 + std::abs(norm0)) * std::max(1.0, std::abs(curve.range));
  if (out.norm_drift > tol) {
    throw NumericError("transport norm drift " +
                       std::to_string(out.norm_drift) +
                       " exceeds tolerance; increase the step count");
  }
  return out;
}

Horizon::ResidualTrace Horizon::residual_trace(const GeneratorCurve& curve,
                                               const Vec3* F0,
                                               const Vec3* G0) const {
  if (curve.steps < 4) {
    throw NumericError("residual trace needs at least 4 steps");
  }
  Workspace ws;
  const int gen = generator();
  const double h = curve.range / curve.steps;
  const int N = curve.steps;

  // State: Xt, Yt, F, G (ambient components), Phi = ∫f, tau.
  auto rhs = [&](double s, const std::vector<double>& y,
                 std::vector<double>& dy) {
    Vec3 sv = curve.start;
    sv[gen] += s;
    SurfacePoint p = point_at(sv, ws);
    if (std::abs(y[16]) > 600.0) {
      throw NumericError("reparametrization failure: unbounded geodesic factor");
    }
    for (int v = 0; v < 4; ++v) {
      for (int a = 0; a < 4; ++a) {
        double acc = 0.0;
        for (int b = 0; b < 4; ++b) {
          for (int c = 0; c < 4; ++c) {
            acc -= p.conn.christoffel(a, b, c) * p.Z[b] * y[4 * v + c];
          }
        }
        dy[4 * v + a] = acc;
      }
    }
    dy[16] = p.f;
    dy[17] = std::exp(y[16]);
  };

  SurfacePoint p0 = point_at(curve.start, ws);
  Vec3 f0s = F0 ? *F0 : p0.Xs;
  Vec3 g0s = G0 ? *G0 : p0.Xs;
  Vec4 Fv = p0.emb.E * f0s;
  Vec4 Gv = p0.emb.E * g0s;

  std::vector<double> y(18, 0.0);
  for (int a = 0; a < 4; ++a) {
    y[a] = p0.X[a];
    y[4 + a] = p0.Y[a];
    y[8 + a] = Fv[a];
    y[12 + a] = Gv[a];
  }

  struct Node {
    double phi, f, theta, bxx, byy, bxy;
    double bfg, bfx, bgx, bfy, bgy;
    double rzz, rzfzg;
  };
  std::vector<Node> nodes(N + 1);
  std::vector<double> dtau_step(N, 0.0);

  std::vector<double> k1(18), k2(18), k3(18), k4(18), tmp(18);
  for (int k = 0; k <= N; ++k) {
    // Record the node.
    Vec3 sv = curve.start;
    sv[gen] += k * h;
    SurfacePoint p = point_at(sv, ws);
    std::array<double, 4> x{p.emb.x[0], p.emb.x[1], p.emb.x[2], p.emb.x[3]};
    PointGeometry g4 = ambient_.geometry_at(x, ws.metric);

    Vec4 Xt(y[0], y[1], y[2], y[3]);
    Vec4 Yt(y[4], y[5], y[6], y[7]);
    Vec4 F(y[8], y[9], y[10], y[11]);
    Vec4 G(y[12], y[13], y[14], y[15]);
    Vec3 Xts = surface_components(p.emb, Xt);
    Vec3 Yts = surface_components(p.emb, Yt);
    Vec3 Fs = surface_components(p.emb, F);
    Vec3 Gs = surface_components(p.emb, G);

    Node& n = nodes[k];
    n.phi = y[16];
    n.f = p.f;
    n.bxx = b_tensor(p, Xts, Xt);
    n.byy = b_tensor(p, Yts, Yt);
    n.bxy = b_tensor(p, Xts, Yt);
    n.theta = n.bxx + n.byy;
    n.bfg = b_tensor(p, Fs, G);
    n.bfx = b_tensor(p, Fs, Xt);
    n.bgx = b_tensor(p, Gs, Xt);
    n.bfy = b_tensor(p, Fs, Yt);
    n.bgy = b_tensor(p, Gs, Yt);
    n.rzz = p.Z.dot(g4.ricci * p.Z);
    double rz = 0.0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int c = 0; c < 4; ++c)
          for (int d = 0; d < 4; ++d)
            rz += g4.riemann_low(a, b, c, d) * G[a] * p.Z[b] * p.Z[c] * F[d];
    n.rzfzg = rz;

    if (k == N) break;
    const double tau_before = y[17];
    rk4_step(k * h, h, y, rhs, k1, k2, k3, k4, tmp);
    dtau_step[k] = y[17] - tau_before;
  }

  ResidualTrace tr;
  double tau_acc = 0.0;
  for (int k = 1; k < N; ++k) {
    tau_acc += dtau_step[k - 1];
    const Node& a = nodes[k - 1];
    const Node& c = nodes[k];
    const Node& b = nodes[k + 1];

    // In the affine gauge normalized at node k the parameter derivative of a
    // gauge-weighted sample q_aff = (a_gauge q) reduces to q' - f q, with q'
    // an ordinary centered difference on the uniform coordinate grid.
    const double dtheta = (b.theta - a.theta) / (2.0 * h) - c.f * c.theta;
    const double ray = dtheta + c.bxx * c.bxx + c.byy * c.byy +
                       2.0 * c.bxy * c.bxy + c.rzz;

    const double dbfg = (b.bfg - a.bfg) / (2.0 * h) - c.f * c.bfg;
    const double bev = dbfg + c.bfx * c.bgx + c.bfy * c.bgy - c.rzfzg;

    tr.tau.push_back(tau_acc);
    tr.theta.push_back(c.theta);
    tr.dtheta.push_back(dtheta);
    tr.ray.push_back(std::abs(ray));
    tr.bev.push_back(std::abs(bev));
    tr.b_fg.push_back(c.bfg);
    tr.max_ray = std::max(tr.max_ray, std::abs(ray));
    tr.max_bev = std::max(tr.max_bev, std::abs(bev));
  }
  for (const Node& n : nodes) {
    tr.max_curvature_term = std::max(tr.max_curvature_term, std::abs(n.rzfzg));
    tr.max_b_plane = std::max(
        {tr.max_b_plane, std::abs(n.bxx), std::abs(n.byy), std::abs(n.bxy)});
  }
  return tr;
}

double Horizon::raychaudhuri_residual(const GeneratorCurve& curve) const {
  return residual_trace(curve).max_ray;
}

double Horizon::b_evolution_residual(const GeneratorCurve& curve,
                                     const Vec3& F0, const Vec3& G0) const {
  return residual_trace(curve, &F0, &G0).max_bev;
}

}  // namespace nullcollapse
