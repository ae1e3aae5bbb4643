#include "collapse.hpp"

#include <cmath>
#include <queue>
#include <sstream>

#include "parallel.hpp"

namespace nullcollapse {

namespace {

constexpr double kZeroFloor = 1e-12;
constexpr double kLambdaFloor = 1e-8;

std::string ambient_point_string(const MetricField& g,
                                 std::span<const double> x) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < 4; ++i) {
    if (i) os << ", ";
    os << g.spec().chart.coords[i] << "=" << x[i];
  }
  os << ")";
  return os.str();
}

}  // namespace

TimelikeField normalize_timelike(
    const MetricField& g, const std::vector<Expr>& timelike,
    const std::vector<std::array<double, 4>>& samples) {
  Tape t_tape(timelike, g.spec().chart.coords);
  MetricField::Workspace ws;
  std::vector<double> slots(t_tape.slot_count()), tv(4);

  double max_unit_defect = 0.0;
  for (const auto& x : samples) {
    SmallMat G = g.metric_values(x, ws);
    t_tape.eval(x, slots, tv);
    Vec4 T(tv[0], tv[1], tv[2], tv[3]);
    double norm2 = T.dot(G * T);
    if (!(norm2 < 0.0)) {
      throw NumericError("reference field is not timelike at " +
                         ambient_point_string(g, x));
    }
    max_unit_defect = std::max(max_unit_defect, std::abs(norm2 + 1.0));
  }

  TimelikeField out;
  if (max_unit_defect < 1e-12) {
    out.comps = timelike;
    out.rescaled = false;
    return out;
  }

  // norm = sqrt(-g(T,T)) as an expression; divide through.
  Expr norm2 = Expr::constant(0.0);
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      norm2 = norm2 + g.spec().at(a, b) * timelike[a] * timelike[b];
    }
  }
  Expr norm = sqrt(simplify(-norm2));
  for (int a = 0; a < 4; ++a) {
    out.comps.push_back(simplify(timelike[a] / norm));
  }
  out.rescaled = true;

  // Post-check on the same samples.
  Tape check(out.comps, g.spec().chart.coords);
  slots.resize(check.slot_count());
  for (const auto& x : samples) {
    SmallMat G = g.metric_values(x, ws);
    check.eval(x, slots, tv);
    Vec4 T(tv[0], tv[1], tv[2], tv[3]);
    if (std::abs(T.dot(G * T) + 1.0) > 1e-10) {
      throw NumericError("normalization left a unit defect at " +
                         ambient_point_string(g, x));
    }
  }
  return out;
}

LambdaFamily::LambdaFamily(const Scenario& scenario, int sample_grid)
    : scenario_(scenario), horizon_(scenario) {
  // Sample a neighborhood of the surface: grid points displaced along each
  // ambient coordinate separately.
  std::vector<std::array<double, 4>> samples;
  Horizon::Workspace hws;
  for (const Vec3& s : horizon_.surface_grid(sample_grid)) {
    auto emb = horizon_.embed_at(s, hws);
    for (int c = 0; c < 4; ++c) {
      for (double delta : {0.0, -0.1, 0.1}) {
        if (c > 0 && delta == 0.0) continue;
        std::array<double, 4> x{emb.x[0], emb.x[1], emb.x[2], emb.x[3]};
        x[c] += delta;
        samples.push_back(x);
      }
    }
  }
  unit_t_ = normalize_timelike(horizon_.ambient(), scenario_.timelike, samples);
  t4_tape_ = Tape(unit_t_.comps, scenario_.metric.chart.coords);

  // g_lam = g + lam (gT) (gT), built symbolically once.
  const MetricSpec& gspec = scenario_.metric;
  std::vector<Expr> gt(4, Expr::constant(0.0));
  for (int a = 0; a < 4; ++a) {
    Expr acc = Expr::constant(0.0);
    for (int b = 0; b < 4; ++b) {
      acc = acc + gspec.at(a, b) * unit_t_.comps[b];
    }
    gt[a] = simplify(acc);
  }
  Expr lam = Expr::variable("lam");
  std::vector<Expr> glam_upper;
  for (int a = 0; a < 4; ++a) {
    for (int b = a; b < 4; ++b) {
      glam_upper.push_back(simplify(gspec.at(a, b) + lam * gt[a] * gt[b]));
    }
  }
  glam_ = std::make_unique<MetricField>(
      make_metric_spec(gspec.chart, std::move(glam_upper),
                       SignatureTag::kLorentzian),
      std::vector<std::string>{"lam"});

  // Pullback through the embedding, in factored form:
  // h_ij = (g composed) E_i E_j + lam (w E_i)(w E_j).
  const Embedding& emb = *scenario_.hypersurface;
  std::map<std::string, Expr> into_surface;
  for (int a = 0; a < 4; ++a) {
    into_surface.emplace(gspec.chart.coords[a], emb.map[a]);
  }
  std::vector<std::vector<Expr>> jac(4);
  for (int a = 0; a < 4; ++a) {
    for (int i = 0; i < 3; ++i) {
      jac[a].push_back(simplify(differentiate(emb.map[a],
                                              emb.chart.coords[i])));
    }
  }
  std::vector<Expr> omega(3, Expr::constant(0.0));  // (gT) pulled back
  for (int i = 0; i < 3; ++i) {
    Expr acc = Expr::constant(0.0);
    for (int a = 0; a < 4; ++a) {
      acc = acc + substitute(gt[a], into_surface) * jac[a][i];
    }
    omega[i] = simplify(acc);
  }
  std::vector<Expr> hlam_upper;
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) {
      Expr q = Expr::constant(0.0);
      for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
          q = q + substitute(gspec.at(a, b), into_surface) * jac[a][i] *
                      jac[b][j];
        }
      }
      hlam_upper.push_back(simplify(simplify(q) + lam * omega[i] * omega[j]));
    }
  }
  hlam_ = std::make_unique<MetricField>(
      make_metric_spec(emb.chart, std::move(hlam_upper),
                       SignatureTag::kRiemannian),
      std::vector<std::string>{"lam"});
}

Vec4 LambdaFamily::timelike_at(const Vec4& x, Workspace& ws) const {
  ws.slots.resize(t4_tape_.slot_count());
  ws.out.resize(4);
  std::array<double, 4> in{x[0], x[1], x[2], x[3]};
  t4_tape_.eval(in, ws.slots, std::span<double>(ws.out.data(), 4));
  return Vec4(ws.out[0], ws.out[1], ws.out[2], ws.out[3]);
}

NormalData LambdaFamily::normal_from(const SmallMat& glam,
                                     const Horizon::EmbedData& emb,
                                     const Vec4& t) const {
  const int gen = horizon_.generator();
  NormalData nd;
  Vec4 Z = emb.E.col(gen);
  Eigen::Matrix4d G = glam;
  nd.z = Z.dot(G * Z);
  if (!(nd.z > 0.0)) {
    throw NumericError("generator has non-positive family norm; lam must be "
                       "positive on a null surface");
  }

  // Null space of the 3x4 system g_lam(n, E_i) = 0.
  Eigen::Matrix<double, 3, 4> A = emb.E.transpose() * G;
  Eigen::JacobiSVD<Eigen::Matrix<double, 3, 4>> svd(
      A, Eigen::ComputeFullV);
  Vec4 n = svd.matrixV().col(3);
  const double nT = n.dot(G * t);
  const double zT = Z.dot(G * t);
  if (std::abs(nT) < 1e-14 * std::max(1.0, n.norm() * t.norm())) {
    throw NumericError("degenerate family normal");
  }
  nd.U = n * (zT / nT);
  nd.D = (nd.U - Z) / nd.z;
  nd.u = -nd.U.dot(G * nd.U);
  if (!(nd.u > 0.0)) {
    throw NumericError("family normal is not timelike; surface is not "
                       "spacelike for this lam");
  }
  nd.gDD = nd.D.dot(G * nd.D);
  nd.unit_normal = nd.U / std::sqrt(nd.u);
  return nd;
}

NormalData LambdaFamily::normal_decomposition(double lam, const Vec3& s,
                                              Workspace& ws) const {
  if (!(lam > 0.0)) throw NumericError("lam must be positive");
  auto emb = horizon_.embed_at(s, ws.h);
  std::array<double, 5> x{emb.x[0], emb.x[1], emb.x[2], emb.x[3], lam};
  SmallMat G = glam_->metric_at(x, ws.m4);
  return normal_from(G, emb, timelike_at(emb.x, ws));
}

KFrameData LambdaFamily::second_fundamental_form(double lam, const Vec3& s,
                                                 Workspace& ws) const {
  if (!(lam > 0.0)) throw NumericError("lam must be positive");
  auto p = horizon_.point_at(s, ws.h);
  std::array<double, 5> x{p.emb.x[0], p.emb.x[1], p.emb.x[2], p.emb.x[3], lam};
  auto conn = glam_->connection_at(x, ws.m4);
  NormalData nd = normal_from(conn.g, p.emb, timelike_at(p.emb.x, ws));

  KFrameData kd;
  kd.z = nd.z;
  kd.u = nd.u;
  kd.X = p.X;
  kd.Y = p.Y;
  kd.Xs = p.Xs;
  kd.Ys = p.Ys;
  const double sz = std::sqrt(nd.z);
  kd.Zhat = p.Z / sz;
  kd.Zhats = Vec3::Zero();
  kd.Zhats[horizon_.generator()] = 1.0 / sz;

  // k(E_i, E_j) = g_lam(∂_i E_j + Γ E_i E_j, unit normal)
  Eigen::Matrix4d G = conn.g;
  Vec4 gn = G * nd.unit_normal;
  Eigen::Matrix3d kcoord;
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) {
      double acc = 0.0;
      for (int a = 0; a < 4; ++a) {
        double cov = p.emb.d2[a][i][j];
        for (int b = 0; b < 4; ++b) {
          for (int c = 0; c < 4; ++c) {
            cov += conn.christoffel(a, b, c) * p.emb.E(b, i) * p.emb.E(c, j);
          }
        }
        acc += cov * gn[a];
      }
      kcoord(i, j) = acc;
      kcoord(j, i) = acc;
    }
  }
  const Vec3 frame[3] = {kd.Xs, kd.Ys, kd.Zhats};
  for (int a = 0; a < 3; ++a) {
    for (int b = a; b < 3; ++b) {
      double v = frame[a].dot(kcoord * frame[b]);
      kd.k(a, b) = v;
      kd.k(b, a) = v;
    }
  }
  return kd;
}

Eigen::Matrix3d LambdaFamily::gauss_ricci(double lam, const Vec3& s,
                                          Workspace& ws) const {
  if (!(lam > 0.0)) throw NumericError("lam must be positive");
  KFrameData kd = second_fundamental_form(lam, s, ws);
  auto p = horizon_.point_at(s, ws.h);
  std::array<double, 5> x{p.emb.x[0], p.emb.x[1], p.emb.x[2], p.emb.x[3], lam};
  PointGeometry pg = glam_->geometry_at(x, ws.m4);
  NormalData nd = normal_from(pg.g, p.emb, timelike_at(p.emb.x, ws));

  const Vec4 frame[3] = {kd.X, kd.Y, kd.Zhat};
  Eigen::Matrix3d ric_frame, curv;
  for (int a = 0; a < 3; ++a) {
    for (int b = a; b < 3; ++b) {
      double r = frame[a].dot(Eigen::Matrix4d(pg.ricci) * frame[b]);
      double c = 0.0;
      for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
          for (int k2 = 0; k2 < 4; ++k2) {
            for (int l = 0; l < 4; ++l) {
              c += pg.riemann_low(i, j, k2, l) * nd.U[i] * frame[a][j] *
                   nd.U[k2] * frame[b][l];
            }
          }
        }
      }
      ric_frame(a, b) = ric_frame(b, a) = r;
      curv(a, b) = curv(b, a) = c / nd.u;
    }
  }
  const double trk = kd.trace();
  Eigen::Matrix3d ksq = kd.k * kd.k;
  return ric_frame + curv - trk * kd.k + ksq;
}

Eigen::Matrix3d LambdaFamily::intrinsic_ricci(double lam, const Vec3& s,
                                              Workspace& ws) const {
  if (!(lam > 0.0)) throw NumericError("lam must be positive");
  auto p = horizon_.point_at(s, ws.h);
  std::array<double, 4> sv{s[0], s[1], s[2], lam};
  PointGeometry pg = hlam_->geometry_at(sv, ws.m3);

  const int gen = horizon_.generator();
  const double z = pg.g(gen, gen);  // h(E_gen, E_gen) = g_lam(Z,Z)
  if (!(z > 0.0)) throw NumericError("family norm of the generator vanished");
  Vec3 zhat = Vec3::Zero();
  zhat[gen] = 1.0 / std::sqrt(z);

  Eigen::Matrix3d ric = pg.ricci;
  const Vec3 frame[3] = {p.Xs, p.Ys, zhat};
  Eigen::Matrix3d out;
  for (int a = 0; a < 3; ++a) {
    for (int b = a; b < 3; ++b) {
      double v = frame[a].dot(ric * frame[b]);
      out(a, b) = v;
      out(b, a) = v;
    }
  }
  return out;
}

double LambdaFamily::volume(double lam, int grid, int workers) const {
  if (grid < 8) throw std::invalid_argument("grid must be at least 8");
  const Embedding& emb = *scenario_.hypersurface;
  double cell = 1.0;
  double step[3];
  for (int i = 0; i < 3; ++i) {
    if (!emb.chart.periods[i]) {
      throw NumericError("volume needs a periodic surface chart");
    }
    step[i] = *emb.chart.periods[i] / grid;
    cell *= step[i];
  }
  const std::size_t total = static_cast<std::size_t>(grid) * grid * grid;
  std::vector<double> vals(total);
  const int nw = resolve_workers(workers);
  std::vector<MetricField::Workspace> wss(nw);
  parallel_for(total, nw, [&](int w, std::size_t idx) {
    const std::size_t c = idx % grid;
    const std::size_t b = (idx / grid) % grid;
    const std::size_t a = idx / (static_cast<std::size_t>(grid) * grid);
    std::array<double, 4> sv{(a + 0.5) * step[0], (b + 0.5) * step[1],
                             (c + 0.5) * step[2], lam};
    SmallMat h = hlam_->metric_values(sv, wss[w]);
    vals[idx] = std::sqrt(h.determinant());
  });
  double sum = 0.0;
  for (double v : vals) sum += v;
  return sum * cell;
}

double LambdaFamily::diameter(double lam, int grid, int workers) const {
  if (grid < 8) throw std::invalid_argument("grid must be at least 8");
  const Embedding& emb = *scenario_.hypersurface;
  double step[3];
  for (int i = 0; i < 3; ++i) {
    if (!emb.chart.periods[i]) {
      throw NumericError("diameter needs a periodic surface chart");
    }
    step[i] = *emb.chart.periods[i] / grid;
  }
  const int n = grid;
  const std::size_t nv = static_cast<std::size_t>(n) * n * n;

  // 13 canonical offsets cover the 26-neighborhood once per undirected edge.
  std::vector<std::array<int, 3>> offsets;
  for (int dx = -1; dx <= 1; ++dx) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dz = -1; dz <= 1; ++dz) {
        if (dx == 0 && dy == 0 && dz == 0) continue;
        if (dx > 0 || (dx == 0 && (dy > 0 || (dy == 0 && dz > 0)))) {
          offsets.push_back({dx, dy, dz});
        }
      }
    }
  }
  const std::size_t ne = offsets.size();

  std::vector<float> weight(nv * ne);
  const int nw = resolve_workers(workers);
  std::vector<MetricField::Workspace> wss(nw);
  parallel_for(nv, nw, [&](int w, std::size_t idx) {
    const int c = static_cast<int>(idx % n);
    const int b = static_cast<int>((idx / n) % n);
    const int a = static_cast<int>(idx / (static_cast<std::size_t>(n) * n));
    for (std::size_t e = 0; e < ne; ++e) {
      const auto& d = offsets[e];
      Vec3 delta(d[0] * step[0], d[1] * step[1], d[2] * step[2]);
      std::array<double, 4> mid{(a + 0.5 * d[0]) * step[0],
                                (b + 0.5 * d[1]) * step[1],
                                (c + 0.5 * d[2]) * step[2], lam};
      SmallMat h = hlam_->metric_values(mid, wss[w]);
      Eigen::Matrix3d hm = h;
      weight[idx * ne + e] =
          static_cast<float>(std::sqrt(delta.dot(hm * delta)));
    }
  });

  auto vertex = [&](int a, int b, int c) -> std::size_t {
    a = ((a % n) + n) % n;
    b = ((b % n) + n) % n;
    c = ((c % n) + n) % n;
    return (static_cast<std::size_t>(a) * n + b) * n + c;
  };

  // Deterministic source sample: the corners of the half-period lattice.
  std::vector<std::size_t> sources;
  for (int a : {0, n / 2}) {
    for (int b : {0, n / 2}) {
      for (int c : {0, n / 2}) sources.push_back(vertex(a, b, c));
    }
  }

  std::vector<double> ecc(sources.size(), 0.0);
  parallel_for(sources.size(), std::min<int>(nw, sources.size()),
               [&](int, std::size_t si) {
    std::vector<double> dist(nv, 1e300);
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    dist[sources[si]] = 0.0;
    pq.emplace(0.0, sources[si]);
    while (!pq.empty()) {
      auto [dcur, v] = pq.top();
      pq.pop();
      if (dcur > dist[v]) continue;
      const int c = static_cast<int>(v % n);
      const int b = static_cast<int>((v / n) % n);
      const int a = static_cast<int>(v / (static_cast<std::size_t>(n) * n));
      for (std::size_t e = 0; e < ne; ++e) {
        const auto& d = offsets[e];
        const std::size_t w1 = vertex(a + d[0], b + d[1], c + d[2]);
        const double wgt = weight[v * ne + e];
        if (dist[v] + wgt < dist[w1]) {
          dist[w1] = dist[v] + wgt;
          pq.emplace(dist[w1], w1);
        }
        // The reverse edge has the same midpoint weight.
        const std::size_t w2 = vertex(a - d[0], b - d[1], c - d[2]);
        const double wgt2 = weight[w2 * ne + e];
        if (dist[v] + wgt2 < dist[w2]) {
          dist[w2] = dist[v] + wgt2;
          pq.emplace(dist[w2], w2);
        }
      }
    }
    double m = 0.0;
    for (double dv : dist) m = std::max(m, dv);
    ecc[si] = m;
  });
  double diam = 0.0;
  for (double e : ecc) diam = std::max(diam, e);
  return diam;
}

HypothesisResult hypothesis_check(const Horizon& horizon, int grid,
                                  int workers) {
  auto pts = horizon.surface_grid(grid);
  struct Slot {
    double theta = 0.0, rzz = 0.0, rzx = 0.0;
  };
  std::vector<Slot> slots(pts.size());
  const int nw = resolve_workers(workers);
  std::vector<Horizon::Workspace> wss(nw);
  parallel_for(pts.size(), nw, [&](int w, std::size_t i) {
    Horizon::Workspace& ws = wss[w];
    auto p = horizon.point_at(pts[i], ws);
    slots[i].theta = std::abs(horizon.expansion(p));
    std::array<double, 4> x{p.emb.x[0], p.emb.x[1], p.emb.x[2], p.emb.x[3]};
    PointGeometry g4 = horizon.ambient().geometry_at(x, ws.metric);
    Eigen::Matrix4d ric = g4.ricci;
    slots[i].rzz = std::abs(p.Z.dot(ric * p.Z));
    double rzx = 0.0;
    for (int j = 0; j < 3; ++j) {
      rzx = std::max(rzx, std::abs(p.Z.dot(ric * p.emb.E.col(j))));
    }
    slots[i].rzx = rzx;
  });
  HypothesisResult res;
  for (const Slot& s : slots) {
    res.theta_sup = std::max(res.theta_sup, s.theta);
    res.rzz_sup = std::max(res.rzz_sup, s.rzz);
    res.rzx_sup = std::max(res.rzx_sup, s.rzx);
  }
  return res;
}

FitResult fit_loglog(std::span<const double> lams,
                     std::span<const double> values) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < lams.size(); ++i) {
    if (values[i] >= kZeroFloor) {
      xs.push_back(std::log(lams[i]));
      ys.push_back(std::log(values[i]));
    }
  }
  FitResult fit;
  if (xs.size() < 2) {
    fit.below_floor = true;
    return fit;
  }
  const std::size_t m = xs.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double denom = m * sxx - sx * sx;
  const double slope = (m * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / m;
  double rss = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = ys[i] - (slope * xs[i] + intercept);
    rss += r * r;
  }
  fit.exponent = slope;
  fit.residual = std::sqrt(rss / m);
  return fit;
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::kCollapseBoundedDiameter:
      return "COLLAPSE_BOUNDED_DIAMETER";
    case Verdict::kUnboundedCurvature:
      return "UNBOUNDED_CURVATURE";
    default:
      return "INCONCLUSIVE";
  }
}

Verdict decide_verdict(bool hypothesis_pass, const FitResult& curvature,
                       const FitResult& volume, double diameter_variation) {
  const bool curv_ok =
      curvature.below_floor ||
      (curvature.exponent && *curvature.exponent >= -0.05);
  const bool vol_ok =
      volume.below_floor || (volume.exponent && *volume.exponent >= 0.25);
  if (hypothesis_pass && curv_ok && vol_ok && diameter_variation <= 0.05) {
    return Verdict::kCollapseBoundedDiameter;
  }
  if (!curvature.below_floor && curvature.exponent &&
      *curvature.exponent <= -0.25 && curvature.residual < 0.1) {
    return Verdict::kUnboundedCurvature;
  }
  return Verdict::kInconclusive;
}

ScanReport scan(const Scenario& scenario, const ScanConfig& config) {
  if (!(config.lambda_start > 0.0) || config.lambda_start > 0.5) {
    throw std::invalid_argument("lambda-start must lie in (0, 0.5]");
  }
  if (!(config.lambda_factor > 0.0) || !(config.lambda_factor < 1.0)) {
    throw std::invalid_argument("lambda-factor must lie in (0, 1)");
  }
  if (config.lambda_count < 4) {
    throw std::invalid_argument("lambda-count must be at least 4");
  }
  if (config.grid < 8) {
    throw std::invalid_argument("grid must be at least 8");
  }

  ScanReport report;
  report.scenario = scenario.name;
  report.config = config;

  LambdaFamily family(scenario);
  const int nw = resolve_workers(config.workers);
  report.hypothesis = hypothesis_check(family.horizon(), config.grid, nw);

  std::vector<double> lams;
  for (int k = 0; k < config.lambda_count; ++k) {
    const double lam =
        config.lambda_start * std::pow(config.lambda_factor, k);
    if (lam < kLambdaFloor) {
      report.truncated = true;
      break;
    }
    lams.push_back(lam);
  }

  auto pts = family.horizon().surface_grid(config.grid);
  const int stride = std::max(1, config.grid / 6);

  for (double lam : lams) {
    struct Slot {
      double sup_ricci = 0.0, tr_k = 0.0, k_pq = 0.0, disc = 0.0;
    };
    std::vector<Slot> slots(pts.size());
    std::vector<LambdaFamily::Workspace> wss(nw);
    const int n = config.grid;
    parallel_for(pts.size(), nw, [&](int w, std::size_t i) {
      LambdaFamily::Workspace& ws = wss[w];
      Eigen::Matrix3d p = family.intrinsic_ricci(lam, pts[i], ws);
      KFrameData kd = family.second_fundamental_form(lam, pts[i], ws);
      Slot& sl = slots[i];
      sl.sup_ricci = p.cwiseAbs().maxCoeff();
      sl.tr_k = std::abs(kd.trace());
      sl.k_pq = std::max({std::abs(kd.k(0, 0)), std::abs(kd.k(0, 1)),
                          std::abs(kd.k(1, 1))});
      const int c = static_cast<int>(i % n);
      const int b = static_cast<int>((i / n) % n);
      const int a = static_cast<int>(i / (static_cast<std::size_t>(n) * n));
      if (a % stride == 0 && b % stride == 0 && c % stride == 0) {
        Eigen::Matrix3d pg = family.gauss_ricci(lam, pts[i], ws);
        sl.disc = (pg - p).cwiseAbs().maxCoeff();
      }
    });

    ScanRow row;
    row.lam = lam;
    for (const Slot& sl : slots) {
      row.sup_ricci = std::max(row.sup_ricci, sl.sup_ricci);
      row.sup_tr_k = std::max(row.sup_tr_k, sl.tr_k);
      row.sup_k_pq = std::max(row.sup_k_pq, sl.k_pq);
      row.gauss_vs_direct = std::max(row.gauss_vs_direct, sl.disc);
    }
    row.volume = family.volume(lam, config.grid, nw);
    row.diameter = family.diameter(lam, config.grid, nw);
    report.rows.push_back(row);
  }

  // Fits over the last half of the realized scan.
  const std::size_t count = report.rows.size();
  if (count >= 2) {
    const std::size_t window = (count + 1) / 2;
    const std::size_t begin = count - window;
    std::vector<double> wl, curv, vol, trk, kpq;
    double dmin = 1e300, dmax = 0.0;
    for (std::size_t i = begin; i < count; ++i) {
      const ScanRow& r = report.rows[i];
      wl.push_back(r.lam);
      curv.push_back(r.sup_ricci);
      vol.push_back(r.volume);
      trk.push_back(r.sup_tr_k);
      kpq.push_back(r.sup_k_pq);
      dmin = std::min(dmin, r.diameter);
      dmax = std::max(dmax, r.diameter);
    }
    report.fit_sup_curvature = fit_loglog(wl, curv);
    report.fit_volume = fit_loglog(wl, vol);
    report.fit_tr_k = fit_loglog(wl, trk);
    report.fit_k_pq = fit_loglog(wl, kpq);
    report.diameter_variation = dmin > 0.0 ? (dmax - dmin) / dmin : 0.0;
  }

  report.verdict =
      decide_verdict(report.hypothesis.pass(), report.fit_sup_curvature,
                     report.fit_volume, report.diameter_variation);
  return report;
}

}  // namespace nullcollapse
