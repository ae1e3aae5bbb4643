#include "chartgeom.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace nullcollapse {

namespace {

std::string point_string(std::span<const double> v,
                         const std::vector<std::string>& names) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < v.size() && i < names.size(); ++i) {
    if (i) os << ", ";
    os << names[i] << "=" << v[i];
  }
  os << ")";
  return os.str();
}

}  // namespace

MetricSpec make_metric_spec(Chart chart, std::vector<Expr> upper,
                            SignatureTag signature) {
  const std::size_t n = chart.dim();
  if (upper.size() != n * (n + 1) / 2) {
    throw GeometryError("wrong number of metric components");
  }
  std::set<std::string> names(chart.coords.begin(), chart.coords.end());
  if (names.size() != n) {
    throw GeometryError("chart coordinate names must be distinct");
  }
  for (const auto& p : chart.periods) {
    if (p && *p <= 0.0) throw GeometryError("periods must be positive");
  }
  MetricSpec spec;
  spec.chart = std::move(chart);
  spec.signature = signature;
  spec.comp.assign(n * n, Expr::constant(0.0));
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      spec.comp[i * n + j] = upper[k];
      spec.comp[j * n + i] = upper[k];
      ++k;
    }
  }
  return spec;
}

MetricField::MetricField(MetricSpec spec, std::vector<std::string> extra_vars)
    : spec_(std::move(spec)) {
  const std::size_t n = spec_.chart.dim();
  vars_ = spec_.chart.coords;
  for (auto& v : extra_vars) vars_.push_back(std::move(v));

  // Upper-triangle components with symbolic first and second derivatives in
  // the chart coordinates.
  std::vector<Expr> vals, first, second;
  std::vector<std::vector<Expr>> dcomp;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a; b < n; ++b) {
      Expr gab = simplify(spec_.at(a, b));
      vals.push_back(gab);
      std::vector<Expr> d;
      for (std::size_t c = 0; c < n; ++c) {
        d.push_back(simplify(differentiate(gab, spec_.chart.coords[c])));
      }
      dcomp.push_back(std::move(d));
    }
  }
  for (const auto& d : dcomp) {
    for (const auto& e : d) first.push_back(e);
  }
  for (const auto& d : dcomp) {
    for (std::size_t c = 0; c < n; ++c) {
      for (std::size_t e = c; e < n; ++e) {
        second.push_back(simplify(differentiate(d[c], spec_.chart.coords[e])));
      }
    }
  }

  std::vector<Expr> conn_out = vals;
  conn_out.insert(conn_out.end(), first.begin(), first.end());
  std::vector<Expr> full_out = conn_out;
  full_out.insert(full_out.end(), second.begin(), second.end());

  values_tape_ = Tape(vals, vars_);
  conn_tape_ = Tape(conn_out, vars_);
  full_tape_ = Tape(full_out, vars_);
  scratch_size_ = std::max({values_tape_.slot_count(), conn_tape_.slot_count(),
                            full_tape_.slot_count()});
}

SmallMat MetricField::values_to_matrix(const double* vals) const {
  const int n = dim();
  SmallMat g(n, n);
  int k = 0;
  for (int a = 0; a < n; ++a) {
    for (int b = a; b < n; ++b) {
      g(a, b) = vals[k];
      g(b, a) = vals[k];
      ++k;
    }
  }
  return g;
}

void MetricField::check_metric(const SmallMat& g, double* det_out,
                               bool check_signature) const {
  const int n = dim();
  double scale = 0.0;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) scale = std::max(scale, std::abs(g(a, b)));
  }
  const double det = g.determinant();
  if (std::abs(det) <= 1e-12 * std::pow(std::max(scale, 1e-150), n)) {
    throw GeometryError("singular metric");
  }
  if (check_signature) {
    Eigen::SelfAdjointEigenSolver<SmallMat> es(g, Eigen::EigenvaluesOnly);
    int negatives = 0;
    for (int i = 0; i < n; ++i) {
      if (es.eigenvalues()[i] < 0.0) ++negatives;
    }
    const int expected = spec_.signature == SignatureTag::kLorentzian ? 1 : 0;
    if (negatives != expected) {
      throw GeometryError("metric signature does not match its tag (" +
                          std::to_string(negatives) + " negative eigenvalues)");
    }
  }
  if (det_out) *det_out = det;
}

SmallMat MetricField::metric_at(std::span<const double> v,
                                Workspace& ws) const {
  SmallMat g = metric_values(v, ws);
  check_metric(g, nullptr, true);
  return g;
}

SmallMat MetricField::metric_values(std::span<const double> v,
                                    Workspace& ws) const {
  if (v.size() != vars_.size()) {
    throw NumericError("point does not bind all chart coordinates at " +
                       point_string(v, vars_));
  }
  ws.slots.resize(scratch_size_);
  ws.out.resize(full_tape_.output_count());
  values_tape_.eval(v, ws.slots, ws.out);
  SmallMat g = values_to_matrix(ws.out.data());
  if (spec_.signature == SignatureTag::kRiemannian) {
    Eigen::LLT<SmallMat> llt(g);
    if (llt.info() != Eigen::Success) {
      throw GeometryError("metric is not positive definite at " +
                          point_string(v, vars_));
    }
  } else {
    double det = 0.0;
    check_metric(g, &det, false);
    if (det >= 0.0) {
      throw GeometryError(
          "Lorentzian metric has non-negative determinant at " +
          point_string(v, vars_));
    }
  }
  return g;
}

MetricField::Connection MetricField::connection_at(std::span<const double> v,
                                                   Workspace& ws) const {
  if (v.size() != vars_.size()) {
    throw NumericError("point does not bind all chart coordinates");
  }
  const int n = dim();
  ws.slots.resize(scratch_size_);
  ws.out.resize(full_tape_.output_count());
  conn_tape_.eval(v, ws.slots, ws.out);

  Connection conn;
  conn.g = values_to_matrix(ws.out.data());
  check_metric(conn.g, &conn.det, true);
  conn.ginv = conn.g.inverse();

  const int npairs = n * (n + 1) / 2;
  std::array<double, 64> dg{};
  {
    int k = 0;
    for (int a = 0; a < n; ++a) {
      for (int b = a; b < n; ++b) {
        for (int c = 0; c < n; ++c) {
          double val = ws.out[npairs + k * n + c];
          dg[(c * n + a) * n + b] = val;
          dg[(c * n + b) * n + a] = val;
        }
        ++k;
      }
    }
  }
  auto dgat = [&](int c, int a, int b) { return dg[(c * n + a) * n + b]; };
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      for (int c = b; c < n; ++c) {
        double sum = 0.0;
        for (int d = 0; d < n; ++d) {
          double first = 0.5 * (dgat(b, d, c) + dgat(c, d, b) - dgat(d, b, c));
          sum += conn.ginv(a, d) * first;
        }
        conn.gamma[(a * n + b) * n + c] = sum;
        conn.gamma[(a * n + c) * n + b] = sum;
      }
    }
  }
  return conn;
}

PointGeometry MetricField::assemble(const SmallMat& g, const double* dg,
                                    const double* ddg) const {
  const int n = dim();
  PointGeometry pg;
  pg.n = n;
  pg.g = g;
  check_metric(g, &pg.det, true);
  pg.ginv = g.inverse();

  auto dgat = [&](int c, int a, int b) { return dg[(c * n + a) * n + b]; };
  auto ddgat = [&](int c, int d, int a, int b) {
    return ddg[((c * n + d) * n + a) * n + b];
  };

  auto first = [&](int a, int b, int c) {
    return 0.5 * (dgat(b, a, c) + dgat(c, a, b) - dgat(a, b, c));
  };
  auto dfirst = [&](int d, int a, int b, int c) {
    return 0.5 * (ddgat(d, b, a, c) + ddgat(d, c, a, b) - ddgat(d, a, b, c));
  };

  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      for (int c = b; c < n; ++c) {
        double sum = 0.0;
        for (int e = 0; e < n; ++e) sum += pg.ginv(a, e) * first(e, b, c);
        pg.gamma[(a * n + b) * n + c] = sum;
        pg.gamma[(a * n + c) * n + b] = sum;
      }
    }
  }

  // ∂_d g^{ae} = −g^{af} (∂_d g_fh) g^{he}
  std::array<double, 64> dginv{};
  for (int d = 0; d < n; ++d) {
    for (int a = 0; a < n; ++a) {
      for (int e = 0; e < n; ++e) {
        double sum = 0.0;
        for (int f = 0; f < n; ++f) {
          for (int h = 0; h < n; ++h) {
            sum -= pg.ginv(a, f) * dgat(d, f, h) * pg.ginv(h, e);
          }
        }
        dginv[(d * n + a) * n + e] = sum;
      }
    }
  }

  std::array<double, 256> dgamma{};
  for (int d = 0; d < n; ++d) {
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        for (int c = b; c < n; ++c) {
          double sum = 0.0;
          for (int e = 0; e < n; ++e) {
            sum += dginv[(d * n + a) * n + e] * first(e, b, c) +
                   pg.ginv(a, e) * dfirst(d, e, b, c);
          }
          dgamma[((d * n + a) * n + b) * n + c] = sum;
          dgamma[((d * n + a) * n + c) * n + b] = sum;
        }
      }
    }
  }

  auto gam = [&](int a, int b, int c) { return pg.gamma[(a * n + b) * n + c]; };
  auto dgam = [&](int d, int a, int b, int c) {
    return dgamma[((d * n + a) * n + b) * n + c];
  };

  pg.ricci = SmallMat::Zero(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      for (int c = 0; c < n; ++c) {
        for (int d = 0; d < n; ++d) {
          double r = dgam(c, a, d, b) - dgam(d, a, c, b);
          for (int e = 0; e < n; ++e) {
            r += gam(a, c, e) * gam(e, d, b) - gam(a, d, e) * gam(e, c, b);
          }
          pg.riem[((a * n + b) * n + c) * n + d] = r;
        }
      }
    }
  }
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      for (int c = 0; c < n; ++c) {
        for (int d = 0; d < n; ++d) {
          double r = 0.0;
          for (int e = 0; e < n; ++e) {
            r += pg.g(a, e) * pg.riem[((e * n + b) * n + c) * n + d];
          }
          pg.riem_low[((a * n + b) * n + c) * n + d] = r;
        }
      }
    }
  }
  for (int b = 0; b < n; ++b) {
    for (int d = 0; d < n; ++d) {
      double r = 0.0;
      for (int a = 0; a < n; ++a) {
        r += pg.riem[((a * n + b) * n + a) * n + d];
      }
      pg.ricci(b, d) = r;
    }
  }
  return pg;
}

PointGeometry MetricField::geometry_at(std::span<const double> v,
                                       Workspace& ws) const {
  if (v.size() != vars_.size()) {
    throw NumericError("point does not bind all chart coordinates");
  }
  const int n = dim();
  ws.slots.resize(scratch_size_);
  ws.out.resize(full_tape_.output_count());
  full_tape_.eval(v, ws.slots, ws.out);

  SmallMat g = values_to_matrix(ws.out.data());
  const int npairs = n * (n + 1) / 2;
  ws.dg.assign(n * n * n, 0.0);
  ws.ddg.assign(n * n * n * n, 0.0);
  {
    int k = 0;
    for (int a = 0; a < n; ++a) {
      for (int b = a; b < n; ++b) {
        for (int c = 0; c < n; ++c) {
          double val = ws.out[npairs + k * n + c];
          ws.dg[(c * n + a) * n + b] = val;
          ws.dg[(c * n + b) * n + a] = val;
        }
        ++k;
      }
    }
    const int base = npairs + npairs * n;
    k = 0;
    for (int a = 0; a < n; ++a) {
      for (int b = a; b < n; ++b) {
        int q = 0;
        for (int c = 0; c < n; ++c) {
          for (int e = c; e < n; ++e) {
            double val = ws.out[base + k * npairs + q];
            for (auto [cc, ee] : {std::pair{c, e}, std::pair{e, c}}) {
              ws.ddg[((cc * n + ee) * n + a) * n + b] = val;
              ws.ddg[((cc * n + ee) * n + b) * n + a] = val;
            }
            ++q;
          }
        }
        ++k;
      }
    }
  }
  return assemble(g, ws.dg.data(), ws.ddg.data());
}

PointGeometry MetricField::fd_geometry_at(std::span<const double> v,
                                          double step, Workspace& ws) const {
  if (step <= 0.0) throw NumericError("finite-difference step must be > 0");
  const int n = dim();
  const int npairs = n * (n + 1) / 2;
  ws.slots.resize(scratch_size_);

  std::vector<double> p(v.begin(), v.end());
  auto eval_pairs = [&](std::vector<double>& dst) {
    dst.resize(npairs);
    values_tape_.eval(p, ws.slots, std::span<double>(dst));
  };

  std::vector<double> center;
  eval_pairs(center);
  SmallMat g = values_to_matrix(center.data());

  ws.dg.assign(n * n * n, 0.0);
  ws.ddg.assign(n * n * n * n, 0.0);

  std::vector<double> plus, minus, pp, pm, mp, mm;
  for (int c = 0; c < n; ++c) {
    p[c] = v[c] + step;
    eval_pairs(plus);
    p[c] = v[c] - step;
    eval_pairs(minus);
    p[c] = v[c];
    int k = 0;
    for (int a = 0; a < n; ++a) {
      for (int b = a; b < n; ++b) {
        double d1 = (plus[k] - minus[k]) / (2.0 * step);
        double d2 = (plus[k] - 2.0 * center[k] + minus[k]) / (step * step);
        ws.dg[(c * n + a) * n + b] = d1;
        ws.dg[(c * n + b) * n + a] = d1;
        ws.ddg[((c * n + c) * n + a) * n + b] = d2;
        ws.ddg[((c * n + c) * n + b) * n + a] = d2;
        ++k;
      }
    }
  }
  for (int c = 0; c < n; ++c) {
    for (int e = c + 1; e < n; ++e) {
      p[c] = v[c] + step;
      p[e] = v[e] + step;
      eval_pairs(pp);
      p[e] = v[e] - step;
      eval_pairs(pm);
      p[c] = v[c] - step;
      p[e] = v[e] + step;
      eval_pairs(mp);
      p[e] = v[e] - step;
      eval_pairs(mm);
      p[c] = v[c];
      p[e] = v[e];
      int k = 0;
      for (int a = 0; a < n; ++a) {
        for (int b = a; b < n; ++b) {
          double d2 = (pp[k] - pm[k] - mp[k] + mm[k]) / (4.0 * step * step);
          for (auto [cc, ee] : {std::pair{c, e}, std::pair{e, c}}) {
            ws.ddg[((cc * n + ee) * n + a) * n + b] = d2;
            ws.ddg[((cc * n + ee) * n + b) * n + a] = d2;
          }
          ++k;
        }
      }
    }
  }
  return assemble(g, ws.dg.data(), ws.ddg.data());
}

}  // namespace nullcollapse
