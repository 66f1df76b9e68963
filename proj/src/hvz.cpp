#include "bdf/hvz.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bdf {

const CurvePoint* EnergyCurve::find(double q, double tol) const {
  for (const auto& p : points)
    if (std::abs(p.q - q) <= tol) return &p;
  return nullptr;
}

namespace {

CurvePoint solve_point(const Model& model, ScfConfig cfg, double q, Mat& state, bool warm) {
  CurvePoint p;
  p.q = q;
  cfg.target_charge = q;
  try {
    ScfResult r = minimize_charge(model, cfg, warm ? &state : nullptr);
    p.energy = r.report.energy;
    p.mu = r.report.mu;
    p.residual = r.report.residual;
    p.iterations = r.report.iterations;
    p.converged = r.report.converged;
    state = std::move(r.Q);
  } catch (const std::exception& e) {
    p.error = e.what();
    p.energy = std::nan("");
  }
  return p;
}

}  // namespace

EnergyCurve scan_energies(const Model& model, std::vector<double> q_list, const ScfConfig& cfg) {
  std::sort(q_list.begin(), q_list.end());
  q_list.erase(std::unique(q_list.begin(), q_list.end(),
                           [](double a, double b) { return std::abs(a - b) <= 1e-9; }),
               q_list.end());
  EnergyCurve curve;
  curve.alpha = model.alpha;
  curve.nu_charge = model.nuclei.total_charge();

  std::vector<double> up, down;
  for (double q : q_list) (q >= 0.0 ? up : down).push_back(q);
  std::reverse(down.begin(), down.end());

  Mat start = Mat::Zero(model.dim(), model.dim());
  Mat origin = start;
  bool have_start = false, have_origin = false;
  for (double q : up) {
    curve.points.push_back(solve_point(model, cfg, q, start, have_start));
    have_start = curve.points.back().error.empty();
    if (q == 0.0 && have_start) {
      origin = start;
      have_origin = true;
    }
  }
  have_start = have_origin;
  for (double q : down) {
    curve.points.push_back(solve_point(model, cfg, q, origin, have_start));
    have_start = curve.points.back().error.empty();
  }
  std::sort(curve.points.begin(), curve.points.end(),
            [](const CurvePoint& a, const CurvePoint& b) { return a.q < b.q; });
  return curve;
}

double point_tolerance(const CurvePoint& p) {
  // The energy error of a stationary point is quadratic in the residual; the floor covers
  // the rounding of the energy sum itself.
  return 1e-10 * std::max(1.0, std::abs(p.energy)) + p.residual;
}

BoundsReport check_bounds(const EnergyCurve& curve, double m, double g0_zero, double alpha,
                          double nu_self) {
  BoundsReport rep;
  for (const auto& p : curve.points) {
    BoundRow r;
    r.q = p.q;
    r.energy = p.energy;
    r.lower = (1.0 - alpha * kPi / 4.0) * m * std::abs(p.q) - 0.5 * alpha * nu_self;
    r.upper = g0_zero * std::abs(p.q);
    const double tol = point_tolerance(p);
    r.lower_ok = p.error.empty() && p.energy >= r.lower - tol;
    r.upper_ok = p.error.empty() && p.energy <= r.upper + tol;
    rep.all_ok = rep.all_ok && r.lower_ok && r.upper_ok;
    rep.rows.push_back(r);
  }
  return rep;
}

ShapeReport check_concavity_and_lipschitz(const EnergyCurve& curve, double lipschitz_constant) {
  ShapeReport rep;
  rep.lipschitz_constant = lipschitz_constant;
  std::vector<const CurvePoint*> pts;
  for (const auto& p : curve.points)
    if (p.error.empty()) pts.push_back(&p);

  for (std::size_t i = 0; i + 2 < pts.size(); ++i) {
    const CurvePoint &a = *pts[i], &b = *pts[i + 1], &c = *pts[i + 2];
    // All three inside one closed interval [K, K + 1].
    const double K = std::floor(a.q + 1e-12);
    if (c.q > K + 1.0 + 1e-12) continue;
    const double left = (b.energy - a.energy) / (b.q - a.q);
    const double right = (c.energy - b.energy) / (c.q - b.q);
    const double tol = (point_tolerance(a) + 2.0 * point_tolerance(b) + point_tolerance(c)) *
                       (1.0 / (b.q - a.q) + 1.0 / (c.q - b.q));
    const double excess = right - left - tol;
    ++rep.triples_checked;
    if (right - left > rep.max_concavity_violation) rep.max_concavity_violation = right - left;
    if (excess > 0.0) rep.concave = false;
  }
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double dq = std::abs(pts[j]->q - pts[i]->q);
      const double de = std::abs(pts[j]->energy - pts[i]->energy);
      rep.max_lipschitz_ratio = std::max(rep.max_lipschitz_ratio, de / dq);
      if (de > lipschitz_constant * dq + point_tolerance(*pts[i]) + point_tolerance(*pts[j]))
        rep.lipschitz = false;
    }
  return rep;
}

BindingReport check_binding(const EnergyCurve& curve, const EnergyCurve& free_curve, int N,
                            const std::vector<int>& window) {
  BindingReport rep;
  rep.N = N;
  const CurvePoint* en = curve.find(N);
  if (!en || !en->error.empty()) throw ConfigError("binding check needs E(N) on the scanned curve");
  rep.energy = en->energy;
  for (int K : window) {
    if (K == 0) continue;
    const CurvePoint* rest = curve.find(N - K);
    const CurvePoint* fr = free_curve.find(K);
    if (!rest || !fr) {
      std::ostringstream os;
      os << "binding window K=" << K << " exceeds the scanned range";
      throw ConfigError(os.str());
    }
    if (!rest->error.empty() || !fr->error.empty()) throw NonConvergence("binding check on a failed point");
    BindingRow r;
    r.K = K;
    r.e_rest = rest->energy;
    r.e_free = fr->energy;
    r.margin = rest->energy + fr->energy - en->energy;
    r.tolerance = point_tolerance(*rest) + point_tolerance(*fr) + point_tolerance(*en);
    r.strict = r.margin > r.tolerance;
    r.subadditive = r.margin >= -r.tolerance;
    rep.bound = rep.bound && r.strict;
    rep.subadditive = rep.subadditive && r.subadditive;
    rep.rows.push_back(r);
  }
  return rep;
}

std::vector<int> default_binding_window(int N) {
  std::vector<int> w;
  for (int K = -2; K <= N + 2; ++K)
    if (K != 0) w.push_back(K);
  return w;
}

PairSuppression check_pair_suppression(double g0_zero, double m, double alpha, double nu_self, int N) {
  if (N < 0) throw ConfigError("pair suppression needs N >= 0");
  PairSuppression p;
  p.lhs = (g0_zero - m) * N + alpha * (m * (N + 2) * kPi / 4.0 + 0.5 * nu_self);
  p.rhs = 2.0 * m;
  p.margin = p.rhs - p.lhs;
  p.holds = p.margin > 0.0;
  if (p.holds) {
    for (int K = 1; K <= N; ++K) p.window.push_back(K);
  } else {
    p.window = default_binding_window(N);
  }
  return p;
}

HvzAnalysis analyze_hvz(const Model& model, const Model& free_model, int N, std::vector<double> q_grid,
                        const ScfConfig& cfg, double g0_zero) {
  HvzAnalysis a;
  const double m = model.mass_gap;
  a.pair = check_pair_suppression(g0_zero, m, model.alpha, model.nu_self, N);
  std::vector<double> free_q;
  for (int K : a.pair.window) {
    q_grid.push_back(double(N - K));
    free_q.push_back(double(K));
  }
  q_grid.push_back(double(N));
  a.curve = scan_energies(model, q_grid, cfg);
  a.free_curve = scan_energies(free_model, free_q, cfg);
  a.bounds = check_bounds(a.curve, m, g0_zero, model.alpha, model.nu_self);
  a.shape = check_concavity_and_lipschitz(a.curve, g0_zero);
  a.binding = check_binding(a.curve, a.free_curve, N, a.pair.window);
  return a;
}

}  // namespace bdf
