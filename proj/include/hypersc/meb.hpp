#pragma once

// Minimum enclosing ball of points in H^n via the barrier formulation
//   min s  s.t.  d(p_i, x)^2 <= s <= R^2  on H^n x R,
// plus a farthest-point geodesic iteration used as an independent oracle.
//
// The solver works on the unit-curvature sheet (same ambient coordinates,
// distances multiplied by sqrt(kappa)) and converts results back.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "hypersc/calculus.hpp"
#include "hypersc/path_following.hpp"
#include "hypersc/sc_analyzer.hpp"

namespace hypersc {

struct MebInstance {
  std::vector<HPoint> points;
  double kappa = 1.0;
  double epsilon = 1e-5;
};

struct MebSolution {
  HPoint center;
  double radius = 0.0;
  double s = 0.0;                ///< squared radius variable (kappa units)
  double gap_certificate = 0.0;  ///< s - s* <= gap_certificate (kappa units)
  double radius_certificate = 0.0;  ///< sqrt(s) - r* <= radius_certificate
  int centering_iterations = 0;
  int path_iterations = 0;
  double epsilon_prime = 0.0;  ///< target gap on s at unit curvature
  double alpha0 = 0.0;         ///< ||(0,1)||*_F at the centered start
  double nu = 0.0;
  double big_r = 0.0;          ///< R = 2 max d(p_i, p_j), unit curvature
  double k = 0.0;
  PathTrace trace;
  std::string method = "path-following";
};

struct MebProblem {
  BarrierProblem problem;
  std::vector<HPoint> unit_points;
  double big_r = 0.0;
  double k = 0.0;
  double nu = 0.0;
  double dmin = 0.0;
  double dmax = 0.0;
  ProductPoint start;
};

namespace detail {

inline void validate_instance(const MebInstance& inst) {
  if (inst.points.empty()) throw UsageError("MEB: at least one point is required");
  if (!(inst.kappa > 0.0)) throw UsageError("MEB: kappa must be positive");
  const int n = inst.points.front().dim();
  for (std::size_t i = 0; i < inst.points.size(); ++i) {
    if (inst.points[i].dim() != n) {
      throw UsageError("MEB: point " + std::to_string(i) + " has dimension " + std::to_string(inst.points[i].dim()) +
                       ", expected " + std::to_string(n));
    }
    if (inst.points[i].kappa() != inst.kappa) {
      throw UsageError("MEB: point " + std::to_string(i) + " has a different curvature");
    }
  }
}

inline std::vector<HPoint> to_unit(const std::vector<HPoint>& pts) {
  std::vector<HPoint> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.emplace_back(p.coords(), 1.0);
  return out;
}

}  // namespace detail

/// K = sqrt(2^{-1/2} (R + 1)^2 + 9/4)
inline double meb_term_constant(double big_r) { return std::sqrt(std::pow(2.0, -0.5) * (big_r + 1) * (big_r + 1) + 2.25); }

/// Barrier sum_i K^2 (-log(s - d(p_i,x)^2)) - log(R^2 - s), objective s,
/// nu = m K^2 + 1, start (p_1, R^2/2). Requires m >= 2 distinct points.
inline MebProblem build_problem(const MebInstance& inst) {
  detail::validate_instance(inst);
  const std::size_t m = inst.points.size();
  if (m < 2) throw UsageError("MEB: build_problem needs at least two points");
  MebProblem mp;
  mp.unit_points = detail::to_unit(inst.points);
  mp.dmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const double d = distance(mp.unit_points[i], mp.unit_points[j]);
      if (!(d > 1e-12)) {
        throw UsageError("MEB: points " + std::to_string(i) + " and " + std::to_string(j) + " coincide");
      }
      mp.dmin = std::min(mp.dmin, d);
      mp.dmax = std::max(mp.dmax, d);
    }
  }
  mp.big_r = 2.0 * mp.dmax;
  mp.k = meb_term_constant(mp.big_r);
  mp.nu = static_cast<double>(m) * mp.k * mp.k + 1.0;

  const auto s_coord = std::make_shared<AffineField>(Vec::Ones(1));
  std::vector<WeightedSumField::Term> terms;
  for (const auto& p : mp.unit_points) {
    // d(p,x)^2 - s < 0
    auto inner = std::make_shared<WeightedSumField>(
        std::vector<WeightedSumField::Term>{{2.0, make_sqdist(p)}, {-1.0, s_coord}});
    terms.push_back({mp.k * mp.k, std::make_shared<LogBarrierField>(inner, 0.0)});
  }
  terms.push_back({1.0, make_upper_bound_barrier(1, 0, mp.big_r * mp.big_r)});

  mp.problem.objective = s_coord;
  mp.problem.barrier = std::make_shared<WeightedSumField>(std::move(terms));
  mp.problem.nu = mp.nu;
  mp.problem.sc_sigma = 1.0;
  mp.problem.prior_gap = mp.big_r * mp.big_r;  // 0 <= s* and s < R^2
  Vec s0(1);
  s0 << 0.5 * mp.big_r * mp.big_r;
  mp.start = ProductPoint(mp.unit_points.front(), s0);
  return mp;
}

/// Strictly feasible (x, s) for the MEB barrier: x within dmax of a random
/// input point, s log-uniformly close to either end of (max_i d^2, R^2).
inline CaseSampler meb_interior_sampler(const MebProblem& mp) {
  return [mp](Rng& rng) {
    const int n = mp.unit_points.front().dim();
    for (;;) {
      const auto i = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(mp.unit_points.size()));
      const HPoint& base = mp.unit_points[std::min(i, mp.unit_points.size() - 1)];
      const HPoint x = displaced(base, unit_coords(rng, n), mp.dmax * uniform01(rng));
      double dm = 0.0;
      for (const auto& p : mp.unit_points) dm = std::max(dm, distance(x, p));
      const double lo = dm * dm, hi = mp.big_r * mp.big_r;
      if (!(lo < hi)) continue;
      const double frac = log_uniform(rng, 1e-6, 1.0 - 1e-6);
      const double s = uniform01(rng) < 0.5 ? lo + frac * (hi - lo) : hi - frac * (hi - lo);
      const ProductPoint y(x, Vec::Constant(1, s));
      if (mp.problem.barrier->domain_contains(y)) return SampleCase{mp.problem.barrier, y};
    }
  };
}

/// Gap target on s at unit curvature: min(eps/dmin, eps^2, eps dmax).
/// The last term guarantees sqrt(s) - r* <= eps because sqrt(s) + r* >= dmax.
inline double meb_epsilon_prime(double eps, double dmin, double dmax) {
  return std::min({eps / dmin, eps * eps, eps * dmax});
}

inline MebSolution single_point_solution(const MebInstance& inst) {
  MebSolution sol;
  sol.center = inst.points.front();
  return sol;
}

inline MebSolution solve(const MebInstance& inst, const PathParams& pp = {}) {
  detail::validate_instance(inst);
  if (!(inst.epsilon > 0.0)) throw UsageError("MEB: epsilon must be positive");
  if (inst.points.size() == 1) return single_point_solution(inst);
  const MebProblem mp = build_problem(inst);
  const double sk = std::sqrt(inst.kappa);
  const double eps1 = inst.epsilon * sk;

  MebSolution sol;
  sol.big_r = mp.big_r;
  sol.k = mp.k;
  sol.nu = mp.nu;
  sol.epsilon_prime = meb_epsilon_prime(eps1, mp.dmin, mp.dmax);

  // sqrt(s) < R, so eps >= R is met by any feasible point: stop after centering.
  const bool trivial = eps1 >= mp.big_r;
  const double target = trivial ? std::max(sol.epsilon_prime, *mp.problem.prior_gap) : sol.epsilon_prime;
  const PathResult pr = hypersc::solve(mp.problem, mp.start, target, pp);

  const double s1 = pr.state.x.e[0];
  const double gap1 = pr.state.gap_bound;
  sol.center = HPoint(pr.state.x.h.coords(), inst.kappa);
  sol.s = s1 / inst.kappa;
  sol.radius = std::sqrt(sol.s);
  sol.gap_certificate = gap1 / inst.kappa;
  sol.radius_certificate = (trivial ? std::min(mp.big_r, gap1 / mp.dmax) : gap1 / mp.dmax) / sk;
  sol.centering_iterations = pr.centering_iterations;
  sol.path_iterations = pr.path_iterations;
  sol.alpha0 = pr.initial_dual_norm;
  // Trace in kappa units: s scales by 1/kappa, t by kappa (t s is invariant).
  sol.trace = pr.trace;
  for (auto& r : sol.trace) {
    r.t *= inst.kappa;
    r.objective /= inst.kappa;
    if (r.gap_bound) *r.gap_bound /= inst.kappa;
  }
  return sol;
}

/// Farthest-point iteration x_{k+1} = exp_{x_k}(log_{x_k}(p_far) / (k + 2)),
/// started at p_1; radius is the max distance at the final iterate.
inline MebSolution oracle_solve(const MebInstance& inst, long iterations) {
  detail::validate_instance(inst);
  if (iterations < 0) throw UsageError("oracle_solve: iterations must be nonnegative");
  MebSolution sol;
  sol.method = "oracle";
  HPoint x = inst.points.front();
  auto farthest = [&](const HPoint& c, double* dist) {
    std::size_t best = 0;
    double bd = -1.0;
    for (std::size_t i = 0; i < inst.points.size(); ++i) {
      const double d = distance(c, inst.points[i]);
      if (d > bd) bd = d, best = i;
    }
    *dist = bd;
    return best;
  };
  for (long k = 0; k < iterations; ++k) {
    double d = 0.0;
    const std::size_t f = farthest(x, &d);
    if (d == 0.0) break;
    x = exp(x, (1.0 / static_cast<double>(k + 2)) * log(x, inst.points[f]));
  }
  double r = 0.0;
  farthest(x, &r);
  sol.center = x;
  sol.radius = r;
  sol.s = r * r;
  sol.path_iterations = static_cast<int>(std::min<long>(iterations, std::numeric_limits<int>::max()));
  return sol;
}

}  // namespace hypersc
