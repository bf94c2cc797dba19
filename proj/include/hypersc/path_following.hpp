#pragma once

// Short-step path-following for min l(x) over the closure of dom F, where l
// is affine on the Euclidean factor and F is a nu-self-concordant barrier.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hypersc/calculus.hpp"
#include "hypersc/newton.hpp"

namespace hypersc {

struct BarrierProblem {
  std::shared_ptr<const LinearObjectiveField> objective;
  FieldPtr barrier;
  double nu = 1.0;
  double sc_sigma = 1.0;
  /// A priori bound on l(x) - l* over the domain, if known; lets solve()
  /// stop after centering when epsilon is already met.
  std::optional<double> prior_gap;
};

struct PathParams {
  double beta = 1.0 / 9.0;

  double alpha() const {
    const double rb = std::sqrt(beta);
    return rb / (1.0 + rb) - beta;
  }
};

struct CentralPathState {
  ProductPoint x;
  double t = 0.0;
  double decrement = 0.0;  ///< ||D(t l + F)_x||*_{F,x}
  double gap_bound = std::numeric_limits<double>::infinity();
  double objective = 0.0;
};

struct PathRecord {
  int iter = 0;
  std::string phase;  ///< "centering" or "path"
  double t = 0.0;
  double lambda = 0.0;
  double objective = 0.0;
  std::optional<double> gap_bound;
};

using PathTrace = std::vector<PathRecord>;

/// (nu + (beta + sqrt nu) beta / (1 - beta)) / t
inline double gap_bound(double nu, double t, const PathParams& pp = {}) {
  if (!(t > 0.0)) throw UsageError("gap_bound: requires t > 0");
  const double b = pp.beta;
  return (nu + (b + std::sqrt(nu)) * b / (1.0 - b)) / t;
}

inline double gap_bound(const BarrierProblem& pb, const CentralPathState& st, const PathParams& pp = {}) {
  return gap_bound(pb.nu, st.t, pp);
}

namespace detail {

inline void check_problem(const BarrierProblem& pb) {
  if (!pb.objective || !pb.barrier) throw UsageError("BarrierProblem: objective and barrier are required");
  if (!(pb.nu >= 1.0)) throw UsageError("BarrierProblem: nu must be at least 1");
  if (!(pb.sc_sigma > 0.0)) throw UsageError("BarrierProblem: sc_sigma must be positive");
}

inline void check_params(const PathParams& pp) {
  if (!(pp.beta > 0.0) || !(pp.alpha() > 0.0)) {
    throw UsageError("PathParams: need 0 < beta < sqrt(beta)/(1+sqrt(beta))");
  }
}

}  // namespace detail

/// Damped Newton on F (sigma = 1 for a barrier) until lambda_F <= beta.
inline CentralPathState analytic_center(const BarrierProblem& pb, const ProductPoint& x_start,
                                        const PathParams& pp = {}, PathTrace* trace = nullptr) {
  detail::check_problem(pb);
  detail::check_params(pp);
  if (!pb.barrier->domain_contains(x_start)) throw DomainError("analytic_center: start point is not strictly feasible");
  const MinimizeResult r = minimize(*pb.barrier, x_start, pb.sc_sigma, pp.beta);
  CentralPathState st;
  st.x = r.x;
  st.t = 0.0;
  st.decrement = r.decrement;
  st.objective = pb.objective->value(r.x);
  if (trace) {
    for (const auto& rec : r.trace.records) {
      trace->push_back({rec.iter, "centering", 0.0, rec.lambda, pb.objective->value(rec.x), std::nullopt});
    }
    trace->push_back({static_cast<int>(r.trace.records.size()), "centering", 0.0, st.decrement, st.objective,
                      std::nullopt});
  }
  return st;
}

/// t+ = t + alpha / ||Dl||*, then one Newton step on t+ l + F.
inline CentralPathState pf_step(const BarrierProblem& pb, const CentralPathState& st, const PathParams& pp = {},
                                double slack = 1e-9) {
  detail::check_problem(pb);
  if (st.decrement > pp.beta + slack) throw UsageError("pf_step: state is not centered (decrement > beta)");
  const FieldPtr& F = pb.barrier;
  const TangentFrame frame(st.x);
  const Mat h = F->hessian_matrix(frame);
  const Vec gl = pb.objective->gradient(frame);
  Eigen::LLT<Mat> llt(h);
  if (llt.info() != Eigen::Success) throw DegeneracyError("pf_step: barrier Hessian is not positive definite");
  const double dn = std::sqrt(std::max(0.0, gl.dot(llt.solve(gl))));
  if (!(dn > 0.0)) throw UsageError("pf_step: objective differential vanishes");

  CentralPathState out;
  out.t = st.t + pp.alpha() / dn;
  const Vec u = -llt.solve(out.t * gl + F->gradient(frame));
  out.x = exp(st.x, frame.tangent(u));
  if (!F->domain_contains(out.x)) throw ConvergenceError("pf_step: Newton step left the barrier domain");

  const TangentFrame next(out.x);
  out.decrement = dual_norm(F->hessian_matrix(next), out.t * pb.objective->gradient(next) + F->gradient(next));
  out.objective = pb.objective->value(out.x);
  out.gap_bound = gap_bound(pb.nu, out.t, pp);
  if (out.decrement > pp.beta + slack) {
    throw ConvergenceError("pf_step: decrement " + std::to_string(out.decrement) + " exceeds beta after the step");
  }
  if (st.t > 0.0) {
    const double growth = 1.0 + pp.alpha() / (pp.beta + std::sqrt(pb.nu));
    if (out.t / st.t < growth - slack) {
      throw ConvergenceError("pf_step: t grew by " + std::to_string(out.t / st.t) + " < " + std::to_string(growth));
    }
  }
  return out;
}

struct PathResult {
  CentralPathState state;
  PathTrace trace;
  int centering_iterations = 0;
  int path_iterations = 0;
  double initial_dual_norm = 0.0;  ///< ||Dl_{x0}||*_{F,x0} at the centered start
  double iteration_bound = 0.0;
};

/// C sqrt(nu) log(nu ||Dl_{x0}||* / eps) + C with C = 50.
inline double path_iteration_bound(double nu, double dual_norm0, double epsilon) {
  const double lg = std::log(nu * dual_norm0 / epsilon);
  return 50.0 * std::sqrt(nu) * std::max(0.0, lg) + 50.0;
}

inline PathResult solve(const BarrierProblem& pb, const ProductPoint& x_start, double epsilon,
                        const PathParams& pp = {}) {
  if (!(epsilon > 0.0)) throw UsageError("solve: epsilon must be positive");
  PathResult res;
  res.state = analytic_center(pb, x_start, pp, &res.trace);
  res.centering_iterations = static_cast<int>(res.trace.size()) - 1;
  {
    const TangentFrame f(res.state.x);
    res.initial_dual_norm = dual_norm(pb.barrier->hessian_matrix(f), pb.objective->gradient(f));
  }
  res.iteration_bound = path_iteration_bound(pb.nu, res.initial_dual_norm, epsilon);
  if (pb.prior_gap && *pb.prior_gap <= epsilon) {
    res.state.gap_bound = *pb.prior_gap;
    return res;
  }
  const int cap = static_cast<int>(std::ceil(res.iteration_bound));
  while (!(res.state.gap_bound <= epsilon)) {
    if (res.path_iterations >= cap) {
      throw ConvergenceError("solve: path-following exceeded the iteration bound " + std::to_string(cap));
    }
    res.state = pf_step(pb, res.state, pp);
    ++res.path_iterations;
    res.trace.push_back({res.path_iterations, "path", res.state.t, res.state.decrement, res.state.objective,
                         res.state.gap_bound});
  }
  return res;
}

}  // namespace hypersc
