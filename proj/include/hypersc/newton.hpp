#pragma once

// Newton direction and decrement, full and damped Newton steps, and a
// two-phase minimizer whose per-step guarantees are checked at runtime.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hypersc/calculus.hpp"
#include "hypersc/sc_analyzer.hpp"

namespace hypersc {

/// Entry threshold of the quadratic phase, as a multiple of 1/sigma.
inline constexpr double kQuadraticEntry = 0.38;

struct NewtonState {
  ProductPoint x;
  ProductTangent direction;
  Vec direction_coords;  ///< frame coordinates of the direction
  double decrement = 0.0;
  double value = 0.0;
  double residual = 0.0;  ///< ||H u + g|| / max(||g||, tiny)
};

/// u = -Hf^{-1} Df by Cholesky in frame coordinates; lambda = ||u||_{f,x}.
inline NewtonState newton_direction(const ScalarField& f, const ProductPoint& x) {
  const TangentFrame frame(x);
  const Mat h = f.hessian_matrix(frame);
  const Vec g = f.gradient(frame);
  Eigen::LLT<Mat> llt(h);
  if (llt.info() != Eigen::Success) throw DegeneracyError("newton_direction: Hessian is not positive definite");
  NewtonState s;
  s.x = x;
  s.direction_coords = -llt.solve(g);
  s.direction = frame.tangent(s.direction_coords);
  s.decrement = std::sqrt(std::max(0.0, -g.dot(s.direction_coords)));
  s.value = f.value(x);
  const double gn = g.norm();
  s.residual = gn > 0.0 ? (h * s.direction_coords + g).norm() / gn : 0.0;
  return s;
}

/// x+ = exp_x(u); DomainError if it leaves the domain.
inline ProductPoint newton_step(const ScalarField& f, const NewtonState& s) {
  ProductPoint y = exp(s.x, s.direction);
  if (!f.domain_contains(y)) throw DomainError("newton_step: full step leaves the domain (decrement too large)");
  return y;
}

inline ProductPoint newton_step(const ScalarField& f, const ProductPoint& x) {
  return newton_step(f, newton_direction(f, x));
}

/// x+ = exp_x(u / (1 + sigma lambda)).
inline ProductPoint damped_step(const ScalarField& f, const NewtonState& s, double sigma) {
  if (!(sigma > 0.0)) throw UsageError("damped_step: sigma must be positive");
  if (s.decrement == 0.0) return s.x;
  ProductPoint y = exp(s.x, (1.0 / (1.0 + sigma * s.decrement)) * s.direction);
  if (!f.domain_contains(y)) throw DomainError("damped_step: step left the domain (field is not sigma-SC?)");
  return y;
}

inline ProductPoint damped_step(const ScalarField& f, const ProductPoint& x, double sigma) {
  return damped_step(f, newton_direction(f, x), sigma);
}

enum class StepKind { Damped, Full };

inline const char* to_string(StepKind k) { return k == StepKind::Damped ? "damped" : "full"; }

struct TraceRecord {
  int iter = 0;
  double lambda = 0.0;  ///< decrement before the step
  double value = 0.0;   ///< value before the step
  StepKind kind = StepKind::Damped;
  double predicted = 0.0;  ///< bound on the next decrement (full) or on the descent (damped)
  double observed = 0.0;   ///< next decrement (full) or f(x) - f(x+) (damped)
  ProductPoint x;          ///< iterate before the step
};

struct SolveTrace {
  std::vector<TraceRecord> records;
  int damped_steps = 0;
  int full_steps = 0;
};

struct MinimizeOptions {
  std::optional<double> lower_bound;  ///< best-known lower bound on inf f, used for the damped cap
  double slack = 1e-9;
};

struct MinimizeResult {
  ProductPoint x;
  double decrement = 0.0;
  double value = 0.0;
  SolveTrace trace;
};

inline int damped_cap(double sigma, double f0, const std::optional<double>& lower_bound) {
  if (!lower_bound) return 100000;
  const double gap = std::max(0.0, f0 - *lower_bound);
  return 10 * static_cast<int>(std::ceil(sigma * sigma * gap / omega(kQuadraticEntry))) + 100;
}

/// Damped steps while lambda >= 0.38/sigma (and above target), then full
/// steps until lambda <= target. Throws ConvergenceError if a cap is hit or a
/// step violates its guaranteed bound.
inline MinimizeResult minimize(const ScalarField& f, const ProductPoint& x0, double sigma, double lambda_target,
                               const MinimizeOptions& opt = {}) {
  if (!(sigma > 0.0)) throw UsageError("minimize: sigma must be positive");
  if (!(lambda_target >= 0.0)) throw UsageError("minimize: lambda_target must be nonnegative");
  if (!f.domain_contains(x0)) throw DomainError("minimize: starting point outside the domain");
  MinimizeResult res;
  NewtonState s = newton_direction(f, x0);
  const double switch_at = kQuadraticEntry / sigma;
  const int dcap = damped_cap(sigma, s.value, opt.lower_bound);
  int iter = 0;

  while (s.decrement >= switch_at && s.decrement > lambda_target) {
    if (res.trace.damped_steps >= dcap) {
      throw ConvergenceError("minimize: damped phase exceeded " + std::to_string(dcap) + " iterations");
    }
    const double bound = omega(sigma * s.decrement) / (sigma * sigma);
    const ProductPoint y = damped_step(f, s, sigma);
    NewtonState next = newton_direction(f, y);
    const double descent = s.value - next.value;
    res.trace.records.push_back({iter++, s.decrement, s.value, StepKind::Damped, bound, descent, s.x});
    ++res.trace.damped_steps;
    if (descent < bound - opt.slack * std::max(1.0, std::abs(s.value))) {
      throw ConvergenceError("minimize: damped step descent " + std::to_string(descent) + " below omega bound " +
                             std::to_string(bound));
    }
    s = std::move(next);
  }

  while (s.decrement > lambda_target) {
    if (res.trace.full_steps >= 60) throw ConvergenceError("minimize: full Newton phase exceeded 60 iterations");
    const double sl = sigma * s.decrement;
    const double bound = sigma * s.decrement * s.decrement / ((1.0 - sl) * (1.0 - sl));
    const ProductPoint y = newton_step(f, s);
    NewtonState next = newton_direction(f, y);
    res.trace.records.push_back({iter++, s.decrement, s.value, StepKind::Full, bound, next.decrement, s.x});
    ++res.trace.full_steps;
    if (next.decrement > bound + opt.slack) {
      throw ConvergenceError("minimize: decrement " + std::to_string(next.decrement) +
                             " violates the quadratic bound " + std::to_string(bound));
    }
    s = std::move(next);
  }

  res.x = s.x;
  res.decrement = s.decrement;
  res.value = s.value;
  return res;
}

}  // namespace hypersc
