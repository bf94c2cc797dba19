#pragma once

// Seeded batch checks of closed-form derivatives against finite differences
// and of the curvature identity, shared by the CLI and the acceptance suite.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "hypersc/calculus.hpp"
#include "hypersc/sc_analyzer.hpp"

namespace hypersc {

struct DerivativeCheckConfig {
  int dim = 2;
  double kappa = 1.0;
  std::size_t samples = 1000;
  std::uint64_t seed = 0;
  double lmin = 0.01;  ///< unit-curvature distance from x to the pole
  double lmax = 20.0;
};

struct DerivativeWitness {
  std::string quantity;  ///< "Df", "Hf", "nablaHf" or "nablaHf_mixed"
  double closed_form = 0.0;
  double finite_difference = 0.0;
  double rel_err = 0.0;
  double l = 0.0;
  std::size_t sample = 0;
};

struct DerivativeCheckReport {
  double max_err_d1 = 0.0;
  double max_err_d2 = 0.0;
  double max_err_d3 = 0.0;
  double max_err_mixed = 0.0;
  DerivativeWitness worst;
  std::size_t samples = 0;

  double max_err() const { return std::max({max_err_d1, max_err_d2, max_err_d3, max_err_mixed}); }
};

inline double relative_error(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1.0}); }

/// Squared distance on H^dim: Df(u), Hf(u,u), (nabla_u Hf)(u,u) against the
/// finite-difference oracle and (nabla_v Hf)(u,u) against the transported
/// closed-form Hessian, for unit u, v.
inline DerivativeCheckReport derivative_check(const DerivativeCheckConfig& cfg) {
  if (cfg.dim < 2) throw UsageError("derivative_check: dim must be at least 2");
  if (!(cfg.kappa > 0.0)) throw UsageError("derivative_check: kappa must be positive");
  Rng rng(splitmix64(cfg.seed));
  DerivativeCheckReport rep;
  rep.samples = cfg.samples;
  auto note = [&](double& slot, const char* what, double cf, double fd, double l, std::size_t i) {
    const double e = relative_error(cf, fd);
    slot = std::max(slot, e);
    if (e > rep.worst.rel_err || rep.worst.quantity.empty()) rep.worst = {what, cf, fd, e, l, i};
  };
  for (std::size_t i = 0; i < cfg.samples; ++i) {
    const HPoint x = near_apex(rng, cfg.dim, cfg.kappa);
    const double l = log_uniform(rng, cfg.lmin, cfg.lmax);
    const auto f = make_sqdist(displaced(x, unit_coords(rng, cfg.dim), l));
    const ProductPoint px(x);
    const TangentFrame frame(px);
    const Vec uc = unit_coords(rng, cfg.dim);
    const Vec vc = unit_coords(rng, cfg.dim);
    const ProductTangent u = frame.tangent(uc), v = frame.tangent(vc);
    const Mat h = f->hessian_matrix(frame);
    note(rep.max_err_d1, "Df", f->gradient(frame).dot(uc), fd_oracle(*f, px, u, 1), l, i);
    note(rep.max_err_d2, "Hf", uc.dot(h * uc), fd_oracle(*f, px, u, 2), l, i);
    note(rep.max_err_d3, "nablaHf", uc.dot(f->hessian_derivative_matrix(frame, uc) * uc), fd_oracle(*f, px, u, 3), l,
         i);
    note(rep.max_err_mixed, "nablaHf_mixed", uc.dot(f->hessian_derivative_matrix(frame, vc) * uc),
         hessian_transport_derivative(*f, px, u, v), l, i);
  }
  return rep;
}

struct CurvatureCheckReport {
  double max_defect = 0.0;  ///< relative to the size of the terms
  std::size_t samples = 0;
};

/// curvature_defect for unit u, v, w, divided by max(1, |sum of term sizes|).
inline CurvatureCheckReport curvature_check(const CaseSampler& sampler, std::size_t samples, std::uint64_t seed) {
  Rng rng(splitmix64(seed));
  CurvatureCheckReport rep;
  rep.samples = samples;
  for (std::size_t i = 0; i < samples; ++i) {
    const SampleCase c = sampler(rng);
    const TangentFrame frame(c.x);
    const int n = frame.dim();
    const Vec uc = unit_coords(rng, n), vc = unit_coords(rng, n), wc = unit_coords(rng, n);
    const ProductTangent u = frame.tangent(uc), v = frame.tangent(vc), w = frame.tangent(wc);
    const double a = std::abs(vc.dot(c.field->hessian_derivative_matrix(frame, uc) * wc));
    const double b = std::abs(uc.dot(c.field->hessian_derivative_matrix(frame, vc) * wc));
    const double r = std::abs(c.field->gradient(frame).dot(frame.coords(curvature_apply(c.x, u, v, w))));
    const double defect = std::abs(curvature_defect(*c.field, c.x, u, v, w)) / std::max(1.0, a + b + r);
    rep.max_defect = std::max(rep.max_defect, defect);
  }
  return rep;
}

}  // namespace hypersc
