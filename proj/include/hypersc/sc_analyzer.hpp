#pragma once

// Numerical certification of self-concordance: ratio evaluation, seeded
// adversarial sampling with analytic extremal probes, barrier-parameter,
// Dikin-ellipsoid and transport-comparison checks, and the tightness scan
// for the ball barrier.
//
// Samplers keep the evaluation point within unit distance of the apex and
// place the pole at the requested distance from it (the fields involved are
// isometry invariant), so far-from-pole samples stay well conditioned.

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "hypersc/calculus.hpp"

namespace hypersc {

using Rng = std::mt19937_64;

// ---------------------------------------------------------------------------
// Ratios

/// |nabla_v Hf(u,u)| / (2 Hf(v,v)^{1/2} Hf(u,u)) in frame coordinates.
inline double sc_ratio(const ScalarField& f, const TangentFrame& frame, const Mat& hessian, const Vec& u,
                       const Vec& v) {
  const double huu = u.dot(hessian * u);
  const double hvv = v.dot(hessian * v);
  if (!(huu > 0.0) || !(hvv > 0.0)) throw DegeneracyError("sc_ratio: Hessian is not positive definite");
  const double t = u.dot(f.hessian_derivative_matrix(frame, v) * u);
  return std::abs(t) / (2.0 * std::sqrt(hvv) * huu);
}

/// |nabla_u Hf(u,u)| / (2 Hf(u,u)^{3/2}) in frame coordinates.
inline double wsc_ratio(const ScalarField& f, const TangentFrame& frame, const Mat& hessian, const Vec& u) {
  const double huu = u.dot(hessian * u);
  if (!(huu > 0.0)) throw DegeneracyError("wsc_ratio: Hessian is not positive definite");
  const double t = u.dot(f.hessian_derivative_matrix(frame, u) * u);
  return std::abs(t) / (2.0 * huu * std::sqrt(huu));
}

inline double sc_ratio(const ScalarField& f, const ProductPoint& x, const ProductTangent& u, const ProductTangent& v) {
  const TangentFrame frame(x);
  return sc_ratio(f, frame, f.hessian_matrix(frame), frame.coords(u), frame.coords(v));
}

inline double wsc_ratio(const ScalarField& f, const ProductPoint& x, const ProductTangent& u) {
  const TangentFrame frame(x);
  return wsc_ratio(f, frame, f.hessian_matrix(frame), frame.coords(u));
}

// ---------------------------------------------------------------------------
// Analytic constants

/// Tight SC constant sqrt(kappa)/2 of the squared distance.
inline double sqdist_sc_bound(double kappa) { return 0.5 * std::sqrt(kappa); }

/// Tight WSC constant sqrt(4 kappa / 27) of the squared distance.
inline double sqdist_wsc_bound(double kappa) { return std::sqrt(4.0 * kappa / 27.0); }

/// SC constant of -log(beta - f) for sigma-SC f with infimum f_star.
inline double log_barrier_sc_bound(double sigma, double beta, double f_star) {
  const double a = sigma * std::sqrt(beta - f_star) + 1.0;
  return std::sqrt(a * a + 9.0 / 4.0);
}

/// SC constant of the ball barrier -log(R^2 - d(p,x)^2).
inline double ball_barrier_sc_bound(double radius, double kappa) {
  return log_barrier_sc_bound(sqdist_sc_bound(kappa), 0.5 * radius * radius, 0.0);
}

/// omega(t) = t - log(1 + t)
inline double omega(double t) { return t - std::log1p(t); }
/// omega_*(t) = -t - log(1 - t)
inline double omega_star(double t) { return -t - std::log1p(-t); }

/// Closed-form extremal SC ratio of the squared distance at unit distance l.
inline double sqdist_sc_probe_value(double l) { return (l - phi(l)) * std::tanh(l) / (2.0 * l); }

/// Closed-form extremal WSC ratio of the squared distance at unit distance l.
inline double sqdist_wsc_probe_value(double l) {
  return std::abs(-3.0 / l - std::tanh(l) + 3.0 / std::tanh(l)) / std::sqrt(27.0);
}

// ---------------------------------------------------------------------------
// Sampling

struct SampleCase {
  FieldPtr field;
  ProductPoint x;
};

using CaseSampler = std::function<SampleCase(Rng&)>;

struct SamplerConfig {
  std::uint64_t seed = 0;
  std::size_t samples = 100000;
  double lmin = 0.01;  ///< unit-curvature distance range l = sqrt(kappa) d
  double lmax = 50.0;
  int dim = 2;
  double kappa = 1.0;
  std::size_t batch = 2048;
  unsigned threads = 0;  ///< 0: HYPERSC_THREADS or hardware concurrency
};

inline unsigned default_thread_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("HYPERSC_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) n = std::min<unsigned>(n, static_cast<unsigned>(v));
  }
  return n;
}

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

inline Vec unit_coords(Rng& rng, int n) {
  std::normal_distribution<double> nd;
  Vec v(n);
  do {
    for (int i = 0; i < n; ++i) v[i] = nd(rng);
  } while (v.norm() == 0.0);
  return v / v.norm();
}

/// Point within unit-curvature distance `radius` of the apex.
inline HPoint near_apex(Rng& rng, int dim, double kappa, double radius = 1.0) {
  const HPoint o = HPoint::apex(dim, kappa);
  const TangentFrame f{ProductPoint(o)};
  const Vec c = unit_coords(rng, dim) * (radius * uniform01(rng) / std::sqrt(kappa));
  return exp(o, f.tangent(c).h);
}

/// exp_x of a unit-curvature displacement l along frame direction `dir`.
inline HPoint displaced(const HPoint& x, const Vec& dir, double l) {
  const TangentFrame f{ProductPoint(x)};
  return exp(x, f.tangent(dir * (l / std::sqrt(x.kappa()))).h);
}

inline double log_uniform(Rng& rng, double lo, double hi) {
  return std::exp(std::log(lo) + uniform01(rng) * (std::log(hi) - std::log(lo)));
}

/// Squared distance with the pole at log-uniform distance in [lmin, lmax].
inline CaseSampler sqdist_sampler(const SamplerConfig& cfg) {
  return [cfg](Rng& rng) {
    const HPoint x = near_apex(rng, cfg.dim, cfg.kappa);
    const double l = log_uniform(rng, cfg.lmin, cfg.lmax);
    const HPoint pole = displaced(x, unit_coords(rng, cfg.dim), l);
    return SampleCase{make_sqdist(pole), ProductPoint(x)};
  };
}

/// Ball barrier F_{p,R}; the relative slack 1 - d^2/R^2 is log-uniform in [1e-6, 1].
inline CaseSampler ball_barrier_sampler(double radius, const SamplerConfig& cfg) {
  return [radius, cfg](Rng& rng) {
    const HPoint x = near_apex(rng, cfg.dim, cfg.kappa);
    const double slack = log_uniform(rng, 1e-6, 1.0);
    const double d = radius * std::sqrt(1.0 - slack);
    const HPoint pole = displaced(x, unit_coords(rng, cfg.dim), d * std::sqrt(cfg.kappa));
    return SampleCase{make_ball_barrier(pole, radius), ProductPoint(x)};
  };
}

/// Fixed field, points drawn by `points`.
inline CaseSampler fixed_field_sampler(FieldPtr field, std::function<ProductPoint(Rng&)> points) {
  return [field = std::move(field), points = std::move(points)](Rng& rng) { return SampleCase{field, points(rng)}; };
}

// ---------------------------------------------------------------------------
// Certification

struct Witness {
  ProductPoint x;
  Vec u;  ///< frame coordinates
  Vec v;
  double ratio = 0.0;
  std::string source;  ///< "sample" or "probe"
};

struct ProbeCase {
  FieldPtr field;
  ProductPoint x;
  Vec u;  ///< frame coordinates at x
  Vec v;
  Vec w;  ///< WSC direction
  double l = 0.0;
};

struct ProbeValue {
  double l = 0.0;
  double sc = 0.0;
  double wsc = 0.0;
};

struct SCReport {
  double max_sc_ratio = 0.0;
  double max_wsc_ratio = 0.0;
  Witness sc_witness;
  Witness wsc_witness;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::vector<ProbeValue> probes;
};

namespace detail {

struct BatchResult {
  double sc = -1.0;
  double wsc = -1.0;
  Witness sc_w;
  Witness wsc_w;
};

inline BatchResult run_batch(const CaseSampler& sampler, std::uint64_t seed, std::size_t count) {
  Rng rng(seed);
  BatchResult r;
  for (std::size_t i = 0; i < count; ++i) {
    const SampleCase c = sampler(rng);
    const TangentFrame frame(c.x);
    const Mat h = c.field->hessian_matrix(frame);
    const int n = frame.dim();
    const Vec u = unit_coords(rng, n);
    const Vec v = unit_coords(rng, n);
    const double s = sc_ratio(*c.field, frame, h, u, v);
    const double w = wsc_ratio(*c.field, frame, h, u);
    if (s > r.sc) r.sc_w = {c.x, u, v, s, "sample"}, r.sc = s;
    // u = v is also an SC candidate, so max_wsc <= max_sc always holds.
    if (w > r.sc) r.sc_w = {c.x, u, u, w, "sample"}, r.sc = w;
    if (w > r.wsc) r.wsc_w = {c.x, u, u, w, "sample"}, r.wsc = w;
  }
  return r;
}

}  // namespace detail

/// Seeded search for sup sc_ratio and sup wsc_ratio. Batches get derived
/// seeds and are reduced in order, so the report does not depend on the
/// number of threads.
inline SCReport certify(const CaseSampler& sampler, const SamplerConfig& cfg,
                        const std::vector<ProbeCase>& probes = {}) {
  const std::size_t batch = std::max<std::size_t>(1, cfg.batch);
  const std::size_t nbatches = (cfg.samples + batch - 1) / batch;
  std::vector<detail::BatchResult> results(nbatches);
  const unsigned nthreads = std::max(1u, std::min<unsigned>(cfg.threads ? cfg.threads : default_thread_count(),
                                                            static_cast<unsigned>(std::max<std::size_t>(1, nbatches))));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (std::size_t b = next++; b < nbatches && !failed; b = next++) {
      try {
        const std::size_t count = std::min(batch, cfg.samples - b * batch);
        results[b] = detail::run_batch(sampler, splitmix64(cfg.seed ^ splitmix64(b)), count);
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
      }
    }
  };
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  SCReport rep;
  rep.samples = cfg.samples;
  rep.seed = cfg.seed;
  rep.max_sc_ratio = -1.0;
  rep.max_wsc_ratio = -1.0;
  for (const auto& r : results) {
    if (r.sc > rep.max_sc_ratio) rep.max_sc_ratio = r.sc, rep.sc_witness = r.sc_w;
    if (r.wsc > rep.max_wsc_ratio) rep.max_wsc_ratio = r.wsc, rep.wsc_witness = r.wsc_w;
  }
  for (const auto& p : probes) {
    const TangentFrame frame(p.x);
    const Mat h = p.field->hessian_matrix(frame);
    ProbeValue pv{p.l, sc_ratio(*p.field, frame, h, p.u, p.v), wsc_ratio(*p.field, frame, h, p.w)};
    if (pv.sc > rep.max_sc_ratio) rep.max_sc_ratio = pv.sc, rep.sc_witness = {p.x, p.u, p.v, pv.sc, "probe"};
    if (pv.wsc > rep.max_sc_ratio) rep.max_sc_ratio = pv.wsc, rep.sc_witness = {p.x, p.w, p.w, pv.wsc, "probe"};
    if (pv.wsc > rep.max_wsc_ratio) rep.max_wsc_ratio = pv.wsc, rep.wsc_witness = {p.x, p.w, p.w, pv.wsc, "probe"};
    rep.probes.push_back(pv);
  }
  rep.max_sc_ratio = std::max(rep.max_sc_ratio, 0.0);
  rep.max_wsc_ratio = std::max(rep.max_wsc_ratio, 0.0);
  return rep;
}

/// Extremal direction pair for a ProbeSpec (l, theta, phi, alpha): with
/// g the unit radial direction at x, u = cos(theta) g + sin(theta) e2 and
/// v = cos(phi) g + sin(phi)(cos(alpha) e2 + sin(alpha) e3).
struct ProbeSpec {
  double l = 1.0;
  double theta = 0.0;
  double phi = 0.0;
  double alpha = 0.0;
};

struct ProbeDirections {
  SampleCase where;
  Vec u;
  Vec v;
};

/// Squared-distance configuration at x = apex with the pole at unit distance spec.l.
inline ProbeDirections sqdist_probe_directions(const ProbeSpec& spec, int dim, double kappa) {
  if (dim < 2) throw UsageError("probe: dimension must be at least 2");
  const HPoint x = HPoint::apex(dim, kappa);
  // Pole behind x along -e1, so the radial direction at x is +e1.
  Vec back = Vec::Zero(dim);
  back[0] = -1.0;
  const HPoint pole = displaced(x, back, spec.l);
  Vec g = Vec::Zero(dim), e2 = Vec::Zero(dim), e3 = Vec::Zero(dim);
  g[0] = 1.0;
  e2[1] = 1.0;
  if (dim >= 3) e3[2] = 1.0;
  const double sa = dim >= 3 ? std::sin(spec.alpha) : 0.0;
  const double ca = dim >= 3 ? std::cos(spec.alpha) : (std::cos(spec.alpha) >= 0 ? 1.0 : -1.0);
  Vec u = std::cos(spec.theta) * g + std::sin(spec.theta) * e2;
  Vec v = std::cos(spec.phi) * g + std::sin(spec.phi) * (ca * e2 + sa * e3);
  return {{make_sqdist(pole), ProductPoint(x)}, u, v};
}

/// The extremal choices: phi = pi/2,
/// tan^2 theta = 1/(l coth l), alpha = 0 for SC; u = v with
/// tan^2 theta = 2/(l coth l) for WSC.
inline ProbeCase sqdist_probe(double l, int dim, double kappa) {
  const double c = z_coth_z(l);
  const double pi = std::acos(-1.0);
  const auto sc = sqdist_probe_directions({l, std::atan(std::sqrt(1.0 / c)), pi / 2, 0.0}, dim, kappa);
  const auto ws = sqdist_probe_directions({l, std::atan(std::sqrt(2.0 / c)), 0.0, 0.0}, dim, kappa);
  return {sc.where.field, sc.where.x, sc.u, sc.v, ws.u, l};
}

/// Geometric grid of probe distances.
inline std::vector<double> probe_grid(double lo = 0.01, double hi = 300.0, int points = 61) {
  std::vector<double> out;
  for (int i = 0; i < points; ++i) {
    out.push_back(std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (points - 1)));
  }
  return out;
}

inline std::vector<ProbeCase> sqdist_probes(int dim, double kappa, const std::vector<double>& grid = probe_grid()) {
  std::vector<ProbeCase> out;
  for (double l : grid) out.push_back(sqdist_probe(l, dim, kappa));
  return out;
}

/// Squared distance on H^dim: random samples plus the analytic probes.
inline SCReport certify_sqdist(const SamplerConfig& cfg) {
  return certify(sqdist_sampler(cfg), cfg, sqdist_probes(cfg.dim, cfg.kappa));
}

// ---------------------------------------------------------------------------
// Barrier parameter

struct BarrierParameterResult {
  bool passed = true;
  double worst_ratio = 0.0;  ///< max DF(u)^2 / HF(u,u) = (||DF||*)^2
  ProductPoint witness;
};

/// sup_u DF(u)^2/HF(u,u) equals the squared dual norm of DF, evaluated exactly.
inline BarrierParameterResult barrier_parameter_check(const CaseSampler& sampler, double nu, std::size_t samples,
                                                      std::uint64_t seed) {
  Rng rng(seed);
  BarrierParameterResult res;
  for (std::size_t i = 0; i < samples; ++i) {
    const SampleCase c = sampler(rng);
    const TangentFrame frame(c.x);
    const Vec g = c.field->gradient(frame);
    double ratio = 0.0;
    if (g.norm() > 0.0) {
      const double dn = dual_norm(c.field->hessian_matrix(frame), g);
      ratio = dn * dn;
    }
    if (ratio > res.worst_ratio || i == 0) res.worst_ratio = ratio, res.witness = c.x;
  }
  res.passed = res.worst_ratio <= nu * (1.0 + 1e-9) + 1e-9;
  return res;
}

// ---------------------------------------------------------------------------
// Transport comparison and Dikin checks

/// Matrix of tau_{x->y} from frame(x) coordinates to frame(y) coordinates.
inline Mat transport_matrix(const TangentFrame& from, const TangentFrame& to) {
  const int n = from.dim();
  Mat p(n, n);
  for (int i = 0; i < n; ++i) {
    const ProductTangent b = from.tangent(Vec::Unit(n, i));
    p.col(i) = to.coords(parallel_transport(from.point(), to.point(), b));
  }
  return p;
}

/// tau^* Hf_{gamma(t)} pulled back to frame(gamma(0)) coordinates.
inline Mat pulled_back_hessian(const ScalarField& f, const TangentFrame& base, const ProductPoint& y) {
  const TangentFrame at(y);
  const Mat p = transport_matrix(base, at);
  return p.transpose() * f.hessian_matrix(at) * p;
}

/// Real eigenvalues (ascending) of H0^{-1} M for symmetric M and SPD H0.
inline Vec relative_eigenvalues(const Mat& h0, const Mat& m) {
  Eigen::LLT<Mat> llt(h0);
  if (llt.info() != Eigen::Success) throw DegeneracyError("relative_eigenvalues: Hessian is not positive definite");
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()), h0);
  return es.eigenvalues();
}

struct TransportComparison {
  double r = 0.0;  ///< ||gamma'(0)||_{f,gamma(0)}
  Vec eigenvalues;
  double lower = 0.0;
  double upper = 0.0;
  bool within = true;
};

/// Eigenvalues of Hf_{gamma(0)}^{-1} tau^* Hf_{gamma(1)} for gamma(t) = exp_x(t u),
/// checked against [(1 - sigma r)^2, (1 - sigma r)^{-2}].
inline TransportComparison transport_comparison(const ScalarField& f, double sigma, const ProductPoint& x,
                                                const ProductTangent& u, double slack = 1e-9) {
  const TangentFrame base(x);
  const Mat h0 = f.hessian_matrix(base);
  TransportComparison out;
  out.r = local_norm(h0, base.coords(u));
  if (!(sigma * out.r < 1.0)) throw UsageError("transport_comparison: requires ||u||_f < 1/sigma");
  const ProductPoint y = exp(x, u);
  if (!f.domain_contains(y)) throw DomainError("transport_comparison: geodesic leaves the domain");
  out.eigenvalues = relative_eigenvalues(h0, pulled_back_hessian(f, base, y));
  const double q = 1.0 - sigma * out.r;
  out.lower = q * q;
  out.upper = 1.0 / (q * q);
  out.within = out.eigenvalues.minCoeff() >= out.lower * (1.0 - slack) &&
               out.eigenvalues.maxCoeff() <= out.upper * (1.0 + slack);
  return out;
}

/// Gauss-Legendre nodes and weights on [0, 1] (Golub-Welsch).
inline std::pair<Vec, Vec> gauss_legendre_unit(int n) {
  Mat j = Mat::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    j(k, k - 1) = j(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(j);
  Vec nodes = (es.eigenvalues().array() + 1.0) / 2.0;
  Vec weights = es.eigenvectors().row(0).transpose().array().square();  // sums to 1 on [0,1]
  return {nodes, weights};
}

/// int_0^1 tau_t^* Hf_{gamma(t)} dt in frame(x) coordinates (64-point Gauss-Legendre).
inline Mat integrated_pulled_back_hessian(const ScalarField& f, const ProductPoint& x, const ProductTangent& u,
                                          int nodes = 64) {
  const TangentFrame base(x);
  const auto [t, w] = gauss_legendre_unit(nodes);
  Mat acc = Mat::Zero(base.dim(), base.dim());
  for (int k = 0; k < nodes; ++k) acc += w[k] * pulled_back_hessian(f, base, exp(x, t[k] * u));
  return acc;
}

struct DikinCheck {
  double r = 0.0;
  bool inside = true;       ///< exp_x(u) in the domain
  bool velocity_ok = true;  ///< ||gamma'(1)||_f within [r/(1+sr), r/(1-sr)]
  bool df_ok = true;        ///< Df growth bounds
  bool value_ok = true;     ///< omega / omega_* value bounds
  bool eigen_ok = true;     ///< transport comparison interval
  bool integral_ok = true;  ///< integrated comparison interval
  std::string violation;

  bool ok() const { return inside && velocity_ok && df_ok && value_ok && eigen_ok && integral_ok; }
};

namespace detail {

inline bool le(double a, double b, double slack) { return a <= b + slack * std::max(1.0, std::abs(b)); }

}  // namespace detail

/// Dikin-ellipsoid membership and the geodesic growth bounds of a sigma-SC
/// field along gamma(t) = exp_x(t u), ||u||_{f,x} < 1/sigma.
inline DikinCheck dikin_step_check(const ScalarField& f, double sigma, const ProductPoint& x, const ProductTangent& u,
                                   double slack = 1e-9, bool with_integral = false) {
  DikinCheck out;
  const TangentFrame base(x);
  const Mat h0 = f.hessian_matrix(base);
  const Vec uc = base.coords(u);
  const double r = local_norm(h0, uc);
  out.r = r;
  if (!(sigma * r < 1.0)) throw UsageError("dikin_step_check: requires ||u||_f < 1/sigma");
  const ProductPoint y = exp(x, u);
  if (!f.domain_contains(y)) {
    out.inside = false;
    out.violation = "exp_x(u) outside the domain";
    return out;
  }
  if (r == 0.0) return out;
  const TangentFrame top(y);
  const Mat h1 = f.hessian_matrix(top);
  const Vec vel = top.coords(parallel_transport(x, y, u));
  const double r1 = local_norm(h1, vel);
  const double sr = sigma * r;
  if (!(detail::le(r / (1 + sr), r1, slack) && detail::le(r1, r / (1 - sr), slack))) {
    out.velocity_ok = false;
    out.violation = "velocity norm outside [r/(1+sr), r/(1-sr)]";
  }
  const double d0 = f.gradient(base).dot(uc);
  const double d1 = f.gradient(top).dot(vel);
  if (!(detail::le(r * r / (1 + sr), d1 - d0, slack) && detail::le(d1 - d0, r * r / (1 - sr), slack))) {
    out.df_ok = false;
    out.violation = "Df growth outside [r^2/(1+sr), r^2/(1-sr)]";
  }
  const double f0 = f.value(x), f1 = f.value(y);
  const double lo = f0 + d0 + omega(sr) / (sigma * sigma);
  const double hi = f0 + d0 + omega_star(sr) / (sigma * sigma);
  if (!(detail::le(lo, f1, slack) && detail::le(f1, hi, slack))) {
    out.value_ok = false;
    out.violation = "value outside omega / omega_* bounds";
  }
  const Vec ev = relative_eigenvalues(h0, transport_matrix(base, top).transpose() * h1 * transport_matrix(base, top));
  if (!(detail::le((1 - sr) * (1 - sr), ev.minCoeff(), slack) && detail::le(ev.maxCoeff(), 1 / ((1 - sr) * (1 - sr)), slack))) {
    out.eigen_ok = false;
    out.violation = "transport eigenvalue outside [(1-sr)^2, (1-sr)^-2]";
  }
  if (with_integral) {
    const Vec iv = relative_eigenvalues(h0, integrated_pulled_back_hessian(f, x, u));
    if (!(detail::le(1 - sr + sr * sr / 3, iv.minCoeff(), slack) && detail::le(iv.maxCoeff(), 1 / (1 - sr), slack))) {
      out.integral_ok = false;
      out.violation = "integrated eigenvalue outside [1-sr+(sr)^2/3, 1/(1-sr)]";
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sum rule and barrier constant

/// Sampled check that sc_ratio(a f1 + b f2) <= max(s1/sqrt(a), s2/sqrt(b)).
inline bool sum_rule_check(const FieldPtr& f1, double s1, const FieldPtr& f2, double s2, double a, double b,
                           const std::function<ProductPoint(Rng&)>& points, std::size_t samples, std::uint64_t seed,
                           double* worst = nullptr) {
  if (!(a > 0.0) || !(b > 0.0)) throw UsageError("sum_rule_check: weights must be positive");
  const WeightedSumField sum({{a, f1}, {b, f2}});
  const double bound = std::max(s1 / std::sqrt(a), s2 / std::sqrt(b));
  Rng rng(seed);
  double mx = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const ProductPoint x = points(rng);
    const TangentFrame frame(x);
    const Mat h = sum.hessian_matrix(frame);
    mx = std::max(mx, sc_ratio(sum, frame, h, unit_coords(rng, frame.dim()), unit_coords(rng, frame.dim())));
  }
  if (worst) *worst = mx;
  return mx <= bound + 1e-9;
}

struct BarrierConstantCheck {
  double bound = 0.0;
  double sampled_max = 0.0;
  bool passed = true;
};

/// Sampled sc_ratio of the ball barrier against the log-barrier constant.
inline BarrierConstantCheck barrier_sc_constant_check(double radius, const SamplerConfig& cfg) {
  BarrierConstantCheck out;
  out.bound = ball_barrier_sc_bound(radius, cfg.kappa);
  out.sampled_max = certify(ball_barrier_sampler(radius, cfg), cfg).max_sc_ratio;
  out.passed = out.sampled_max <= out.bound + 1e-9;
  return out;
}

// ---------------------------------------------------------------------------
// Tightness of the ball barrier

struct TightnessPoint {
  double radius = 0.0;
  double wsc = 0.0;          ///< measured wsc_ratio of F_{p,R} at the extremal configuration
  double lower_bound = 0.0;          ///< closed-form lower bound on wsc
  double third_derivative_lower_bound = 0.0;  ///< lower bound on |nabla_u HF(u,u)| / HF(u,u)^{3/2} (twice the ratio)
  double upper_bound = 0.0;          ///< log-barrier SC constant
};

/// wsc_ratio of F_{p,R} (kappa = 1) at d(p,x)^2 = R^2/2 in the direction with
/// tan^2 theta = ((w + l^2)/w) tanh(l)/l, w = R^2/2 - l^2/2.
inline TightnessPoint tightness_point(double radius, int dim = 2) {
  if (!(radius > 0.0)) throw UsageError("tightness_scan: radius must be positive");
  const double l = radius / std::sqrt(2.0);
  const double w = 0.5 * radius * radius - 0.5 * l * l;
  const double tan2 = ((w + l * l) / w) * std::tanh(l) / l;
  const HPoint x = HPoint::apex(dim);
  Vec back = Vec::Zero(dim);
  back[0] = -1.0;
  const HPoint pole = displaced(x, back, l);
  const auto field = make_ball_barrier(pole, radius);
  const TangentFrame frame{ProductPoint(x)};
  const double th = std::atan(std::sqrt(tan2));
  Vec u = Vec::Zero(dim);
  u[0] = std::cos(th);
  u[1] = std::sin(th);
  TightnessPoint out;
  out.radius = radius;
  out.wsc = wsc_ratio(*field, frame, field->hessian_matrix(frame), u);
  // The bound estimates |nabla_u HF(u,u)| / HF(u,u)^{3/2}, i.e. twice the ratio.
  const double r2 = radius * radius, l2 = l * l;
  out.third_derivative_lower_bound = (r2 - l2) / (4.0 * std::sqrt(r2 + l2)) *
                                std::abs(2.0 * std::tanh(l) - 3.0 * phi(l) * std::tanh(l) / l) -
                            5.0 / std::pow(2.0, 1.5);
  out.lower_bound = 0.5 * out.third_derivative_lower_bound;
  out.upper_bound = ball_barrier_sc_bound(radius, 1.0);
  return out;
}

inline std::vector<TightnessPoint> tightness_scan(const std::vector<double>& radii, int dim = 2) {
  std::vector<TightnessPoint> out;
  for (double r : radii) out.push_back(tightness_point(r, dim));
  return out;
}

}  // namespace hypersc
