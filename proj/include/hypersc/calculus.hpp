#pragma once

// Scalar fields on H^n x R^k with exact first, second and third covariant
// derivatives. All matrix-valued quantities are expressed in the orthonormal
// coordinates of TangentFrame (i.e. tangent_basis(x)).

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "hypersc/hyperboloid.hpp"

namespace hypersc {

/// z coth z, with its Taylor series near 0.
inline double z_coth_z(double z) {
  z = std::abs(z);
  if (z < 1e-2) {
    const double z2 = z * z;
    return 1.0 + z2 / 3.0 - z2 * z2 / 45.0 + 2.0 * z2 * z2 * z2 / 945.0;
  }
  return z / std::tanh(z);
}

/// Phi(z) = (z coth z)' = coth z + z - z coth^2 z = coth z - z / sinh^2 z.
inline double phi(double z) {
  if (z < 1e-2) {
    const double z2 = z * z;
    return z * (2.0 / 3.0 - 4.0 * z2 / 45.0 + 12.0 * z2 * z2 / 945.0 - 8.0 * z2 * z2 * z2 / 4725.0);
  }
  const double s = std::sinh(z);
  return 1.0 / std::tanh(z) - z / (s * s);
}

/// Linear functional p(u) = <riesz, u> in the local Riemannian metric.
struct Covector {
  ProductPoint base;
  ProductTangent riesz;

  double operator()(const ProductTangent& u) const { return inner(riesz, u); }
};

/// Symmetric bilinear form on T_x, stored in tangent_basis(x) coordinates.
struct HessianForm {
  std::shared_ptr<const TangentFrame> frame;
  Mat matrix;

  double operator()(const ProductTangent& u, const ProductTangent& w) const {
    return frame->coords(u).dot(matrix * frame->coords(w));
  }
};

/// Smooth function on (a subset of) H^n x R^k.
///
/// Implementations provide coordinates in a TangentFrame:
///   gradient(F)_i           = Df(b_i)
///   hessian_matrix(F)_ij    = Hf(b_i, b_j)
///   hessian_derivative(F,v) = (nabla_v Hf)(b_i, b_j), v in frame coordinates
class ScalarField {
 public:
  virtual ~ScalarField() = default;

  virtual bool domain_contains(const ProductPoint& x) const = 0;
  virtual double value(const ProductPoint& x) const = 0;
  virtual Vec gradient(const TangentFrame& frame) const = 0;
  virtual Mat hessian_matrix(const TangentFrame& frame) const = 0;
  virtual Mat hessian_derivative_matrix(const TangentFrame& frame, const Vec& v) const = 0;

  Covector differential(const ProductPoint& x) const {
    const TangentFrame frame(x);
    return {x, frame.tangent(gradient(frame))};
  }

  HessianForm hessian(const ProductPoint& x) const {
    auto frame = std::make_shared<const TangentFrame>(x);
    Mat m = hessian_matrix(*frame);
    return {frame, std::move(m)};
  }

  /// The form (u,w) -> (nabla_v Hf)(u,w) at x.
  HessianForm hessian_derivative(const ProductPoint& x, const ProductTangent& v) const {
    auto frame = std::make_shared<const TangentFrame>(x);
    Mat m = hessian_derivative_matrix(*frame, frame->coords(v));
    return {frame, std::move(m)};
  }

 protected:
  void require_domain(const ProductPoint& x, const char* what) const {
    if (!domain_contains(x)) throw DomainError(std::string(what) + ": point outside the field's domain");
  }
};

using FieldPtr = std::shared_ptr<const ScalarField>;

/// f(x) = d(p, x_h)^2 / 2, acting on the hyperbolic factor.
class SquaredDistanceField final : public ScalarField {
 public:
  explicit SquaredDistanceField(HPoint pole) : pole_(std::move(pole)) {}

  const HPoint& pole() const { return pole_; }

  bool domain_contains(const ProductPoint& x) const override {
    return x.h.dim() == pole_.dim() && x.h.kappa() == pole_.kappa();
  }

  double value(const ProductPoint& x) const override {
    const double d = distance(pole_, x.h);
    return 0.5 * d * d;
  }

  Vec gradient(const TangentFrame& frame) const override {
    const Geometry g = geometry(frame);
    Vec out = Vec::Zero(frame.dim());
    out.head(frame.hdim()) = (g.l / std::sqrt(frame.kappa())) * g.dir;
    return out;
  }

  Mat hessian_matrix(const TangentFrame& frame) const override {
    const Geometry g = geometry(frame);
    const int n = frame.hdim();
    Mat out = Mat::Zero(frame.dim(), frame.dim());
    const double c = z_coth_z(g.l);
    out.topLeftCorner(n, n) = c * Mat::Identity(n, n) + (1.0 - c) * g.dir * g.dir.transpose();
    return out;
  }

  Mat hessian_derivative_matrix(const TangentFrame& frame, const Vec& v) const override {
    const Geometry g = geometry(frame);
    const int n = frame.hdim();
    Mat out = Mat::Zero(frame.dim(), frame.dim());
    if (g.l == 0.0) return out;
    // Lorentz coordinates of v's hyperbolic part.
    const Vec vl = std::sqrt(frame.kappa()) * v.head(n);
    const double a = g.dir.dot(vl);
    const double ph = phi(g.l);
    const Mat ggt = g.dir * g.dir.transpose();
    out.topLeftCorner(n, n) = ph * a * (Mat::Identity(n, n) - ggt) +
                              (g.l - ph) * (2.0 * a * ggt - g.dir * vl.transpose() - vl * g.dir.transpose());
    return out;
  }

  /// Unit direction of the geodesic from the pole, arriving at x, in Lorentz
  /// frame coordinates, and the unit-curvature distance l = sqrt(kappa) d.
  struct Geometry {
    double l = 0.0;
    Vec dir;
  };

  Geometry geometry(const TangentFrame& frame) const {
    const ProductPoint& x = frame.point();
    require_domain(x, "SquaredDistanceField");
    Geometry g;
    g.l = detail::unit_distance(pole_.coords(), x.h.coords());
    g.dir = Vec::Zero(frame.hdim());
    if (g.l == 0.0) return g;
    const Vec lc = -frame.lorentz_coords(log(x.h, pole_).coords());
    const double nrm = lc.norm();
    if (nrm == 0.0) {
      g.l = 0.0;
      return g;
    }
    g.dir = lc / nrm;
    return g;
  }

 private:
  HPoint pole_;
};

/// c . e + offset on the Euclidean factor (zero Hessian along geodesics).
class AffineField final : public ScalarField {
 public:
  AffineField(Vec c, double offset = 0.0) : c_(std::move(c)), offset_(offset) {}

  bool domain_contains(const ProductPoint& x) const override { return x.edim() == c_.size(); }
  double value(const ProductPoint& x) const override {
    require_domain(x, "AffineField");
    return c_.dot(x.e) + offset_;
  }
  Vec gradient(const TangentFrame& frame) const override {
    require_domain(frame.point(), "AffineField");
    Vec out = Vec::Zero(frame.dim());
    out.tail(frame.edim()) = c_;
    return out;
  }
  Mat hessian_matrix(const TangentFrame& frame) const override { return Mat::Zero(frame.dim(), frame.dim()); }
  Mat hessian_derivative_matrix(const TangentFrame& frame, const Vec&) const override {
    return Mat::Zero(frame.dim(), frame.dim());
  }

  const Vec& coefficients() const { return c_; }

 private:
  Vec c_;
  double offset_;
};

/// Linear objective of a barrier problem: l(x, s) = c . s.
using LinearObjectiveField = AffineField;

/// (e - center)^T Q (e - center) / 2 on the Euclidean factor.
class QuadraticField final : public ScalarField {
 public:
  QuadraticField(Mat q, Vec center) : q_(std::move(q)), center_(std::move(center)) {
    if (q_.rows() != q_.cols() || q_.rows() != center_.size()) throw UsageError("QuadraticField: shape mismatch");
    q_ = 0.5 * (q_ + q_.transpose()).eval();
  }

  bool domain_contains(const ProductPoint& x) const override { return x.edim() == center_.size(); }
  double value(const ProductPoint& x) const override {
    require_domain(x, "QuadraticField");
    const Vec d = x.e - center_;
    return 0.5 * d.dot(q_ * d);
  }
  Vec gradient(const TangentFrame& frame) const override {
    require_domain(frame.point(), "QuadraticField");
    Vec out = Vec::Zero(frame.dim());
    out.tail(frame.edim()) = q_ * (frame.point().e - center_);
    return out;
  }
  Mat hessian_matrix(const TangentFrame& frame) const override {
    Mat out = Mat::Zero(frame.dim(), frame.dim());
    out.bottomRightCorner(frame.edim(), frame.edim()) = q_;
    return out;
  }
  Mat hessian_derivative_matrix(const TangentFrame& frame, const Vec&) const override {
    return Mat::Zero(frame.dim(), frame.dim());
  }

 private:
  Mat q_;
  Vec center_;
};

/// F(x) = -log(beta - f(x)) on {f < beta}.
class LogBarrierField final : public ScalarField {
 public:
  LogBarrierField(FieldPtr inner, double level) : inner_(std::move(inner)), level_(level) {
    if (!inner_) throw UsageError("LogBarrierField: null inner field");
  }

  const ScalarField& inner() const { return *inner_; }
  double level() const { return level_; }

  bool domain_contains(const ProductPoint& x) const override {
    return inner_->domain_contains(x) && inner_->value(x) < level_;
  }

  double value(const ProductPoint& x) const override { return -std::log(slack(x)); }

  Vec gradient(const TangentFrame& frame) const override {
    return inner_->gradient(frame) / slack(frame.point());
  }

  Mat hessian_matrix(const TangentFrame& frame) const override {
    const double w = slack(frame.point());
    const Vec g = inner_->gradient(frame);
    return inner_->hessian_matrix(frame) / w + (g * g.transpose()) / (w * w);
  }

  // nabla_v HF(u,u) = nabla_v Hf(u,u)/w + Df(v) Hf(u,u)/w^2 + 2 Df(u) Hf(u,v)/w^2
  //                   + 2 Df(v) Df(u)^2 / w^3, polarized in u.
  Mat hessian_derivative_matrix(const TangentFrame& frame, const Vec& v) const override {
    const double w = slack(frame.point());
    const Vec g = inner_->gradient(frame);
    const Mat h = inner_->hessian_matrix(frame);
    const double gv = g.dot(v);
    const Vec hv = h * v;
    return inner_->hessian_derivative_matrix(frame, v) / w + (gv / (w * w)) * h +
           (g * hv.transpose() + hv * g.transpose()) / (w * w) + (2.0 * gv / (w * w * w)) * (g * g.transpose());
  }

  /// beta - f(x), throwing DomainError when it is not positive.
  double slack(const ProductPoint& x) const {
    if (!inner_->domain_contains(x)) throw DomainError("LogBarrierField: point outside the inner field's domain");
    const double w = level_ - inner_->value(x);
    if (!(w > 0.0)) throw DomainError("LogBarrierField: f(x) >= beta");
    return w;
  }

 private:
  FieldPtr inner_;
  double level_;
};

/// sum_i c_i f_i on the intersection of the domains.
class WeightedSumField final : public ScalarField {
 public:
  using Term = std::pair<double, FieldPtr>;

  WeightedSumField() = default;
  explicit WeightedSumField(std::vector<Term> terms) : terms_(std::move(terms)) {
    for (const auto& t : terms_) {
      if (!t.second) throw UsageError("WeightedSumField: null term");
    }
  }

  const std::vector<Term>& terms() const { return terms_; }

  bool domain_contains(const ProductPoint& x) const override {
    for (const auto& [c, f] : terms_) {
      if (!f->domain_contains(x)) return false;
    }
    return true;
  }

  double value(const ProductPoint& x) const override {
    double s = 0.0;
    for (const auto& [c, f] : terms_) s += c * f->value(x);
    return s;
  }

  Vec gradient(const TangentFrame& frame) const override {
    Vec s = Vec::Zero(frame.dim());
    for (const auto& [c, f] : terms_) s += c * f->gradient(frame);
    return s;
  }

  Mat hessian_matrix(const TangentFrame& frame) const override {
    Mat s = Mat::Zero(frame.dim(), frame.dim());
    for (const auto& [c, f] : terms_) s += c * f->hessian_matrix(frame);
    return s;
  }

  Mat hessian_derivative_matrix(const TangentFrame& frame, const Vec& v) const override {
    Mat s = Mat::Zero(frame.dim(), frame.dim());
    for (const auto& [c, f] : terms_) s += c * f->hessian_derivative_matrix(frame, v);
    return s;
  }

 private:
  std::vector<Term> terms_;
};

// ---------------------------------------------------------------------------
// Convenience constructors

inline std::shared_ptr<SquaredDistanceField> make_sqdist(const HPoint& pole) {
  return std::make_shared<SquaredDistanceField>(pole);
}

/// F_{p,R}(x) = -log(R^2 - d(p,x)^2).
inline std::shared_ptr<LogBarrierField> make_ball_barrier(const HPoint& pole, double radius) {
  auto d2 = std::make_shared<WeightedSumField>(std::vector<WeightedSumField::Term>{{2.0, make_sqdist(pole)}});
  return std::make_shared<LogBarrierField>(d2, radius * radius);
}

/// -log(R^2 - s) on the first Euclidean coordinate of an H^n x R^k point.
inline std::shared_ptr<LogBarrierField> make_upper_bound_barrier(int edim, int coord, double bound) {
  Vec c = Vec::Zero(edim);
  c[coord] = 1.0;
  return std::make_shared<LogBarrierField>(std::make_shared<AffineField>(c), bound);
}

// ---------------------------------------------------------------------------
// Bundled derivatives

struct FieldDerivatives {
  double value = 0.0;
  Covector differential;
  HessianForm hessian;
  std::function<HessianForm(const ProductTangent&)> hessian_derivative;
};

inline FieldDerivatives derivatives(FieldPtr field, const ProductPoint& x) {
  auto frame = std::make_shared<const TangentFrame>(x);
  FieldDerivatives out;
  out.value = field->value(x);
  out.differential = {x, frame->tangent(field->gradient(*frame))};
  out.hessian = {frame, field->hessian_matrix(*frame)};
  out.hessian_derivative = [field, frame](const ProductTangent& v) {
    return HessianForm{frame, field->hessian_derivative_matrix(*frame, frame->coords(v))};
  };
  return out;
}

/// value, DF, HF and nabla HF of a logarithmic barrier; DomainError outside {f < beta}.
inline FieldDerivatives logbarrier_derivatives(const std::shared_ptr<const LogBarrierField>& barrier,
                                               const ProductPoint& x) {
  barrier->slack(x);
  return derivatives(barrier, x);
}

inline FieldDerivatives weighted_sum_derivatives(const std::shared_ptr<const WeightedSumField>& sum,
                                                 const ProductPoint& x) {
  if (!sum->domain_contains(x)) throw DomainError("weighted sum: point outside a term's domain");
  return derivatives(sum, x);
}

// ---------------------------------------------------------------------------
// Norms

/// sqrt(Hf(u,u)) given frame coordinates.
inline double local_norm(const Mat& hessian, const Vec& u) { return std::sqrt(std::max(0.0, u.dot(hessian * u))); }

/// sqrt(p^T H^{-1} p) given frame coordinates; DegeneracyError if H is not positive definite.
inline double dual_norm(const Mat& hessian, const Vec& p) {
  Eigen::LLT<Mat> llt(hessian);
  if (llt.info() != Eigen::Success) throw DegeneracyError("dual_norm: Hessian is not positive definite");
  const Vec y = llt.matrixL().solve(p);
  return y.norm();
}

inline double local_norm(const ScalarField& field, const ProductPoint& x, const ProductTangent& u) {
  const TangentFrame frame(x);
  const Mat h = field.hessian_matrix(frame);
  Eigen::LLT<Mat> llt(h);
  if (llt.info() != Eigen::Success) throw DegeneracyError("local_norm: Hessian is not positive definite");
  return local_norm(h, frame.coords(u));
}

inline double dual_norm(const ScalarField& field, const ProductPoint& x, const Covector& p) {
  const TangentFrame frame(x);
  return dual_norm(field.hessian_matrix(frame), frame.coords(p.riesz));
}

// ---------------------------------------------------------------------------
// Jacobi fields

/// nabla_{gamma'(l)} X(l) for the Jacobi field along the unit-speed geodesic
/// gamma from p to x with X(0) = 0, X(l) = u. Then Hf_p(u,u) = l <result, u>.
inline HTangent jacobi_boundary(const HPoint& p, const HPoint& x, const HTangent& u) {
  require_base(x, u, "jacobi_boundary");
  require_compatible(p, x, "jacobi_boundary");
  const double l = distance(p, x);
  if (l == 0.0) throw UsageError("jacobi_boundary: p == x");
  const double sk = std::sqrt(x.kappa());
  const HTangent gdot = -(1.0 / l) * log(x, p);  // unit in the kappa metric
  const double a = inner(u, gdot);
  const double c = sk / std::tanh(sk * l);
  return HTangent::project(x, (a / l) * gdot.coords() + c * (u.coords() - a * gdot.coords()));
}

// ---------------------------------------------------------------------------
// Finite-difference oracle

struct FdSteps {
  double order1 = 1e-3;
  double order2 = 1e-2;
  double order3 = 1.5e-2;
  double mixed = 1e-2;
};

namespace detail {

inline double along(const ScalarField& f, const ProductPoint& x, const ProductTangent& u, double t) {
  return f.value(exp(x, t * u));
}

}  // namespace detail

/// Central finite differences of t -> f(exp_x(t u)) at t = 0: order 1, 2, 3
/// estimate Df(u), Hf(u,u), (nabla_u Hf)(u,u). Steps shrink with ||u||.
inline double fd_oracle(const ScalarField& f, const ProductPoint& x, const ProductTangent& u, int order,
                        const FdSteps& steps = {}) {
  const double scale = std::max(1.0, norm(u));
  auto g = [&](double t) { return detail::along(f, x, u, t); };
  switch (order) {
    case 1: {
      const double h = steps.order1 / scale;
      return (-g(2 * h) + 8 * g(h) - 8 * g(-h) + g(-2 * h)) / (12 * h);
    }
    case 2: {
      const double h = steps.order2 / scale;
      return (-g(2 * h) + 16 * g(h) - 30 * g(0) + 16 * g(-h) - g(-2 * h)) / (12 * h * h);
    }
    case 3: {
      // Seven-point stencil, Richardson-extrapolated over h and 2h.
      const double h = steps.order3 / scale;
      auto d3 = [&](double s) {
        return (-g(3 * s) + 8 * g(2 * s) - 13 * g(s) + 13 * g(-s) - 8 * g(-2 * s) + g(-3 * s)) / (8 * s * s * s);
      };
      return (16.0 * d3(h) - d3(2 * h)) / 15.0;
    }
    default:
      throw UsageError("fd_oracle: order must be 1, 2 or 3");
  }
}

/// (nabla_v Hf)(u,u) estimated as d/ds Hf_{c(s)}(tau_s u, tau_s u) along
/// c(s) = exp_x(s v), with the Hessian itself taken by fd_oracle order 2.
inline double fd_mixed_oracle(const ScalarField& f, const ProductPoint& x, const ProductTangent& u,
                              const ProductTangent& v, const FdSteps& steps = {}) {
  const double h = steps.mixed / std::max(1.0, norm(v));
  auto hess_at = [&](double s) {
    const ProductPoint c = exp(x, s * v);
    const ProductTangent us = parallel_transport(x, c, u);
    return fd_oracle(f, c, us, 2, steps);
  };
  return (-hess_at(2 * h) + 8 * hess_at(h) - 8 * hess_at(-h) + hess_at(-2 * h)) / (12 * h);
}

/// Same derivative, but differentiating the field's closed-form Hessian.
inline double hessian_transport_derivative(const ScalarField& f, const ProductPoint& x, const ProductTangent& u,
                                           const ProductTangent& v, double step = 1e-3) {
  const double h = step / std::max(1.0, norm(v));
  auto hess_at = [&](double s) {
    const ProductPoint c = exp(x, s * v);
    const TangentFrame frame(c);
    const Vec us = frame.coords(parallel_transport(x, c, u));
    return us.dot(f.hessian_matrix(frame) * us);
  };
  return (-hess_at(2 * h) + 8 * hess_at(h) - 8 * hess_at(-h) + hess_at(-2 * h)) / (12 * h);
}

/// (nabla_u Hf)(v,w) - (nabla_v Hf)(u,w) + Df(R(u,v)w); zero for any smooth f.
inline double curvature_defect(const ScalarField& f, const ProductPoint& x, const ProductTangent& u,
                               const ProductTangent& v, const ProductTangent& w) {
  const TangentFrame frame(x);
  const Vec uc = frame.coords(u), vc = frame.coords(v), wc = frame.coords(w);
  const double a = vc.dot(f.hessian_derivative_matrix(frame, uc) * wc);
  const double b = uc.dot(f.hessian_derivative_matrix(frame, vc) * wc);
  const Vec r = frame.coords(curvature_apply(x, u, v, w));
  return a - b + f.gradient(frame).dot(r);
}

}  // namespace hypersc
