#pragma once

// Hyperbolic space of curvature -kappa realized on the unit hyperboloid
// {v : <v,v>_L = -1, v_0 > 0}, plus products H^n x R^k.
//
// Points are always stored on the unit sheet. Curvature only enters through
// the metric: <u,w>_kappa = <u,w>_L / kappa, d_kappa = d_1 / sqrt(kappa).
// Geodesics, parallel transport and the curvature tensor do not depend on
// kappa, so exp/log/transport act on ambient coordinates unchanged.
//
// Ambient coordinates of points grow like e^d with the distance d from the
// apex (1,0,...,0). Lorentz inner products of tangent vectors at such points
// lose roughly 2*d/ln(10) digits, so numerically demanding work should keep
// evaluation points within a few units of the apex.

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

#include "hypersc/errors.hpp"

namespace hypersc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Ambient vector in R^{n+1}; index 0 is the timelike coordinate.
using MinkowskiVector = Eigen::VectorXd;

inline constexpr double kSheetTol = 1e-10;
inline constexpr double kTangentTol = 1e-10;

/// -a0*b0 + sum_{i>=1} ai*bi
inline double minkowski_inner(const MinkowskiVector& a, const MinkowskiVector& b) {
  if (a.size() != b.size()) {
    throw UsageError("minkowski_inner: dimension mismatch (" + std::to_string(a.size()) +
                     " vs " + std::to_string(b.size()) + ")");
  }
  if (a.size() == 0) return 0.0;
  return -a[0] * b[0] + a.tail(a.size() - 1).dot(b.tail(b.size() - 1));
}

namespace detail {

inline double lorentz_unchecked(const Vec& a, const Vec& b) {
  return -a[0] * b[0] + a.tail(a.size() - 1).dot(b.tail(b.size() - 1));
}

// sinh(r)/r
inline double sinhc(double r) {
  if (std::abs(r) < 1e-6) return 1.0 + r * r / 6.0;
  return std::sinh(r) / r;
}

// r/sinh(r)
inline double inv_sinhc(double r) {
  if (std::abs(r) < 1e-6) return 1.0 - r * r / 6.0;
  return r / std::sinh(r);
}

inline double scale_of(const Vec& v) { return std::max(1.0, v.cwiseAbs().maxCoeff()); }

}  // namespace detail

/// A point on the upper sheet. Dimension 0 (coords == (1)) is the one-point
/// space used as the trivial hyperbolic factor of a purely Euclidean product.
class HPoint {
 public:
  HPoint() : v_(Vec::Ones(1)), kappa_(1.0) {}

  /// Validates the sheet invariant, then re-lifts the timelike coordinate.
  explicit HPoint(MinkowskiVector v, double kappa = 1.0) : v_(std::move(v)), kappa_(kappa) {
    check_kappa(kappa_);
    if (v_.size() < 1) throw UsageError("HPoint: empty coordinate vector");
    if (!v_.allFinite()) throw ValidationError("HPoint: non-finite coordinates");
    const double q = detail::lorentz_unchecked(v_, v_);
    const double s = detail::scale_of(v_);
    if (std::abs(q + 1.0) > kSheetTol * s * s) {
      throw ValidationError("HPoint: <v,v>_L = " + std::to_string(q) + " is not -1");
    }
    if (v_[0] < 1.0 - kSheetTol) throw ValidationError("HPoint: point on the lower sheet");
    relift();
  }

  /// Point with the given spatial coordinates (always valid).
  static HPoint from_spatial(const Vec& spatial, double kappa = 1.0) {
    check_kappa(kappa);
    HPoint p;
    p.kappa_ = kappa;
    p.v_.resize(spatial.size() + 1);
    p.v_.tail(spatial.size()) = spatial;
    p.relift();
    return p;
  }

  static HPoint apex(int n, double kappa = 1.0) { return from_spatial(Vec::Zero(n), kappa); }

  const MinkowskiVector& coords() const { return v_; }
  double kappa() const { return kappa_; }
  int dim() const { return static_cast<int>(v_.size()) - 1; }

 private:
  static void check_kappa(double kappa) {
    if (!(kappa > 0.0) || !std::isfinite(kappa)) throw UsageError("HPoint: kappa must be positive");
  }
  void relift() {
    const auto n = v_.size() - 1;
    v_[0] = std::sqrt(1.0 + v_.tail(n).squaredNorm());
  }

  MinkowskiVector v_;
  double kappa_;
};

inline void require_compatible(const HPoint& x, const HPoint& y, const char* what) {
  if (x.dim() != y.dim()) throw UsageError(std::string(what) + ": dimension mismatch");
  if (x.kappa() != y.kappa()) throw UsageError(std::string(what) + ": curvature mismatch");
}

inline bool same_point(const HPoint& x, const HPoint& y) {
  if (x.dim() != y.dim() || x.kappa() != y.kappa()) return false;
  const double s = std::max(detail::scale_of(x.coords()), detail::scale_of(y.coords()));
  return (x.coords() - y.coords()).cwiseAbs().maxCoeff() <= 1e-9 * s;
}

/// Tangent vector at `base`, in ambient coordinates.
class HTangent {
 public:
  HTangent() = default;

  HTangent(HPoint base, MinkowskiVector v) : base_(std::move(base)), v_(std::move(v)) {
    if (v_.size() != base_.coords().size()) throw UsageError("HTangent: dimension mismatch");
    if (!v_.allFinite()) throw ValidationError("HTangent: non-finite coordinates");
    const double s = detail::scale_of(base_.coords()) * detail::scale_of(v_);
    if (std::abs(detail::lorentz_unchecked(base_.coords(), v_)) > kTangentTol * s) {
      throw UsageError("HTangent: vector is not tangent at its base point");
    }
  }

  /// Orthogonal projection of an arbitrary ambient vector onto T_base.
  static HTangent project(HPoint base, const MinkowskiVector& a) {
    HTangent t;
    const Vec& x = base.coords();
    t.v_ = a + detail::lorentz_unchecked(x, a) * x;
    t.base_ = std::move(base);
    return t;
  }

  /// No tangency check; for vectors tangent by construction.
  static HTangent unchecked_at(const HPoint& base, Vec v) { return unchecked(base, std::move(v)); }

  static HTangent zero(const HPoint& base) {
    HTangent t;
    t.base_ = base;
    t.v_ = Vec::Zero(base.coords().size());
    return t;
  }

  const HPoint& base() const { return base_; }
  const MinkowskiVector& coords() const { return v_; }

  /// Riemannian norm at curvature kappa.
  double norm() const { return std::sqrt(std::max(0.0, detail::lorentz_unchecked(v_, v_))) / std::sqrt(base_.kappa()); }

  HTangent operator*(double a) const { return unchecked(base_, a * v_); }
  HTangent operator-() const { return unchecked(base_, -v_); }
  HTangent operator+(const HTangent& o) const { return unchecked(base_, v_ + o.v_); }
  HTangent operator-(const HTangent& o) const { return unchecked(base_, v_ - o.v_); }

 private:
  static HTangent unchecked(const HPoint& b, Vec v) {
    HTangent t;
    t.base_ = b;
    t.v_ = std::move(v);
    return t;
  }

  HPoint base_;
  MinkowskiVector v_ = Vec::Zero(1);
};

inline HTangent operator*(double a, const HTangent& u) { return u * a; }

/// Local metric <u,w> at curvature kappa.
inline double inner(const HTangent& u, const HTangent& w) {
  return minkowski_inner(u.coords(), w.coords()) / u.base().kappa();
}

namespace detail {

// d_1(x,y) on the unit hyperboloid; validates -<x,y>_L >= 1 - 1e-8.
inline double unit_distance(const Vec& x, const Vec& y) {
  const double c = -lorentz_unchecked(x, y);
  if (c < 1.0 - 1e-8) {
    throw ValidationError("distance: -<x,y>_L = " + std::to_string(c) + " < 1, points are off the sheet");
  }
  if (c < 1.5) {
    const Vec w = x - y;
    const double q = std::max(0.0, lorentz_unchecked(w, w));
    return 2.0 * std::asinh(0.5 * std::sqrt(q));
  }
  return std::acosh(c);
}

}  // namespace detail

/// arccosh(-<x,y>_L)/sqrt(kappa)
inline double distance(const HPoint& x, const HPoint& y) {
  require_compatible(x, y, "distance");
  return detail::unit_distance(x.coords(), y.coords()) / std::sqrt(x.kappa());
}

inline void require_base(const HPoint& x, const HTangent& u, const char* what) {
  require_compatible(x, u.base(), what);
  if (!same_point(x, u.base())) throw UsageError(std::string(what) + ": tangent is based at a different point");
}

namespace detail {

// Columns are the images of e_1..e_n under the Lorentz boost taking the apex
// to x: a Lorentz-orthonormal basis of T_x in closed form.
inline Mat boost_frame(const Vec& x) {
  const auto n = x.size() - 1;
  Mat e(n + 1, n);
  if (n == 0) return e;
  const Vec xs = x.tail(n);
  const double denom = 1.0 + x[0];
  for (Eigen::Index i = 0; i < n; ++i) {
    e(0, i) = xs[i];
    e.col(i).tail(n) = (xs[i] / denom) * xs;
    e(i + 1, i) += 1.0;
  }
  return e;
}

// Lorentz inner products <b_i, a>_L with the boost_frame columns.
inline Vec boost_coords(const Mat& frame, const Vec& a) {
  Vec c = frame.transpose() * a;
  c -= 2.0 * a[0] * frame.row(0).transpose();
  return c;
}

}  // namespace detail

inline HPoint exp(const HPoint& x, const HTangent& u) {
  require_base(x, u, "exp");
  // Work in boost-frame coordinates so the step length stays consistent
  // with the direction when x is far from the apex.
  const Mat b = detail::boost_frame(x.coords());
  const Vec c = detail::boost_coords(b, u.coords());
  const double r = c.norm();
  if (r == 0.0) return x;
  const Vec y = std::cosh(r) * x.coords() + b * (detail::sinhc(r) * c);
  return HPoint::from_spatial(y.tail(y.size() - 1), x.kappa());
}

inline HTangent log(const HPoint& x, const HPoint& y) {
  require_compatible(x, y, "log");
  const Vec& xv = x.coords();
  const Vec& yv = y.coords();
  const double d = detail::unit_distance(xv, yv);
  if (d == 0.0) return HTangent::zero(x);
  const Mat b = detail::boost_frame(xv);
  const Vec c = detail::boost_coords(b, yv);
  const double cn = c.norm();
  if (cn == 0.0) return HTangent::zero(x);
  return HTangent::unchecked_at(x, b * ((d / cn) * c));
}

/// Transport along the unique geodesic from x to y.
inline HTangent parallel_transport(const HPoint& x, const HPoint& y, const HTangent& u) {
  require_base(x, u, "parallel_transport");
  require_compatible(x, y, "parallel_transport");
  const Vec& xv = x.coords();
  const Vec& yv = y.coords();
  const double alpha = std::max(1.0, -detail::lorentz_unchecked(xv, yv));
  const Vec moved = u.coords() + (detail::lorentz_unchecked(yv, u.coords()) / (alpha + 1.0)) * (xv + yv);
  return HTangent::project(y, moved);
}

/// R(u,v)w = -kappa(<v,w>u - <u,w>v) in the local metric.
inline HTangent curvature_apply(const HPoint& x, const HTangent& u, const HTangent& v, const HTangent& w) {
  require_base(x, u, "curvature_apply");
  require_base(x, v, "curvature_apply");
  require_base(x, w, "curvature_apply");
  const double vw = detail::lorentz_unchecked(v.coords(), w.coords());
  const double uw = detail::lorentz_unchecked(u.coords(), w.coords());
  return HTangent::project(x, -(vw * u.coords() - uw * v.coords()));
}

/// Geodesic t -> exp_base(t * dir), t in [0, length].
struct Geodesic {
  HPoint base;
  HTangent dir;
  double length = 1.0;

  HPoint at(double t) const { return exp(base, t * dir); }
  HTangent velocity(double t) const { return parallel_transport(base, at(t), dir); }
};


/// Orthonormal basis of T_x in the local metric (deterministic in x).
inline std::vector<HTangent> tangent_basis(const HPoint& x) {
  const Mat e = detail::boost_frame(x.coords());
  const double sk = std::sqrt(x.kappa());
  std::vector<HTangent> out;
  out.reserve(e.cols());
  for (Eigen::Index i = 0; i < e.cols(); ++i) out.push_back(HTangent::project(x, sk * e.col(i)));
  return out;
}

// ---------------------------------------------------------------------------
// Products H^n x R^k

struct ProductPoint {
  HPoint h;
  Vec e;

  ProductPoint() = default;
  ProductPoint(HPoint hp, Vec ev = Vec()) : h(std::move(hp)), e(std::move(ev)) {}  // NOLINT(google-explicit-constructor)

  static ProductPoint euclidean(Vec ev) { return {HPoint(), std::move(ev)}; }

  int hdim() const { return h.dim(); }
  int edim() const { return static_cast<int>(e.size()); }
  int dim() const { return hdim() + edim(); }
};

struct ProductTangent {
  HTangent h;
  Vec e;

  ProductTangent() = default;
  ProductTangent(HTangent ht, Vec ev = Vec()) : h(std::move(ht)), e(std::move(ev)) {}  // NOLINT(google-explicit-constructor)

  static ProductTangent zero(const ProductPoint& x) { return {HTangent::zero(x.h), Vec::Zero(x.edim())}; }

  ProductTangent operator*(double a) const { return {h * a, a * e}; }
  ProductTangent operator+(const ProductTangent& o) const { return {h + o.h, e + o.e}; }
  ProductTangent operator-(const ProductTangent& o) const { return {h - o.h, e - o.e}; }
  ProductTangent operator-() const { return {-h, -e}; }
};

inline ProductTangent operator*(double a, const ProductTangent& u) { return u * a; }

inline void require_compatible(const ProductPoint& x, const ProductPoint& y, const char* what) {
  require_compatible(x.h, y.h, what);
  if (x.edim() != y.edim()) throw UsageError(std::string(what) + ": Euclidean dimension mismatch");
}

inline double inner(const ProductTangent& u, const ProductTangent& w) {
  if (u.e.size() != w.e.size()) throw UsageError("inner: Euclidean dimension mismatch");
  return inner(u.h, w.h) + u.e.dot(w.e);
}

inline double norm(const ProductTangent& u) { return std::sqrt(std::max(0.0, inner(u, u))); }

inline double distance(const ProductPoint& x, const ProductPoint& y) {
  require_compatible(x, y, "distance");
  const double dh = distance(x.h, y.h);
  return std::sqrt(dh * dh + (x.e - y.e).squaredNorm());
}

inline ProductPoint exp(const ProductPoint& x, const ProductTangent& u) {
  if (u.e.size() != x.e.size()) throw UsageError("exp: Euclidean dimension mismatch");
  return {exp(x.h, u.h), x.e + u.e};
}

inline ProductTangent log(const ProductPoint& x, const ProductPoint& y) {
  require_compatible(x, y, "log");
  return {log(x.h, y.h), y.e - x.e};
}

inline ProductTangent parallel_transport(const ProductPoint& x, const ProductPoint& y, const ProductTangent& u) {
  require_compatible(x, y, "parallel_transport");
  return {parallel_transport(x.h, y.h, u.h), u.e};
}

inline ProductTangent curvature_apply(const ProductPoint& x, const ProductTangent& u, const ProductTangent& v,
                                      const ProductTangent& w) {
  return {curvature_apply(x.h, u.h, v.h, w.h), Vec::Zero(x.edim())};
}

inline std::vector<ProductTangent> tangent_basis(const ProductPoint& x) {
  std::vector<ProductTangent> out;
  for (auto& t : tangent_basis(x.h)) out.emplace_back(std::move(t), Vec::Zero(x.edim()));
  for (int i = 0; i < x.edim(); ++i) out.emplace_back(HTangent::zero(x.h), Vec::Unit(x.edim(), i));
  return out;
}

/// Coordinates of tangent vectors at a fixed point with respect to
/// tangent_basis(x). The basis is orthonormal, so the coordinate inner
/// product is the local metric.
class TangentFrame {
 public:
  explicit TangentFrame(ProductPoint x)
      : x_(std::move(x)), lorentz_(detail::boost_frame(x_.h.coords())), sqrt_kappa_(std::sqrt(x_.h.kappa())) {}

  const ProductPoint& point() const { return x_; }
  int hdim() const { return x_.hdim(); }
  int edim() const { return x_.edim(); }
  int dim() const { return x_.dim(); }
  double kappa() const { return x_.h.kappa(); }

  /// Lorentz-orthonormal ambient frame of T_x (columns), independent of kappa.
  const Mat& lorentz_frame() const { return lorentz_; }

  /// <a, e_i>_L for an ambient tangent vector a.
  Vec lorentz_coords(const Vec& a) const {
    Vec ja = a;
    if (ja.size() > 0) ja[0] = -ja[0];
    return lorentz_.transpose() * ja;
  }

  Vec coords(const ProductTangent& u) const {
    Vec c(dim());
    c.head(hdim()) = lorentz_coords(u.h.coords()) / sqrt_kappa_;
    c.tail(edim()) = u.e;
    return c;
  }

  ProductTangent tangent(const Vec& c) const {
    if (c.size() != dim()) throw UsageError("TangentFrame::tangent: coordinate size mismatch");
    const Vec a = sqrt_kappa_ * (lorentz_ * c.head(hdim()));
    return {HTangent::project(x_.h, a), c.tail(edim())};
  }

 private:
  ProductPoint x_;
  Mat lorentz_;
  double sqrt_kappa_;
};

}  // namespace hypersc
