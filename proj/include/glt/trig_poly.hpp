#pragma once

#include <glt/error.hpp>
#include <glt/expr.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdlib>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace glt {

/**
 * Approximates (1/2pi) * integral_{-pi}^{pi} f(theta) e^{-ik theta} dtheta by the
 * periodic trapezoid rule on `quad_points` equispaced nodes. The rule is exact
 * for trigonometric polynomials of degree below quad_points/2 - |k|.
 */
template <class Fn>
cplx fourier_coeff(const Fn& f, int k, int quad_points) {
  if (quad_points < 4 * (std::abs(k) + 1)) {
    throw DomainError("fourier_coeff: quad_points must be at least 4*(|k|+1)");
  }
  const double h = 2.0 * std::numbers::pi / quad_points;
  cplx acc = 0.0;
  for (int j = 0; j < quad_points; ++j) {
    const double theta = -std::numbers::pi + j * h;
    // e^{-ik theta} evaluated from the integer phase to keep it exact at j = 0
    const double phase = -static_cast<double>(k) * theta;
    acc += f(theta) * cplx(std::cos(phase), std::sin(phase));
  }
  return acc / static_cast<double>(quad_points);
}

inline cplx fourier_coeff(const FuncExpr& f, int k, int quad_points) {
  return fourier_coeff([&f](double theta) { return f.at_theta(theta); }, k, quad_points);
}

/**
 * f(theta) = sum_{k=-d}^{d} f_k e^{ik theta}, stored as the 2d+1 coefficients
 * f_{-d}, ..., f_d.
 */
class TrigPoly {
public:
  /** The constant 1. */
  TrigPoly() : degree_(0), coeffs_{1.0} {}

  TrigPoly(int degree, std::vector<cplx> coeffs) : degree_(degree), coeffs_(std::move(coeffs)) {
    if (degree_ < 0) throw DomainError("TrigPoly: negative degree");
    if (coeffs_.size() != static_cast<std::size_t>(2 * degree_ + 1)) {
      throw DomainError("TrigPoly: expected " + std::to_string(2 * degree_ + 1) + " coefficients");
    }
  }

  static TrigPoly constant(cplx c) { return TrigPoly(0, {c}); }

  /** c * e^{ik theta}. */
  static TrigPoly monomial(int k, cplx c = 1.0) {
    const int d = std::abs(k);
    std::vector<cplx> coeffs(2 * d + 1, 0.0);
    coeffs[k + d] = c;
    return TrigPoly(d, std::move(coeffs));
  }

  /** 2cos(theta) when scale = 1. */
  static TrigPoly two_cos(double scale = 1.0) { return TrigPoly(1, {scale, 0.0, scale}); }

  int degree() const noexcept { return degree_; }
  std::span<const cplx> coeffs() const noexcept { return coeffs_; }

  /** f_k, zero outside [-d, d]. */
  cplx coeff(int k) const {
    if (k < -degree_ || k > degree_) return 0.0;
    return coeffs_[k + degree_];
  }

  cplx operator()(double theta) const {
    cplx acc = 0.0;
    for (int k = -degree_; k <= degree_; ++k) {
      const cplx c = coeffs_[k + degree_];
      if (c == cplx(0.0)) continue;
      acc += c * cplx(std::cos(k * theta), std::sin(k * theta));
    }
    return acc;
  }

  /** max_k |f_k| */
  double max_abs_coeff() const {
    double m = 0.0;
    for (const cplx& c : coeffs_) m = std::max(m, std::abs(c));
    return m;
  }

  bool is_hermitian(double tol = 0.0) const {
    for (int k = 0; k <= degree_; ++k) {
      if (std::abs(coeff(-k) - std::conj(coeff(k))) > tol) return false;
    }
    return true;
  }

  /** Drops outer coefficients with modulus <= tol. */
  TrigPoly trimmed(double tol = 0.0) const {
    int d = degree_;
    while (d > 0 && std::abs(coeff(d)) <= tol && std::abs(coeff(-d)) <= tol) --d;
    std::vector<cplx> c(coeffs_.begin() + (degree_ - d), coeffs_.end() - (degree_ - d));
    return TrigPoly(d, std::move(c));
  }

  friend TrigPoly operator+(const TrigPoly& a, const TrigPoly& b) {
    const int d = std::max(a.degree_, b.degree_);
    std::vector<cplx> c(2 * d + 1);
    for (int k = -d; k <= d; ++k) c[k + d] = a.coeff(k) + b.coeff(k);
    return TrigPoly(d, std::move(c));
  }

  /** Full coefficient convolution; degrees add. */
  friend TrigPoly operator*(const TrigPoly& a, const TrigPoly& b) {
    const int d = a.degree_ + b.degree_;
    std::vector<cplx> c(2 * d + 1, 0.0);
    for (int i = -a.degree_; i <= a.degree_; ++i) {
      for (int j = -b.degree_; j <= b.degree_; ++j) c[i + j + d] += a.coeff(i) * b.coeff(j);
    }
    return TrigPoly(d, std::move(c));
  }

  friend TrigPoly operator*(cplx s, const TrigPoly& a) {
    std::vector<cplx> c(a.coeffs_);
    for (auto& v : c) v *= s;
    return TrigPoly(a.degree_, std::move(c));
  }

  friend bool operator==(const TrigPoly&, const TrigPoly&) = default;

  /** sum_k f_k * exp(k*i*theta) as an expression. */
  FuncExpr to_expr() const {
    FuncExpr acc = FuncExpr::constant(coeff(0));
    for (int k = -degree_; k <= degree_; ++k) {
      if (k == 0 || coeff(k) == cplx(0.0)) continue;
      FuncExpr phase = parse_expr("exp(" + std::to_string(k) + "*i*theta)", Role::Theta);
      acc = acc + coeff(k) * phase;
    }
    return acc;
  }

  /**
   * Recovers the coefficients of an expression in theta that is a
   * trigonometric polynomial of degree <= max_degree. Throws DomainError if the
   * reconstruction does not reproduce the expression at off-grid probes.
   */
  static TrigPoly from_expr(const FuncExpr& f, int max_degree = 32) {
    if (f.variables() & ~static_cast<unsigned>(kVarTheta)) {
      throw DomainError("trigonometric polynomial may only depend on theta: " + f.source());
    }
    const int quad = 4 * (2 * max_degree + 1);
    std::vector<cplx> c(2 * max_degree + 1);
    double scale = 0.0;
    for (int k = -max_degree; k <= max_degree; ++k) {
      c[k + max_degree] = fourier_coeff(f, k, quad);
      scale = std::max(scale, std::abs(c[k + max_degree]));
    }
    // Quadrature noise is snapped away when a short dyadic value is within reach.
    const double tol = 1e-13 * std::max(1.0, scale);
    auto snap = [tol](double v) {
      const double r = std::ldexp(std::round(std::ldexp(v, 20)), -20);
      return std::abs(v - r) <= tol ? r : v;
    };
    for (auto& v : c) v = cplx(snap(v.real()), snap(v.imag()));
    TrigPoly p = TrigPoly(max_degree, std::move(c)).trimmed();
    for (int j = 0; j < 37; ++j) {
      const double theta = -3.0 + 0.16 * j + 0.0123;
      const cplx want = f.at_theta(theta);
      if (!(std::abs(p(theta) - want) <= 1e-9 * std::max(1.0, std::abs(want)))) {
        throw DomainError("not a trigonometric polynomial of degree <= " +
                          std::to_string(max_degree) + ": " + f.source());
      }
    }
    return p;
  }

private:
  int degree_;
  std::vector<cplx> coeffs_;
};

}  // namespace glt
