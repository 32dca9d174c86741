#pragma once

#include <glt/error.hpp>
#include <glt/expr.hpp>
#include <glt/trig_poly.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace glt {

/** One separable term a(x) f(theta). */
struct GltTerm {
  FuncExpr a;
  TrigPoly f;
};

/**
 * Finite sum of separable terms; represents the sequence
 * sum_i D_n(a_i) T_n(f_i) and its symbol sum_i a_i(x) f_i(theta).
 */
class GltExpr {
public:
  explicit GltExpr(std::vector<GltTerm> terms) : terms_(std::move(terms)) {
    if (terms_.empty()) throw DomainError("GltExpr: at least one term is required");
  }

  GltExpr(FuncExpr a, TrigPoly f) : GltExpr(std::vector<GltTerm>{{std::move(a), std::move(f)}}) {}

  std::span<const GltTerm> terms() const noexcept { return terms_; }

  cplx operator()(double x, double theta) const {
    cplx acc = 0.0;
    for (const auto& term : terms_) acc += term.a.at_x(x) * term.f(theta);
    return acc;
  }

  std::string to_string() const {
    std::string s;
    for (const auto& term : terms_) {
      if (!s.empty()) s += " ; ";
      s += term.a.source() + " | " + term.f.to_expr().source();
    }
    return s;
  }

private:
  std::vector<GltTerm> terms_;
};

inline GltExpr symbol_add(const GltExpr& p, const GltExpr& q) {
  std::vector<GltTerm> terms(p.terms().begin(), p.terms().end());
  terms.insert(terms.end(), q.terms().begin(), q.terms().end());
  return GltExpr(std::move(terms));
}

inline GltExpr symbol_mul(const GltExpr& p, const GltExpr& q) {
  std::vector<GltTerm> terms;
  terms.reserve(p.terms().size() * q.terms().size());
  for (const auto& s : p.terms()) {
    for (const auto& r : q.terms()) terms.push_back({s.a * r.a, s.f * r.f});
  }
  return GltExpr(std::move(terms));
}

inline GltExpr symbol_scale(const GltExpr& p, cplx lambda) {
  std::vector<GltTerm> terms;
  for (const auto& s : p.terms()) terms.push_back({lambda * s.a, s.f});
  return GltExpr(std::move(terms));
}

/**
 * Parses "a1 | f1 ; a2 | f2 ; ...": each a_i over x, each f_i a trigonometric
 * polynomial in theta. A term without '|' is read as a(x) * 1.
 */
inline GltExpr parse_glt_expr(std::string_view text, int max_degree = 32) {
  std::vector<GltTerm> terms;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(';', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view item = text.substr(start, end - start);
    std::size_t bar = item.find('|');
    FuncExpr a = parse_expr(item.substr(0, bar), Role::A);
    TrigPoly f;
    if (bar != std::string_view::npos) {
      f = TrigPoly::from_expr(parse_expr(item.substr(bar + 1), Role::Theta), max_degree);
    }
    terms.push_back({std::move(a), std::move(f)});
    start = end + 1;
  }
  return GltExpr(std::move(terms));
}

enum class Domain {
  Unit,  ///< [0,1]
  Rect,  ///< [0,1] x [-pi, pi]
};

inline const char* domain_name(Domain d) { return d == Domain::Unit ? "unit" : "rect"; }

struct GridSpec {
  Domain domain = Domain::Rect;
  std::size_t nx = 256;
  std::size_t ntheta = 256;
};

/**
 * Samples of a symbol at the midpoints of a uniform tensor grid, x-major:
 * sample (i, j) sits at x_i = (i + 1/2)/nx, theta_j = -pi + (j + 1/2) 2pi/ntheta.
 * A Unit grid has ntheta = 1 (theta = 0).
 */
class SymbolGrid {
public:
  SymbolGrid(GridSpec spec, std::vector<cplx> samples) : spec_(spec), samples_(std::move(samples)) {
    validate(spec_);
    if (samples_.size() != spec_.nx * spec_.ntheta) {
      throw DomainError("SymbolGrid: sample count does not match resolution");
    }
    for (const auto& s : samples_) {
      if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) ++nonfinite_;
    }
  }

  static void validate(const GridSpec& spec) {
    if (spec.nx < 1 || spec.ntheta < 1) throw DomainError("SymbolGrid: empty resolution");
    if (spec.domain == Domain::Unit && spec.ntheta != 1) {
      throw DomainError("SymbolGrid: a unit-interval grid has a single theta sample");
    }
  }

  static double x_at(const GridSpec& spec, std::size_t i) {
    return (static_cast<double>(i) + 0.5) / static_cast<double>(spec.nx);
  }
  static double theta_at(const GridSpec& spec, std::size_t j) {
    if (spec.domain == Domain::Unit) return 0.0;
    return -std::numbers::pi +
           (static_cast<double>(j) + 0.5) * 2.0 * std::numbers::pi / static_cast<double>(spec.ntheta);
  }

  const GridSpec& spec() const noexcept { return spec_; }
  Domain domain() const noexcept { return spec_.domain; }
  std::span<const cplx> samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool finite() const noexcept { return nonfinite_ == 0; }
  std::size_t nonfinite_count() const noexcept { return nonfinite_; }

  /** Midpoint-rule resolution: the largest relative cell width over used axes. */
  double grid_error() const {
    double e = 1.0 / static_cast<double>(spec_.nx);
    if (spec_.domain == Domain::Rect) e = std::max(e, 1.0 / static_cast<double>(spec_.ntheta));
    return e;
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& s : samples_) m = std::max(m, std::abs(s));
    return m;
  }

  template <class Fn>
  SymbolGrid map(Fn&& fn) const {
    std::vector<cplx> out(samples_.size());
    std::transform(samples_.begin(), samples_.end(), out.begin(), fn);
    return SymbolGrid(spec_, std::move(out));
  }

private:
  GridSpec spec_;
  std::vector<cplx> samples_;
  std::size_t nonfinite_ = 0;
};

/** Fills the grid with k at the cell midpoints; non-finite values are counted, not thrown. */
template <class Fn>
SymbolGrid sample_symbol_with(const Fn& k, const GridSpec& spec) {
  SymbolGrid::validate(spec);
  std::vector<cplx> samples;
  samples.reserve(spec.nx * spec.ntheta);
  for (std::size_t i = 0; i < spec.nx; ++i) {
    const double x = SymbolGrid::x_at(spec, i);
    for (std::size_t j = 0; j < spec.ntheta; ++j) samples.push_back(k(x, SymbolGrid::theta_at(spec, j)));
  }
  return SymbolGrid(spec, std::move(samples));
}

inline SymbolGrid sample_symbol(const FuncExpr& k, const GridSpec& spec) {
  return sample_symbol_with([&k](double x, double theta) { return k.at(x, theta); }, spec);
}

inline SymbolGrid sample_symbol(const GltExpr& k, const GridSpec& spec) {
  return sample_symbol_with([&k](double x, double theta) { return k(x, theta); }, spec);
}

/**
 * Finite family of closed disks used to compare two sample distributions:
 * centres on a 32x32 lattice over a bounding box, radii 2^-5..2^2 times the
 * box diagonal.
 */
struct DiskFamily {
  static constexpr int kLattice = 32;
  std::vector<cplx> centers;
  std::vector<double> radii;

  /** Family covering the union of all the given sample sets. */
  static DiskFamily covering(std::initializer_list<std::span<const cplx>> sets) {
    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    for (const auto& set : sets) {
      for (const auto& z : set) {
        xmin = std::min(xmin, z.real());
        xmax = std::max(xmax, z.real());
        ymin = std::min(ymin, z.imag());
        ymax = std::max(ymax, z.imag());
      }
    }
    DiskFamily fam;
    if (!(xmin <= xmax)) return fam;
    for (int a = 0; a < kLattice; ++a) {
      for (int b = 0; b < kLattice; ++b) {
        fam.centers.emplace_back(xmin + (xmax - xmin) * a / (kLattice - 1),
                                 ymin + (ymax - ymin) * b / (kLattice - 1));
      }
    }
    const double diag = std::hypot(xmax - xmin, ymax - ymin);
    for (int e = -5; e <= 2; ++e) fam.radii.push_back(std::ldexp(diag, e));
    return fam;
  }
};

/**
 * max over the disk family of |fraction of h in U - fraction of k in U|.
 * Without an explicit family, the one covering both sample sets is used.
 */
inline double rearrangement_distance(const SymbolGrid& h, const SymbolGrid& k, const DiskFamily& family) {
  if (h.domain() != k.domain()) throw DomainError("rearrangement_distance: domain tags differ");
  if (!h.finite() || !k.finite()) throw DomainError("rearrangement_distance: non-finite samples");

  const std::size_t nr = family.radii.size();
  std::vector<double> r2(nr);
  for (std::size_t r = 0; r < nr; ++r) r2[r] = family.radii[r] * family.radii[r];

  auto fractions = [&](std::span<const cplx> s, const cplx& c, std::vector<double>& out) {
    std::vector<std::size_t> count(nr, 0);
    for (const auto& z : s) {
      const double d2 = std::norm(z - c);
      for (std::size_t r = 0; r < nr; ++r) count[r] += d2 <= r2[r];
    }
    for (std::size_t r = 0; r < nr; ++r) out[r] = static_cast<double>(count[r]) / static_cast<double>(s.size());
  };

  double best = 0.0;
  std::vector<double> fh(nr), fk(nr);
  for (const auto& c : family.centers) {
    fractions(h.samples(), c, fh);
    fractions(k.samples(), c, fk);
    for (std::size_t r = 0; r < nr; ++r) best = std::max(best, std::abs(fh[r] - fk[r]));
  }
  return best;
}

inline double rearrangement_distance(const SymbolGrid& h, const SymbolGrid& k) {
  return rearrangement_distance(h, k, DiskFamily::covering({h.samples(), k.samples()}));
}

/** Distribution equality up to the empirical-measure noise floor 0.5/sqrt(min count). */
inline bool equal_in_distribution(const SymbolGrid& h, const SymbolGrid& k) {
  const double floor = 0.5 / std::sqrt(static_cast<double>(std::min(h.size(), k.size())));
  return rearrangement_distance(h, k) < floor;
}

enum class RearrangeMode { Real, Modulus };

/** Ascending samples: the discrete quantile function of the grid. */
inline std::vector<double> monotone_rearrangement(std::span<const cplx> samples,
                                                  RearrangeMode mode = RearrangeMode::Real) {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    if (mode == RearrangeMode::Modulus) {
      out.push_back(std::abs(s));
    } else {
      if (std::abs(s.imag()) > 1e-12 * std::max(1.0, std::abs(s.real()))) {
        throw DomainError("monotone_rearrangement: complex sample; use modulus mode");
      }
      out.push_back(s.real());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<double> monotone_rearrangement(const SymbolGrid& k, RearrangeMode mode = RearrangeMode::Real) {
  return monotone_rearrangement(k.samples(), mode);
}

}  // namespace glt
