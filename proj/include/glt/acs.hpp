#pragma once

#include <glt/error.hpp>
#include <glt/linalg.hpp>
#include <glt/matgen.hpp>
#include <glt/parallel.hpp>
#include <glt/spectra.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace glt {

/**
 * p(A) = min_{i=1..n+1} (i-1)/n + s_i with s_{n+1} = 0, from singular values
 * sorted non-increasing. Returns {p, argmin i} (1-based, first minimiser).
 */
inline std::pair<double, std::size_t> p_from_singular_values(std::span<const double> sv) {
  const std::size_t n = sv.size();
  if (n == 0) return {0.0, 1};
  double best = INFINITY;
  std::size_t arg = 1;
  for (std::size_t i = 1; i <= n + 1; ++i) {
    const double s = i <= n ? sv[i - 1] : 0.0;
    const double v = static_cast<double>(i - 1) / static_cast<double>(n) + s;
    if (v < best) {
      best = v;
      arg = i;
    }
  }
  return {best, arg};
}

/**
 * The input is first rotated by the conjugate phase of its first
 * largest-modulus entry, so p(A) and p(-A) see bitwise-equal matrices.
 */
inline double p_metric(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::Index r = 0, c = 0;
  const double peak = a.cwiseAbs().maxCoeff(&r, &c);
  if (!(peak > 0.0)) return p_from_singular_values(singular_value_vector(a)).first;
  const cplx phase = std::conj(a(r, c) / peak);
  const auto sv = singular_value_vector(Matrix(a * phase));
  return p_from_singular_values(sv).first;
}

/** A = rank_part + norm_part; rank_part keeps the top split_index-1 singular triplets. */
struct SplitResult {
  Matrix rank_part;
  Matrix norm_part;
  std::size_t split_index = 1;
  double p_value = 0.0;
};

inline SplitResult optimal_split(const Matrix& a) {
  if (a.rows() != a.cols()) throw DomainError("optimal_split: matrix is not square");
  if (!a.allFinite()) throw NumericalError("optimal_split: non-finite entries");
  const auto n = a.rows();
  SplitResult out;
  if (n == 0) return out;
  const SvdResult dec = svd(a);
  const Eigen::VectorXd& s = dec.s;
  std::vector<double> sv(s.data(), s.data() + s.size());
  const auto [p, i_star] = p_from_singular_values(sv);
  const Eigen::Index keep = static_cast<Eigen::Index>(i_star - 1);
  out.rank_part = dec.u.leftCols(keep) * s.head(keep).cast<cplx>().asDiagonal() * dec.v.leftCols(keep).adjoint();
  out.norm_part = a - out.rank_part;
  out.split_index = i_star;
  out.p_value = p;
  return out;
}

/** Per-size p(A_n - B_n) and the trailing-half maximum as the limsup estimate. */
struct AcsEstimate {
  std::vector<std::size_t> sizes;
  std::vector<double> p;
  std::vector<std::optional<double>> bound;
  double rho_estimate = 0.0;
};

inline double trailing_max(const std::vector<double>& v) {
  double m = 0.0;
  for (std::size_t i = v.size() / 2; i < v.size(); ++i) m = std::max(m, v[i]);
  return m;
}

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

inline AcsEstimate acs_distance(const MatrixSeq& a, const MatrixSeq& b, const std::vector<std::size_t>& sizes,
                                std::size_t threads = 1) {
  require_ladder(sizes, 4, "acs_distance");
  AcsEstimate est;
  est.sizes = sizes;
  est.p = parallel_map(sizes, [&](std::size_t n) { return p_metric(a(n) - b(n)); }, threads);
  est.bound.assign(sizes.size(), std::nullopt);
  est.rho_estimate = trailing_max(est.p);
  return est;
}

struct AcsVerdict {
  AcsEstimate estimate;
  bool pass = false;
};

/** PASS iff rho < tol and the last p is not above the ladder median. */
inline AcsVerdict acs_equivalent(const MatrixSeq& a, const MatrixSeq& b, const std::vector<std::size_t>& sizes,
                                 double tol, std::size_t threads = 1) {
  AcsVerdict v;
  v.estimate = acs_distance(a, b, sizes, threads);
  v.pass = v.estimate.rho_estimate < tol && v.estimate.p.back() <= median(v.estimate.p);
  return v;
}

/** Closed-form upper bounds on p for the standard approximations. */
namespace bounds {

/**
 * p(D_n(a)T_n(f) - LT_n(a,f)) <= (2k^2 m + 2 sqrt(n))/n + (2k+1) lip 2M/m,
 * k = deg f, M = max |f_j|, lip >= ||a'||_inf.
 */
inline double lt(std::size_t n, int degree, double max_coeff, double lipschitz) {
  const BlockLayout lay(n);
  const double k = degree, m = static_cast<double>(lay.m), dn = static_cast<double>(n);
  return (2.0 * k * k * m + 2.0 * std::sqrt(dn)) / dn + (2.0 * k + 1.0) * lipschitz * 2.0 * max_coeff / m;
}

/** p(T_n(f) - C_n(f)) <= rank/n <= 2k^2/n */
inline double toeplitz_circulant(std::size_t n, int degree) {
  return 2.0 * degree * degree / static_cast<double>(n);
}

/** p(LT_n(a,f) - LC_n(a,f)) <= floor(sqrt n) 2k^2 / n */
inline double lt_lc(std::size_t n, int degree) {
  return static_cast<double>(BlockLayout(n).m) * 2.0 * degree * degree / static_cast<double>(n);
}

}  // namespace bounds

/** Finite-difference estimate of ||a'||_inf on [0,1]. */
inline double lipschitz_estimate(const FuncExpr& a, std::size_t points = 4096) {
  double best = 0.0;
  const double h = 1.0 / static_cast<double>(points);
  cplx prev = a.at_x(0.0);
  for (std::size_t j = 1; j <= points; ++j) {
    const cplx cur = a.at_x(static_cast<double>(j) * h);
    best = std::max(best, std::abs(cur - prev) / h);
    prev = cur;
  }
  return best;
}

/** Selected level per ladder size plus the extracted diagonal sequence. */
struct DiagonalSelection {
  std::vector<std::size_t> sizes;
  std::vector<std::size_t> level;  ///< 1-based m(n)
  std::vector<double> epsilon;     ///< per level m = 2..M, index m-2
  MatrixSeq extracted{"diagonal", [](std::size_t n) { return Matrix(Matrix::Zero(n, n)); }};
};

/**
 * Diagonal extraction n -> B_{n, m(n)} from a finite family of sequences.
 *
 * With delta_n(m) = p(B_{n,m} - B_{n,m-1}) and eps(m) twice its maximum over
 * the trailing half of the ladder, level m is admissible at size n when
 * delta_n(m') <= eps(m') for every m' <= m; m(n) is the smallest admissible
 * top level over all sizes >= n, which makes it nondecreasing.
 */
inline DiagonalSelection diagonal_select(const std::vector<MatrixSeq>& family, const std::vector<std::size_t>& sizes,
                                         std::size_t threads = 1) {
  if (family.size() < 2) throw DomainError("diagonal_select: family needs at least two levels");
  require_ladder(sizes, 2, "diagonal_select");
  const std::size_t levels = family.size();

  const auto delta = parallel_map(sizes, [&](std::size_t n) {
    std::vector<double> row;
    Matrix prev = family[0](n);
    for (std::size_t m = 1; m < levels; ++m) {
      Matrix cur = family[m](n);
      row.push_back(p_metric(cur - prev));
      prev = std::move(cur);
    }
    return row;
  }, threads);

  DiagonalSelection sel;
  sel.sizes = sizes;
  for (std::size_t m = 1; m < levels; ++m) {
    std::vector<double> col;
    for (const auto& row : delta) col.push_back(row[m - 1]);
    sel.epsilon.push_back(2.0 * trailing_max(col) + 1e-12);
  }

  std::vector<std::size_t> raw(sizes.size());
  for (std::size_t r = 0; r < sizes.size(); ++r) {
    std::size_t top = 1;
    while (top < levels && delta[r][top - 1] <= sel.epsilon[top - 1]) ++top;
    raw[r] = top;
  }
  sel.level.assign(sizes.size(), levels);
  std::size_t running = levels;
  for (std::size_t r = sizes.size(); r-- > 0;) {
    running = std::min(running, raw[r]);
    sel.level[r] = running;
  }

  sel.extracted = MatrixSeq("diagonal", [family, sizes, lv = sel.level](std::size_t n) {
    std::size_t pick = lv.front();
    for (std::size_t r = 0; r < sizes.size(); ++r) {
      if (sizes[r] <= n) pick = lv[r];
    }
    return family[pick - 1](n);
  });
  return sel;
}

}  // namespace glt
