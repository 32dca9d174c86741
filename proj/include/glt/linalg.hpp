#pragma once

#include <glt/error.hpp>
#include <glt/expr.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace glt {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Diagonal = Eigen::DiagonalMatrix<cplx, Eigen::Dynamic>;

inline Matrix dense(const Diagonal& d) { return d.toDenseMatrix(); }

inline bool is_diagonal(const Matrix& a) {
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (i != j && a(i, j) != cplx(0.0)) return false;
    }
  }
  return true;
}

/** Exact test for A(i, j) = c((i - j) mod n). */
inline bool is_circulant(const Matrix& a) {
  const auto n = a.rows();
  if (n != a.cols()) return false;
  for (Eigen::Index j = 1; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (a(i, j) != a((i - j + n) % n, 0)) return false;
    }
  }
  return true;
}

/** max |A - A^H| entrywise. */
inline double hermitian_residual(const Matrix& a) { return (a - a.adjoint()).cwiseAbs().maxCoeff(); }

/** ||A^H A - A A^H||_F */
inline double normality_residual(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  return (a.adjoint() * a - a * a.adjoint()).norm();
}

/** max |U^H U - I| entrywise. */
inline double unitarity_residual(const Matrix& u) {
  if (u.size() == 0) return 0.0;
  return (u.adjoint() * u - Matrix::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff();
}

/** Singular values, non-increasing. */
/** A = u diag(s) v^H with s non-increasing. */
struct SvdResult {
  Matrix u;
  Eigen::VectorXd s;
  Matrix v;
};

namespace detail {

/**
 * Accepts a factorisation when U and V are unitary and U S V^H reproduces A,
 * both to a size-scaled multiple of machine precision. Together these pin
 * down the singular values.
 */
inline bool svd_consistent(const Matrix& a, const SvdResult& r) {
  if (!r.s.allFinite() || (r.s.array() < 0.0).any() || !r.u.allFinite() || !r.v.allFinite()) return false;
  const auto n = a.rows();
  const double tol = 1e-12 * static_cast<double>(n);
  const Matrix id = Matrix::Identity(n, n);
  if ((r.u.adjoint() * r.u - id).cwiseAbs().maxCoeff() > tol) return false;
  if ((r.v.adjoint() * r.v - id).cwiseAbs().maxCoeff() > tol) return false;
  const double scale = std::max(r.s.size() ? r.s.maxCoeff() : 0.0, 1e-300);
  const Matrix back = r.u * r.s.cast<cplx>().asDiagonal() * r.v.adjoint();
  return (back - a).cwiseAbs().maxCoeff() <= tol * scale;
}

template <class Solver>
SvdResult take_svd(const Solver& svd) {
  return SvdResult{svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

}  // namespace detail

/**
 * Dense SVD with full unitary factors. Eigen's divide-and-conquer solver is
 * tried first; on matrices with heavily repeated singular values its
 * deflation step can return wrong (even finite) values, so every result is
 * verified and the two-sided Jacobi solver is used when the check fails.
 */
inline SvdResult svd(const Matrix& a) {
  if (a.rows() != a.cols()) throw DomainError("svd: matrix is not square");
  if (!a.allFinite()) throw NumericalError("svd: non-finite entries");
  if (a.size() == 0) return {};
  const unsigned opts = Eigen::ComputeFullU | Eigen::ComputeFullV;
  {
    Eigen::BDCSVD<Matrix> dc(a, opts);
    if (dc.info() == Eigen::Success) {
      SvdResult r = detail::take_svd(dc);
      if (detail::svd_consistent(a, r)) return r;
    }
  }
  Eigen::JacobiSVD<Matrix> jac(a, opts);
  if (jac.info() != Eigen::Success) throw NumericalError("SVD did not converge");
  SvdResult r = detail::take_svd(jac);
  if (!r.s.allFinite()) throw NumericalError("SVD produced non-finite values");
  return r;
}

inline std::vector<double> singular_value_vector(const Matrix& a) {
  if (a.rows() != a.cols()) throw DomainError("singular values: matrix is not square");
  if (a.size() == 0) return {};
  if (!a.allFinite()) throw NumericalError("singular values: non-finite entries");
  const Eigen::VectorXd s = svd(a).s;
  std::vector<double> out(s.data(), s.data() + s.size());
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

/** Number of singular values above rel_tol * sigma_1. */
inline std::size_t numerical_rank(const std::vector<double>& sv, double rel_tol = 1e-10) {
  if (sv.empty() || sv.front() == 0.0) return 0;
  const double cut = rel_tol * sv.front();
  return static_cast<std::size_t>(std::count_if(sv.begin(), sv.end(), [cut](double s) { return s > cut; }));
}

inline std::size_t numerical_rank(const Matrix& a, double rel_tol = 1e-10) {
  return numerical_rank(singular_value_vector(a), rel_tol);
}

namespace detail {

inline bool augment(std::size_t u, const std::vector<std::vector<std::size_t>>& adj,
                    std::vector<char>& seen, std::vector<std::size_t>& match_b) {
  for (std::size_t v : adj[u]) {
    if (seen[v]) continue;
    seen[v] = 1;
    if (match_b[v] == SIZE_MAX || augment(match_b[v], adj, seen, match_b)) {
      match_b[v] = u;
      return true;
    }
  }
  return false;
}

inline bool perfect_matching_within(const std::vector<cplx>& a, const std::vector<cplx>& b, double r) {
  const std::size_t n = a.size();
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(a[i] - b[j]) <= r) adj[i].push_back(j);
    }
    if (adj[i].empty()) return false;
  }
  std::vector<std::size_t> match_b(n, SIZE_MAX);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<char> seen(n, 0);
    if (!augment(i, adj, seen, match_b)) return false;
  }
  return true;
}

}  // namespace detail

/**
 * Bottleneck matching distance between two equal-size multisets of points:
 * the smallest r such that a perfect matching with every |a_i - b_j| <= r exists.
 */
inline double matching_distance(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  if (a.size() != b.size()) throw DomainError("matching_distance: sizes differ");
  if (a.empty()) return 0.0;
  std::vector<double> cand;
  cand.reserve(a.size() * b.size());
  for (const auto& z : a) {
    for (const auto& w : b) cand.push_back(std::abs(z - w));
  }
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  std::size_t lo = 0, hi = cand.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (detail::perfect_matching_within(a, b, cand[mid])) hi = mid;
    else lo = mid + 1;
  }
  return cand[lo];
}

}  // namespace glt
