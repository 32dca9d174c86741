#pragma once

#include <glt/acs.hpp>
#include <glt/error.hpp>
#include <glt/expr.hpp>
#include <glt/linalg.hpp>
#include <glt/matgen.hpp>
#include <glt/parallel.hpp>
#include <glt/spectra.hpp>
#include <glt/symbol.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace glt {

/**
 * Unitary similarity Q^H D Q with Q = q_block(n) independent of the sequence
 * and D = sum_i D_n(a_i, f_i).
 */
struct NormalForm {
  Matrix q;
  Diagonal d;
  GltExpr source;
  std::size_t n = 0;

  Matrix represented() const { return q.adjoint() * d * q; }
};

inline NormalForm normal_form(const GltExpr& expr, std::size_t n) {
  Vector diag = Vector::Zero(static_cast<Eigen::Index>(n));
  for (const auto& term : expr.terms()) diag += d_af(term.a, term.f, n).diagonal();
  return NormalForm{q_block(n), Diagonal(diag), expr, n};
}

namespace seqs {

/** n -> Q_n^H D_{n,A} Q_n */
inline MatrixSeq normal_form(const GltExpr& expr) {
  return MatrixSeq("normal_form", [expr](std::size_t n) { return glt::normal_form(expr, n).represented(); }, expr);
}

}  // namespace seqs

/** Combined bound on p(sum D_n(a_i)T_n(f_i) - Q^H D Q) from the LT and LT/LC estimates. */
inline double normal_form_bound(const GltExpr& expr, std::size_t n) {
  double b = 0.0;
  for (const auto& term : expr.terms()) {
    b += bounds::lt(n, term.f.degree(), term.f.max_abs_coeff(), lipschitz_estimate(term.a)) +
         bounds::lt_lc(n, term.f.degree());
  }
  return b;
}

struct NormalFormRow {
  std::size_t n = 0;
  double p = 0.0;
  double bound = 0.0;
  double eig_residual = 0.0;
  double tolerance = 0.0;
};

struct NormalFormReport {
  std::vector<NormalFormRow> rows;
  ResidualTable eig_table;
  bool acs_pass = false;        ///< every p within its bound and the ladder ends at or below its median
  bool eig_pass = false;        ///< every eigenvalue residual within tau(n)
  bool p_decreasing = false;
  bool residual_decreasing = false;
};

/**
 * Checks the normal form over a ladder: acs distance to the generating
 * sequence and eigenvalue distribution of the diagonal part against the symbol.
 */
inline NormalFormReport verify_normal_form(const GltExpr& expr, const std::vector<std::size_t>& sizes,
                                           const GridSpec& grid, const std::optional<TestFamily>& family = {},
                                           std::size_t threads = 1) {
  require_ladder(sizes, 1, "verify_normal_form");
  const SymbolGrid k = sample_symbol(expr, grid);
  const TestFamily fam = family ? *family : TestFamily::default_for(k);
  const MatrixSeq generating = seqs::glt_sum(expr);

  NormalFormReport rep;
  rep.eig_table = residual_table(sizes, [&expr](std::size_t n) {
    const Diagonal d = normal_form(expr, n).d;
    EmpiricalDist dist{SpectrumKind::Eigen, {}};
    dist.samples.assign(d.diagonal().data(), d.diagonal().data() + d.diagonal().size());
    return dist;
  }, k, fam, SymbolMode::Plain, threads);

  const auto ps = parallel_map(sizes, [&](std::size_t n) {
    return p_metric(generating(n) - normal_form(expr, n).represented());
  }, threads);

  rep.acs_pass = true;
  rep.eig_pass = true;
  for (std::size_t r = 0; r < sizes.size(); ++r) {
    NormalFormRow row{sizes[r], ps[r], normal_form_bound(expr, sizes[r]), rep.eig_table.max_at(r),
                      rep.eig_table.tolerance_at(r)};
    rep.acs_pass = rep.acs_pass && row.p <= row.bound + 1e-8;
    rep.eig_pass = rep.eig_pass && row.eig_residual <= row.tolerance;
    rep.rows.push_back(row);
  }
  rep.acs_pass = rep.acs_pass && ps.back() <= median(ps);
  rep.p_decreasing = true;
  rep.residual_decreasing = true;
  for (std::size_t r = 1; r < rep.rows.size(); ++r) {
    rep.p_decreasing = rep.p_decreasing && rep.rows[r].p < rep.rows[r - 1].p;
    rep.residual_decreasing = rep.residual_decreasing && rep.rows[r].eig_residual < rep.rows[r - 1].eig_residual;
  }
  return rep;
}

/** Permutation matrix P with P(i, image[i]) = 1; (P D P^T)_ii = D_{image[i]}. */
struct Permutation {
  std::vector<std::size_t> image;

  std::size_t size() const noexcept { return image.size(); }

  Eigen::MatrixXd matrix() const {
    const auto n = static_cast<Eigen::Index>(image.size());
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) p(i, static_cast<Eigen::Index>(image[static_cast<std::size_t>(i)])) = 1.0;
    return p;
  }

  /** diag(P D P^T) */
  Vector apply(const Vector& d) const {
    Vector out(d.size());
    for (std::size_t i = 0; i < image.size(); ++i) out(static_cast<Eigen::Index>(i)) = d(static_cast<Eigen::Index>(image[i]));
    return out;
  }

  bool is_identity() const {
    for (std::size_t i = 0; i < image.size(); ++i) {
      if (image[i] != i) return false;
    }
    return true;
  }
};

/** Stable ascending sort of a real diagonal. */
inline Permutation sort_perm(const Vector& diagonal) {
  std::vector<double> vals(static_cast<std::size_t>(diagonal.size()));
  for (Eigen::Index i = 0; i < diagonal.size(); ++i) {
    const cplx v = diagonal(i);
    if (std::abs(v.imag()) > 1e-12 * std::max(1.0, std::abs(v.real()))) {
      throw DomainError("sort_perm: diagonal entries must be real");
    }
    vals[static_cast<std::size_t>(i)] = v.real();
  }
  Permutation p;
  p.image.resize(vals.size());
  std::iota(p.image.begin(), p.image.end(), std::size_t{0});
  std::stable_sort(p.image.begin(), p.image.end(), [&vals](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
  return p;
}

inline Permutation sort_perm(const Diagonal& d) { return sort_perm(Vector(d.diagonal())); }

inline Permutation sort_perm(const Matrix& d) {
  double off = 0.0;
  for (Eigen::Index j = 0; j < d.cols(); ++j) {
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
      if (i != j) off += std::abs(d(i, j));
    }
  }
  if (off > 1e-12) throw DomainError("sort_perm: matrix is not diagonal");
  return sort_perm(Vector(d.diagonal()));
}

/** g(A) = V g(Lambda) V^H for Hermitian A. */
inline Matrix hermitian_matrix_function(const Matrix& a, const FuncExpr& g) {
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if (hermitian_residual(a) > 1e-10 * scale) throw HermitianError("matrix is not Hermitian");
  const Matrix h = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success) throw NumericalError("Hermitian eigensolver did not converge");
  Vector gl(h.rows());
  for (Eigen::Index i = 0; i < h.rows(); ++i) gl(i) = g.at_t(es.eigenvalues()(i));
  return es.eigenvectors() * gl.asDiagonal() * es.eigenvectors().adjoint();
}

struct HermitianFnReport {
  SymbolGrid pushed;  ///< g o k on the grid
  ResidualTable sv_table;
  ResidualTable eig_table;
};

/** Tests {g(A_n)} against g(k) in both singular-value and eigenvalue sense. */
inline HermitianFnReport hermitian_function(const MatrixSeq& seq, const FuncExpr& g, const SymbolGrid& k,
                                            const std::vector<std::size_t>& sizes,
                                            const std::optional<TestFamily>& family = {}, std::size_t threads = 1) {
  SymbolGrid pushed = k.map([&g](const cplx& v) { return g.at_t(v); });
  const TestFamily fam = family ? *family : TestFamily::default_for(pushed);
  // Both tables need g(A_n); compute it once per size.
  const auto mats = parallel_map(sizes, [&](std::size_t n) { return hermitian_matrix_function(seq(n), g); }, threads);
  auto index_of = [&sizes](std::size_t n) {
    return static_cast<std::size_t>(std::find(sizes.begin(), sizes.end(), n) - sizes.begin());
  };
  ResidualTable sv = residual_table(sizes, [&](std::size_t n) { return singular_values(mats[index_of(n)]); },
                                    pushed, fam, SymbolMode::Abs, threads);
  ResidualTable eig = residual_table(sizes, [&](std::size_t n) { return eigenvalues(mats[index_of(n)]); },
                                     pushed, fam, SymbolMode::Plain, threads);
  return HermitianFnReport{std::move(pushed), std::move(sv), std::move(eig)};
}

/** Default shifts 0, 1, -1, i, -i, 1/2 + i/2. */
inline std::vector<cplx> default_shifts() {
  return {0.0, 1.0, -1.0, cplx(0.0, 1.0), cplx(0.0, -1.0), cplx(0.5, 0.5)};
}

struct ShiftResult {
  cplx shift;
  ResidualTable table;
  bool pass = false;
};

struct ShiftReport {
  std::vector<ShiftResult> shifts;
  std::vector<std::size_t> sizes;
  std::vector<double> normality;  ///< ||A^H A - A A^H||_F per size
  bool all_pass = false;
  bool normal = false;
  /** Singular-value tests of every shift passed on a normal sequence. */
  bool lambda_licensed = false;
};

inline bool is_normal(double residual, const Matrix& a) {
  return residual <= 1e-10 * std::max(1.0, a.squaredNorm());
}

/**
 * For each shift c: {A_n - c I} against k - c in the singular-value sense.
 * On a normal sequence, passing every shift supports k as eigenvalue symbol.
 */
inline ShiftReport affine_shift_test(const MatrixSeq& seq, const SymbolGrid& k, const std::vector<cplx>& shifts,
                                     const std::vector<std::size_t>& sizes,
                                     const std::optional<TestFamily>& family = {}, std::size_t threads = 1) {
  require_ladder(sizes, 1, "affine_shift_test");
  ShiftReport rep;
  rep.sizes = sizes;
  const auto mats = parallel_map(sizes, [&seq](std::size_t n) { return seq(n); }, threads);
  rep.normal = true;
  for (const auto& a : mats) {
    const double r = normality_residual(a);
    rep.normality.push_back(r);
    rep.normal = rep.normal && is_normal(r, a);
  }
  rep.all_pass = true;
  for (const cplx c : shifts) {
    const SymbolGrid kc = k.map([c](const cplx& v) { return v - c; });
    const TestFamily fam = family ? *family : TestFamily::default_for(kc);
    ResidualTable table = residual_table(sizes, [&](std::size_t n) {
      const auto idx = static_cast<std::size_t>(std::find(sizes.begin(), sizes.end(), n) - sizes.begin());
      Matrix m = mats[idx];
      m.diagonal().array() -= c;
      return singular_values(m);
    }, kc, fam, SymbolMode::Abs, threads);
    const bool pass = table.converged();
    rep.all_pass = rep.all_pass && pass;
    rep.shifts.push_back(ShiftResult{c, std::move(table), pass});
  }
  rep.lambda_licensed = rep.all_pass && rep.normal;
  return rep;
}

/** Unitaries with U A V close to B in the acs sense. */
struct EmbeddingPair {
  Matrix u;
  Matrix v;
  double residual_p = 0.0;
};

namespace detail {

/** SVD A = L diag(s) R with s non-increasing and each column of L phase-fixed. */
struct PhasedSvd {
  Matrix left;
  Eigen::VectorXd sigma;
  Matrix right;  ///< R = V^H
};

inline PhasedSvd phased_svd(const Matrix& a) {
  const SvdResult dec = svd(a);
  PhasedSvd out{dec.u, dec.s, dec.v.adjoint()};
  for (Eigen::Index j = 0; j < out.left.cols(); ++j) {
    Eigen::Index arg = 0;
    out.left.col(j).cwiseAbs().maxCoeff(&arg);
    const cplx lead = out.left(arg, j);
    if (std::abs(lead) == 0.0) continue;
    const cplx phase = std::conj(lead) / std::abs(lead);
    out.left.col(j) *= phase;
    out.right.row(j) *= std::conj(phase);
  }
  return out;
}

}  // namespace detail

/**
 * B = Q S W, A = Q' S' W'; P, P' sort S, S' ascending;
 * U = Q P^T P' Q'^H, V = W'^H P'^T P W, residual p(B - U A V).
 */
inline EmbeddingPair group_embed(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols()) {
    throw DomainError("group_embed: matrices must be square and of equal size");
  }
  const auto sb = detail::phased_svd(b);
  const auto sa = detail::phased_svd(a);
  const Eigen::MatrixXd p = sort_perm(Vector(sb.sigma.cast<cplx>())).matrix();
  const Eigen::MatrixXd pp = sort_perm(Vector(sa.sigma.cast<cplx>())).matrix();
  const Matrix perm = (p.transpose() * pp).cast<cplx>();
  EmbeddingPair out;
  out.u = sb.left * perm * sa.left.adjoint();
  out.v = sa.right.adjoint() * perm.adjoint() * sb.right;
  out.residual_p = p_metric(b - out.u * a * out.v);
  return out;
}

inline EmbeddingPair group_embed(const MatrixSeq& a, const MatrixSeq& b, std::size_t n) {
  return group_embed(a(n), b(n));
}

}  // namespace glt
