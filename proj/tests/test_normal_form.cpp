#include <glt/error.hpp>
#include <glt/linalg.hpp>
#include <glt/matgen.hpp>
#include <glt/normal_form.hpp>
#include <glt/spectra.hpp>

#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace glt;

namespace {

FuncExpr a_expr(const char* s) { return parse_expr(s, Role::A); }

std::vector<cplx> diag_values(const Diagonal& d) {
  return {d.diagonal().data(), d.diagonal().data() + d.diagonal().size()};
}

std::vector<cplx> eig_values(const Matrix& m) { return eigenvalues(m).samples; }

SymbolGrid theta_grid(const char* k, std::size_t ntheta = 1024) {
  return sample_symbol(parse_expr(k, Role::K), GridSpec{Domain::Rect, 256, ntheta});
}

}  // namespace

TEST(NormalForm, ConstantOneGivesPaddedIdentity) {
  const std::size_t n = 23;  // m = 4, block 5, three trailing zeros
  const auto nf = normal_form(GltExpr(a_expr("1"), TrigPoly()), n);
  Matrix want = Matrix::Zero(n, n);
  want.topLeftCorner(20, 20).setIdentity();
  EXPECT_LE((nf.represented() - want).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(nf.n, n);
}

TEST(NormalForm, ShiftSymbolIsNormalAndMatchesBlockCirculants) {
  const std::size_t n = 16;
  const auto f = TrigPoly::monomial(1);
  const auto nf = normal_form(GltExpr(a_expr("x"), f), n);
  EXPECT_EQ((dense(nf.d) - dense(d_af(a_expr("x"), f, n))).cwiseAbs().maxCoeff(), 0.0);
  const Matrix r = nf.represented();
  EXPECT_LE(normality_residual(r), 1e-10);
  EXPECT_LE(unitarity_residual(nf.q), 1e-12);
  // Oracle: blockdiag of (i/m) sum_k f_k P^k built from explicit permutation powers.
  Matrix want = Matrix::Zero(n, n);
  for (int s = 0; s < 4; ++s) want.block(4 * s, 4 * s, 4, 4) = (s + 1) / 4.0 * oracle::circulant({{1, 1.0}}, 4);
  EXPECT_LE((r - want).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(NormalForm, SumOfTermsAndSimilarity) {
  const std::size_t n = 25;
  const GltExpr e({{a_expr("1"), TrigPoly::two_cos()}, {a_expr("x"), TrigPoly()}});
  const auto nf = normal_form(e, n);
  const Matrix sum = dense(d_af(a_expr("1"), TrigPoly::two_cos(), n)) + dense(d_af(a_expr("x"), TrigPoly(), n));
  EXPECT_EQ((dense(nf.d) - sum).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_LE(matching_distance(eig_values(nf.represented()), diag_values(nf.d)), 1e-8);
  const Matrix lc = lc_op(a_expr("1"), TrigPoly::two_cos(), n) + lc_op(a_expr("x"), TrigPoly(), n);
  EXPECT_LE((nf.represented() - lc).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(NormalForm, SimilarityAcrossExpressions) {
  for (const char* text : {"x | exp(i*theta)", "1 - x | 2*cos(theta) ; x^2 | 1 + exp(2*i*theta)"}) {
    const auto e = parse_glt_expr(text);
    for (std::size_t n : {20u, 49u, 64u}) {
      const auto nf = normal_form(e, n);
      EXPECT_LE(normality_residual(nf.represented()), 1e-10);
      EXPECT_LE(matching_distance(eig_values(nf.represented()), diag_values(nf.d)), 1e-8) << text << " n=" << n;
    }
  }
}

TEST(VerifyNormalForm, ConstantOne) {
  const std::vector<std::size_t> sizes{16, 23, 40, 71};
  const auto rep = verify_normal_form(GltExpr(a_expr("1"), TrigPoly()), sizes, GridSpec{Domain::Rect, 64, 64});
  for (const auto& row : rep.rows) {
    const BlockLayout lay(row.n);
    EXPECT_LE(row.p, double(lay.tail) / row.n + 1e-12) << row.n;
    EXPECT_LE(row.eig_residual, row.tolerance);
  }
  EXPECT_TRUE(rep.eig_pass);
}

TEST(VerifyNormalForm, XTimesTwoCos) {
  const std::vector<std::size_t> sizes{16, 64, 256, 1024};
  const GltExpr e(a_expr("x"), TrigPoly::two_cos());
  const auto rep = verify_normal_form(e, sizes, GridSpec{Domain::Rect, 256, 256});
  for (const auto& row : rep.rows) EXPECT_LE(row.p, row.bound + 1e-8) << row.n;
  EXPECT_LT(rep.rows.back().eig_residual, rep.rows.front().eig_residual);
  EXPECT_TRUE(rep.eig_pass);

  // Independent check of one functional at n = 1024: hat(0, 0.5) over the
  // explicit diagonal a(i/m) 2cos(2 pi j / b) against a 2D Simpson integral.
  const std::size_t m = 32, b = 32;
  double emp = 0.0;
  for (std::size_t i = 1; i <= m; ++i)
    for (std::size_t j = 0; j < b; ++j)
      emp += oracle::hat(double(i) / m * 2.0 * std::cos(2.0 * std::numbers::pi * j / b), 0.0, 0.5);
  emp /= 1024.0;
  const double exact = oracle::simpson([](double x) {
    return oracle::simpson([x](double th) { return oracle::hat(x * 2.0 * std::cos(th), 0.0, 0.5); },
                           -std::numbers::pi, std::numbers::pi, 2000) / (2.0 * std::numbers::pi);
  }, 0.0, 1.0, 400);
  EXPECT_LE(std::abs(emp - exact), tau(1024));
}

TEST(VerifyNormalForm, RootsOfUnity) {
  const std::vector<std::size_t> sizes{64, 128, 256, 512};
  const auto rep = verify_normal_form(GltExpr(a_expr("1"), TrigPoly::monomial(1)), sizes, GridSpec{Domain::Rect, 16, 512});
  EXPECT_TRUE(rep.eig_pass);
  for (const auto& row : rep.rows) EXPECT_LE(row.eig_residual, row.tolerance);
  // The diagonal is the b-th roots of unity repeated m times.
  const auto nf = normal_form(GltExpr(a_expr("1"), TrigPoly::monomial(1)), 64);
  for (std::size_t s = 0; s < 8; ++s)
    for (std::size_t j = 0; j < 8; ++j)
      EXPECT_LE(std::abs(nf.d.diagonal()(8 * s + j) - std::polar(1.0, 2.0 * std::numbers::pi * j / 8)), 1e-14);
}

TEST(SortPerm, Examples) {
  Vector d(3);
  d << 3.0, 1.0, 2.0;
  const auto p = sort_perm(d);
  const Matrix pm = p.matrix().cast<cplx>();
  const Matrix out = pm * Matrix(d.asDiagonal()) * pm.transpose();
  EXPECT_EQ(out, Matrix(Vector(Eigen::Vector3cd(1.0, 2.0, 3.0)).asDiagonal()));
  EXPECT_EQ(p.apply(d), Vector(Eigen::Vector3cd(1.0, 2.0, 3.0)));

  Vector sorted(4);
  sorted << -1.0, 0.0, 0.0, 5.0;
  EXPECT_TRUE(sort_perm(sorted).is_identity());

  const Diagonal dx = d_af(a_expr("x"), TrigPoly(), 9);
  const std::vector<double> want{1.0 / 3, 1.0 / 3, 1.0 / 3, 2.0 / 3, 2.0 / 3, 2.0 / 3, 1, 1, 1};
  for (int i = 0; i < 9; ++i) EXPECT_NEAR(dx.diagonal()(i).real(), want[i], 1e-15);
  EXPECT_TRUE(sort_perm(dx).is_identity());
}

TEST(SortPerm, Errors) {
  Matrix m = Matrix::Identity(3, 3);
  m(0, 2) = 1e-6;
  EXPECT_THROW((void)sort_perm(m), DomainError);
  Vector c(2);
  c << cplx(0, 1), 1.0;
  EXPECT_THROW((void)sort_perm(c), DomainError);
}

TEST(SortPerm, PermutationMatrixAndSpectrumPreserved) {
  oracle::Rng rng(71);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = rng.integer(1, 30);
    Vector d(n);
    for (int i = 0; i < n; ++i) d(i) = double(rng.integer(-5, 5)) + (trial % 2 ? rng.normal() : 0.0);
    const auto p = sort_perm(d);
    const Eigen::MatrixXd pm = p.matrix();
    EXPECT_EQ(pm.rowwise().sum(), Eigen::VectorXd::Ones(n));
    EXPECT_EQ(pm.colwise().sum(), Eigen::RowVectorXd::Ones(n));
    const Matrix pd = pm.cast<cplx>() * Matrix(d.asDiagonal()) * pm.transpose().cast<cplx>();
    std::vector<double> got, orig;
    for (int i = 0; i < n; ++i) {
      got.push_back(pd(i, i).real());
      orig.push_back(d(i).real());
    }
    EXPECT_TRUE(std::is_sorted(got.begin(), got.end()));
    std::sort(orig.begin(), orig.end());
    EXPECT_EQ(got, orig);
  }
}

TEST(HermitianFunction, IdentityFunction) {
  const auto seq = seqs::toeplitz(TrigPoly::two_cos());
  const auto k = theta_grid("2*cos(theta)");
  const std::vector<std::size_t> sizes{16, 32, 64};
  const auto fam = TestFamily::default_for(k);
  const auto rep = hermitian_function(seq, parse_expr("t", Role::F), k, sizes, fam);
  const auto base = sv_symbol_residual(seq, k, fam, sizes);
  for (std::size_t r = 0; r < sizes.size(); ++r)
    for (std::size_t j = 0; j < fam.size(); ++j) EXPECT_NEAR(rep.sv_table.residuals[r][j], base.residuals[r][j], 1e-12);
  EXPECT_LE((hermitian_matrix_function(seq(16), parse_expr("t", Role::F)) - seq(16)).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(HermitianFunction, SquareOfTwoCos) {
  const auto k = theta_grid("2*cos(theta)", 4096);
  const std::vector<std::size_t> sizes{32, 64, 128, 256};
  const auto rep = hermitian_function(seqs::toeplitz(TrigPoly::two_cos()), parse_expr("t^2", Role::F), k, sizes);
  EXPECT_LT(rep.eig_table.max_at(3), rep.eig_table.max_at(0));
  EXPECT_TRUE(rep.eig_table.converged());
  EXPECT_TRUE(rep.sv_table.converged());
  // g(T) = T^2 for g(t) = t^2.
  const Matrix t = toeplitz(TrigPoly::two_cos(), 12);
  EXPECT_LE((hermitian_matrix_function(t, parse_expr("t^2", Role::F)) - t * t).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(HermitianFunction, ExpOfDiagonal) {
  const auto k = sample_symbol(parse_expr("x", Role::K), GridSpec{Domain::Unit, 4096, 1});
  const std::vector<std::size_t> sizes{32, 64, 128, 256};
  const auto rep = hermitian_function(seqs::diag_sampling(a_expr("x")), parse_expr("exp(t)", Role::F), k, sizes);
  for (std::size_t r = 0; r < sizes.size(); ++r) EXPECT_LE(rep.eig_table.max_at(r), 8.0 / sizes[r]) << sizes[r];
  // Oracle: the pushed samples are exp of the midpoints.
  for (std::size_t i = 0; i < 4096; i += 511) {
    EXPECT_NEAR(rep.pushed.samples()[i].real(), std::exp((i + 0.5) / 4096.0), 1e-14);
  }
  const Matrix e = hermitian_matrix_function(dense(diag_sampling(a_expr("x"), 5)), parse_expr("exp(t)", Role::F));
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(e(i, i).real(), std::exp((i + 1) / 5.0), 1e-13);
}

TEST(HermitianFunction, RejectsNonHermitian) {
  EXPECT_THROW((void)hermitian_matrix_function(counterexample("half_shift", 6), parse_expr("t", Role::F)),
               HermitianError);
}

TEST(AffineShift, LocallyCirculantShift) {
  const auto rep = affine_shift_test(seqs::lc(a_expr("1"), TrigPoly::monomial(1)), theta_grid("exp(i*theta)"),
                                     {0.0, 1.0, cplx(0, 1)}, {64, 128, 256, 512});
  EXPECT_TRUE(rep.all_pass);
  EXPECT_TRUE(rep.normal);
  EXPECT_TRUE(rep.lambda_licensed);
  EXPECT_EQ(rep.shifts.size(), 3u);
}

TEST(AffineShift, JordanNotLicensed) {
  const auto rep = affine_shift_test(seqs::counterexample("jordan_shift"), theta_grid("exp(i*theta)"), {0.0, 1.0},
                                     {64, 128, 256, 512});
  EXPECT_TRUE(rep.all_pass);
  EXPECT_FALSE(rep.normal);
  EXPECT_FALSE(rep.lambda_licensed);
  for (double r : rep.normality) EXPECT_NEAR(r, std::sqrt(2.0), 1e-12);
}

TEST(AffineShift, IdentityMinusOne) {
  const auto k = sample_symbol(parse_expr("1", Role::K), GridSpec{Domain::Unit, 16, 1});
  const auto rep = affine_shift_test(seqs::identity(), k, {1.0}, {8, 16, 32});
  EXPECT_TRUE(rep.lambda_licensed);
  for (std::size_t r = 0; r < 3; ++r) EXPECT_LE(rep.shifts[0].table.max_at(r), 1e-15);
}

TEST(AffineShift, ConsistentOnNormalSequences) {
  const auto k = sample_symbol(parse_glt_expr("x | exp(i*theta)"), GridSpec{Domain::Rect, 64, 64});
  const std::vector<std::size_t> sizes{64, 144, 256, 576};
  const auto seq = seqs::lc(a_expr("x"), TrigPoly::monomial(1));
  const auto base = affine_shift_test(seq, k, {0.0}, sizes);
  ASSERT_TRUE(base.all_pass);
  const auto rep = affine_shift_test(seq, k, default_shifts(), sizes);
  for (const auto& s : rep.shifts) EXPECT_TRUE(s.pass) << s.shift;
  EXPECT_TRUE(rep.lambda_licensed);
}

TEST(GroupEmbed, SameMatrix) {
  oracle::Rng rng(81);
  const Matrix a = rng.gaussian(20);
  const auto e = group_embed(a, a);
  EXPECT_LE(e.residual_p, 1e-8);
  EXPECT_LE(unitarity_residual(e.u), 1e-10);
  EXPECT_LE(unitarity_residual(e.v), 1e-10);
}

TEST(GroupEmbed, CirculantIntoToeplitz) {
  for (std::size_t n : {8u, 32u, 100u}) {
    const auto e = group_embed(seqs::circulant(TrigPoly::monomial(1)), seqs::toeplitz(TrigPoly::monomial(1)), n);
    EXPECT_LE(e.residual_p, 1.0 / n + 1e-12);
    EXPECT_LE(unitarity_residual(e.u), 1e-10);
    EXPECT_LE(unitarity_residual(e.v), 1e-10);
  }
}

TEST(GroupEmbed, DegenerateScaledIdentity) {
  oracle::Rng rng(82);
  const Matrix b = 2.0 * Matrix::Identity(10, 10);
  const Matrix a = 2.0 * rng.unitary(10);  // same singular values, different stored basis
  EXPECT_LE(group_embed(b, b).residual_p, 1e-10);
  EXPECT_LE(group_embed(a, b).residual_p, 1e-10);
  EXPECT_THROW((void)group_embed(Matrix::Identity(3, 3), Matrix::Identity(4, 4)), DomainError);
}

TEST(PolynomialAlgebra, SquarePlusIdentityOnNormalForm) {
  const GltExpr e(a_expr("x"), TrigPoly::two_cos());
  const auto seq = seqs::normal_form(e);
  const auto poly = MatrixSeq("poly", [seq](std::size_t n) {
    const Matrix a = seq(n);
    return Matrix(a * a + a);
  });
  const auto k = sample_symbol(e, GridSpec{Domain::Rect, 256, 256}).map([](const cplx& v) { return v * v + v; });
  const std::vector<std::size_t> sizes{16, 64, 256, 1024};
  const auto table = sv_symbol_residual(poly, k, TestFamily::default_for(k), sizes);
  EXPECT_LT(table.max_at(3), table.max_at(0));
  EXPECT_TRUE(table.converged());
}

TEST(PolynomialAlgebra, AlternatingIdentityHasNoLimit) {
  const auto seq = seqs::counterexample("alt_identity");
  const auto shifted = MatrixSeq("alt+I", [seq](std::size_t n) {
    Matrix a = seq(n);
    a.diagonal().array() += 1.0;
    return a;
  });
  const auto k = sample_symbol(parse_expr("2", Role::K), GridSpec{Domain::Unit, 16, 1});
  const std::vector<std::size_t> sizes{64, 65, 128, 129};
  const auto table = sv_symbol_residual(shifted, k, TestFamily::hats(3.0), sizes);
  const double even = std::max(table.max_at(0), table.max_at(2));
  const double odd = std::min(table.max_at(1), table.max_at(3));
  EXPECT_LE(even, 1e-12);
  EXPECT_GE(odd - even, 0.5);
}
