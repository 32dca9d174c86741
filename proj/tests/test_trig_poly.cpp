#include <glt/error.hpp>
#include <glt/trig_poly.hpp>

#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using glt::cplx;
using glt::fourier_coeff;
using glt::parse_expr;
using glt::Role;
using glt::TrigPoly;

TEST(FourierCoeff, TwoCos) {
  const auto f = parse_expr("2*cos(theta)", Role::Theta);
  EXPECT_NEAR(std::abs(fourier_coeff(f, 1, 16) - cplx(1.0)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(fourier_coeff(f, 0, 16)), 0.0, 1e-12);
}

TEST(FourierCoeff, ExpITheta) {
  const auto f = parse_expr("exp(i*theta)", Role::Theta);
  EXPECT_NEAR(std::abs(fourier_coeff(f, 1, 16) - cplx(1.0)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(fourier_coeff(f, -1, 16)), 0.0, 1e-12);
}

TEST(FourierCoeff, QuadPointsPrecondition) {
  const auto f = parse_expr("1", Role::Theta);
  EXPECT_THROW((void)fourier_coeff(f, 3, 15), glt::DomainError);
  EXPECT_NO_THROW((void)fourier_coeff(f, 3, 16));
}

TEST(FourierCoeff, RecoversRandomPolynomials) {
  oracle::Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = rng.integer(0, 6);
    std::vector<cplx> c(2 * d + 1);
    for (auto& v : c) v = rng.cnormal();
    const TrigPoly p(d, c);
    const int q = std::max(2 * d + 2, 4 * (d + 1));
    for (int k = -d; k <= d; ++k) {
      EXPECT_LT(std::abs(fourier_coeff(p, k, q) - p.coeff(k)), 1e-12) << "d=" << d << " k=" << k;
    }
  }
}

TEST(TrigPoly, InvariantsAndEvaluation) {
  EXPECT_THROW(TrigPoly(1, {1.0, 2.0}), glt::DomainError);
  const TrigPoly p(2, {cplx(1, 1), 2.0, 3.0, cplx(0, -1), 0.5});
  oracle::Coeffs c{{-2, cplx(1, 1)}, {-1, 2.0}, {0, 3.0}, {1, cplx(0, -1)}, {2, 0.5}};
  for (double th = -3.0; th < 3.0; th += 0.37) {
    EXPECT_LT(std::abs(p(th) - oracle::trig_eval(c, th)), 1e-13);
    EXPECT_LT(std::abs(p(th) - p(th + 2 * std::numbers::pi)), 1e-12);
  }
}

TEST(TrigPoly, HermitianCoefficientsGiveRealValues) {
  const TrigPoly p(2, {cplx(0.5, -0.25), cplx(1, 2), 3.0, cplx(1, -2), cplx(0.5, 0.25)});
  ASSERT_TRUE(p.is_hermitian());
  for (double th = -3.1; th < 3.1; th += 0.1) EXPECT_LT(std::abs(p(th).imag()), 1e-12);
}

TEST(TrigPoly, ProductIsConvolution) {
  const TrigPoly e1 = TrigPoly::monomial(1);
  const TrigPoly sq = e1 * e1;
  EXPECT_EQ(sq.degree(), 2);
  EXPECT_EQ(sq.coeff(2), cplx(1.0));
  const TrigPoly c2 = TrigPoly::two_cos() * TrigPoly::two_cos();
  EXPECT_EQ(c2.coeff(0), cplx(2.0));
  EXPECT_EQ(c2.coeff(2), cplx(1.0));
  EXPECT_EQ(c2.coeff(-2), cplx(1.0));
}

TEST(TrigPoly, FromExprRecoversCoefficientsExactly) {
  const TrigPoly p = TrigPoly::from_expr(parse_expr("2*cos(theta)", Role::Theta));
  EXPECT_EQ(p, TrigPoly::two_cos());
  const TrigPoly q = TrigPoly::from_expr(parse_expr("1 + exp(-2*i*theta)/2", Role::Theta));
  EXPECT_EQ(q.degree(), 2);
  EXPECT_EQ(q.coeff(-2), cplx(0.5));
  EXPECT_EQ(q.coeff(0), cplx(1.0));
  EXPECT_EQ(TrigPoly::from_expr(parse_expr("3", Role::Theta)), TrigPoly::constant(3.0));
}

TEST(TrigPoly, FromExprRejectsNonPolynomials) {
  EXPECT_THROW((void)TrigPoly::from_expr(parse_expr("abs(theta)", Role::Theta)), glt::DomainError);
  EXPECT_THROW((void)TrigPoly::from_expr(parse_expr("cos(40*theta)", Role::Theta)), glt::DomainError);
  EXPECT_THROW((void)TrigPoly::from_expr(parse_expr("x", Role::A)), glt::DomainError);
}

TEST(TrigPoly, ToExprRoundTrip) {
  const TrigPoly p(2, {cplx(1, 1), 2.0, 3.0, cplx(0, -1), 0.5});
  const auto e = p.to_expr();
  for (double th = -3.0; th < 3.0; th += 0.5) EXPECT_LT(std::abs(e.at_theta(th) - p(th)), 1e-13);
}

TEST(TrigPoly, Trimmed) {
  const TrigPoly p(3, {0.0, 0.0, 1.0, 2.0, 1.0, 0.0, 0.0});
  EXPECT_EQ(p.trimmed(), TrigPoly::two_cos() + TrigPoly::constant(2.0));
}
