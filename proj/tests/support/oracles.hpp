#pragma once

// Reference computations for the unit and acceptance tests. Each one is
// written from the defining formula and avoids the library code it checks.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;

/** Seeded source of test data. */
struct Rng {
  std::mt19937_64 engine;
  explicit Rng(std::uint64_t seed) : engine(seed) {}
  double normal() { return std::normal_distribution<double>()(engine); }
  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(engine); }
  cplx cnormal() { return {normal(), normal()}; }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine); }
  Mat gaussian(int n) {
    Mat a(n, n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) a(i, j) = cnormal();
    return a;
  }
  /** Unitary from the QR factor of a Gaussian matrix. */
  Mat unitary(int n) {
    Eigen::HouseholderQR<Mat> qr(gaussian(n));
    return qr.householderQ();
  }
};

/** Coefficient table k -> f_k. */
using Coeffs = std::map<int, cplx>;

inline cplx trig_eval(const Coeffs& c, double theta) {
  cplx s = 0.0;
  for (const auto& [k, v] : c) s += v * std::polar(1.0, k * theta);
  return s;
}

/** [f_{i-j}] */
inline Mat toeplitz(const Coeffs& c, int n) {
  Mat t = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const auto it = c.find(i - j);
      if (it != c.end()) t(i, j) = it->second;
    }
  return t;
}

/** sum_k f_k P^k with P the permutation sending e_j to e_{j+1 mod n}. */
inline Mat circulant(const Coeffs& c, int n) {
  Mat p = Mat::Zero(n, n);
  for (int j = 0; j < n; ++j) p((j + 1) % n, j) = 1.0;
  Mat out = Mat::Zero(n, n);
  for (const auto& [k, v] : c) {
    Mat pk = Mat::Identity(n, n);
    const int e = ((k % n) + n) % n;
    for (int r = 0; r < e; ++r) pk = p * pk;
    out += v * pk;
  }
  return out;
}

/** (1/sqrt n) [w^{jk}], w = exp(2 pi i / n) */
inline Mat dft(int n) {
  Mat f(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) f(j, k) = std::polar(1.0 / std::sqrt(double(n)), 2.0 * std::numbers::pi * j * k / n);
  return f;
}

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Mat direct_sum(const Mat& a, const Mat& b) {
  Mat out = Mat::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

/** Singular values through the Hermitian eigenproblem of A^H A, non-increasing. */
inline std::vector<double> singular_values_gram(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(a.adjoint() * a, Eigen::EigenvaluesOnly);
  std::vector<double> s;
  for (int i = 0; i < es.eigenvalues().size(); ++i) s.push_back(std::sqrt(std::max(0.0, es.eigenvalues()(i))));
  std::sort(s.begin(), s.end(), std::greater<>());
  return s;
}

/** min over all n+1 indices of (i-1)/n + s_i, s_{n+1} = 0. */
inline double brute_p(const std::vector<double>& s) {
  const double n = static_cast<double>(s.size());
  double best = 1.0;  // i = n + 1
  for (std::size_t i = 0; i < s.size(); ++i) best = std::min(best, static_cast<double>(i) / n + s[i]);
  return best;
}

/** Sup distance between order statistics of two equal-size real samples. */
inline double order_statistic_distance(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

/** sup_t |F_a(t) - F_b(t)| for the empirical CDFs of two real samples. */
inline double ks_distance(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<double> pts(a);
  pts.insert(pts.end(), b.begin(), b.end());
  double d = 0.0;
  for (double t : pts) {
    const double fa = double(std::upper_bound(a.begin(), a.end(), t) - a.begin()) / a.size();
    const double fb = double(std::upper_bound(b.begin(), b.end(), t) - b.begin()) / b.size();
    d = std::max(d, std::abs(fa - fb));
  }
  return d;
}

/** Greedy nearest-neighbour deletion: adequate when the multisets are well separated. */
inline double greedy_matching(std::vector<cplx> a, std::vector<cplx> b) {
  double worst = 0.0;
  for (const auto& z : a) {
    auto it = std::min_element(b.begin(), b.end(), [&](const cplx& p, const cplx& q) { return std::abs(p - z) < std::abs(q - z); });
    worst = std::max(worst, std::abs(*it - z));
    b.erase(it);
  }
  return worst;
}

/** Composite Simpson rule on [lo, hi] with an even number of panels. */
inline double simpson(const std::function<double(double)>& f, double lo, double hi, int panels = 20000) {
  const double h = (hi - lo) / panels;
  double s = f(lo) + f(hi);
  for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
  return s * h / 3.0;
}

inline double hat(double t, double c, double w) { return std::max(0.0, 1.0 - std::abs(t - c) / w); }

}  // namespace oracle
