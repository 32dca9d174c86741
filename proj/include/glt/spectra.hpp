#pragma once

#include <glt/error.hpp>
#include <glt/expr.hpp>
#include <glt/linalg.hpp>
#include <glt/matgen.hpp>
#include <glt/parallel.hpp>
#include <glt/symbol.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

namespace glt {

enum class SpectrumKind { Singular, Eigen };

/** Multiset of spectral samples. Singular values are kept non-increasing. */
struct EmpiricalDist {
  SpectrumKind kind = SpectrumKind::Eigen;
  std::vector<cplx> samples;

  std::size_t size() const noexcept { return samples.size(); }
};

inline EmpiricalDist singular_values(const Matrix& a) {
  const auto sv = singular_value_vector(a);
  EmpiricalDist d{SpectrumKind::Singular, {}};
  d.samples.assign(sv.begin(), sv.end());
  return d;
}

/**
 * Eigenvalues. Diagonal inputs are read off directly, Hermitian ones go
 * through the self-adjoint solver, other circulants through a DFT of the
 * first column, everything else through the general complex Schur solver.
 */
inline EmpiricalDist eigenvalues(const Matrix& a) {
  if (a.rows() != a.cols()) throw DomainError("eigenvalues: matrix is not square");
  if (!a.allFinite()) throw NumericalError("eigenvalues: non-finite entries");
  EmpiricalDist d{SpectrumKind::Eigen, {}};
  const auto n = a.rows();
  d.samples.reserve(static_cast<std::size_t>(n));
  if (n == 0) return d;
  if (is_diagonal(a)) {
    for (Eigen::Index i = 0; i < n; ++i) d.samples.push_back(a(i, i));
    return d;
  }
  if (hermitian_residual(a) == 0.0) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("Hermitian eigensolver did not converge");
    for (Eigen::Index i = 0; i < n; ++i) d.samples.emplace_back(es.eigenvalues()(i), 0.0);
    return d;
  }
  if (is_circulant(a)) {
    // Direct DFT of the first column; twiddle angles are reduced mod n first.
    const double step = 2.0 * std::numbers::pi / static_cast<double>(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      cplx acc = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) acc += a(j, 0) * std::polar(1.0, -step * static_cast<double>((j * k) % n));
      d.samples.push_back(acc);
    }
    return d;
  }
  Eigen::ComplexEigenSolver<Matrix> es(a, false);
  if (es.info() != Eigen::Success) throw NumericalError("eigensolver did not converge");
  for (Eigen::Index i = 0; i < n; ++i) d.samples.push_back(es.eigenvalues()(i));
  return d;
}

/** A compactly supported test function with its centre and support radius. */
struct TestFunction {
  std::string label;
  FuncExpr f;
  cplx center = 0.0;
  double support_radius = 0.0;
};

/** Radial hat max(0, 1 - |t - c|/w). */
inline TestFunction hat(cplx center, double width, std::string label = {}) {
  const std::string c = "(" + detail::format_complex(center) + ")";
  const std::string w = "(" + detail::format_double(width) + ")";
  const std::string h = "(1 - abs(t - " + c + ")/" + w + ")";
  if (label.empty()) label = "hat(" + detail::format_complex(center) + "," + detail::format_double(width) + ")";
  return TestFunction{std::move(label), parse_expr("(" + h + " + abs" + h + ")/2", Role::F), center, width};
}

struct TestFamily {
  std::vector<TestFunction> functions;

  std::size_t size() const noexcept { return functions.size(); }

  /** Eight hats with centres spanning [-R, R], width R/4, plus one at 0. */
  static TestFamily hats(double radius) {
    TestFamily fam;
    const double w = radius / 4.0;
    for (int j = 0; j < 8; ++j) fam.functions.push_back(hat(-radius + 2.0 * radius * j / 7.0, w));
    fam.functions.push_back(hat(0.0, w));
    return fam;
  }

  /** hats(1 + max |k|) */
  static TestFamily default_for(const SymbolGrid& k) { return hats(1.0 + k.max_abs()); }

  /** Every function vanishes just outside its support (100 probes each). */
  bool supports_vanish() const {
    for (const auto& tf : functions) {
      for (int p = 0; p < 100; ++p) {
        const double phi = 2.0 * std::numbers::pi * p / 100.0;
        const cplx z = tf.center + tf.support_radius * (1.0 + 1e-9) * cplx(std::cos(phi), std::sin(phi));
        if (tf.f.at_t(z) != cplx(0.0)) return false;
      }
    }
    return true;
  }
};

/** (1/n) sum F(s_i) */
inline cplx empirical_functional(const EmpiricalDist& dist, const FuncExpr& f) {
  if (dist.samples.empty()) return 0.0;
  cplx acc = 0.0;
  for (const auto& s : dist.samples) acc += f.at_t(s);
  return acc / static_cast<double>(dist.samples.size());
}

enum class SymbolMode { Abs, Plain };

/** Grid mean of F(|k|) (Abs) or F(k) (Plain). */
inline cplx symbol_functional(const SymbolGrid& k, const FuncExpr& f, SymbolMode mode) {
  if (k.size() == 0) throw DomainError("symbol_functional: empty grid");
  cplx acc = 0.0;
  for (const auto& s : k.samples()) acc += f.at_t(mode == SymbolMode::Abs ? cplx(std::abs(s)) : s);
  return acc / static_cast<double>(k.size());
}

/** Verdict tolerance 10 * max(grid error, 1/sqrt(n)). */
inline double tau(std::size_t n, double grid_error = 0.0) {
  return 10.0 * std::max(grid_error, 1.0 / std::sqrt(static_cast<double>(n)));
}

inline void require_ladder(const std::vector<std::size_t>& sizes, std::size_t min_count, const char* where) {
  if (sizes.size() < min_count) {
    throw DomainError(std::string(where) + ": ladder needs at least " + std::to_string(min_count) + " sizes");
  }
  for (std::size_t i = 1; i < sizes.size(); ++i) {
    if (sizes[i] <= sizes[i - 1]) throw DomainError(std::string(where) + ": ladder must be strictly ascending");
  }
}

/** |empirical - symbol| per size (rows) and test function (columns). */
struct ResidualTable {
  std::vector<std::size_t> sizes;
  std::vector<std::string> labels;
  std::vector<std::vector<double>> residuals;
  double grid_error = 0.0;

  /** Largest residual in a row; NaN if any entry is NaN. */
  double max_at(std::size_t row) const {
    double m = 0.0;
    for (double r : residuals[row]) {
      if (std::isnan(r)) return r;
      m = std::max(m, r);
    }
    return m;
  }
  double tolerance_at(std::size_t row) const { return tau(sizes[row], grid_error); }
  std::size_t rows() const noexcept { return sizes.size(); }

  /** First row of the trailing half of the ladder. */
  std::size_t trailing_begin() const noexcept { return sizes.size() / 2; }

  /** Every trailing-half row is within tau(n): no residual left above the noise floor. */
  bool converged() const {
    for (std::size_t r = trailing_begin(); r < rows(); ++r) {
      if (!(max_at(r) <= tolerance_at(r))) return false;
    }
    return rows() > 0;
  }
};

/**
 * Residual table for arbitrary per-size spectra. `spectrum(n)` returns the
 * samples whose functional is compared with the grid functional.
 */
inline ResidualTable residual_table(const std::vector<std::size_t>& sizes,
                                    const std::function<EmpiricalDist(std::size_t)>& spectrum,
                                    const SymbolGrid& k, const TestFamily& family, SymbolMode mode,
                                    std::size_t threads = 1) {
  require_ladder(sizes, 1, "residual_table");
  if (!k.finite()) throw DomainError("residual_table: symbol grid has non-finite samples");
  ResidualTable table;
  table.sizes = sizes;
  table.grid_error = k.grid_error();
  std::vector<cplx> target;
  for (const auto& tf : family.functions) {
    table.labels.push_back(tf.label);
    target.push_back(symbol_functional(k, tf.f, mode));
  }
  table.residuals = parallel_map(sizes, [&](std::size_t n) {
    const EmpiricalDist dist = spectrum(n);
    std::vector<double> row;
    for (std::size_t j = 0; j < family.functions.size(); ++j) {
      row.push_back(std::abs(empirical_functional(dist, family.functions[j].f) - target[j]));
    }
    return row;
  }, threads);
  return table;
}

inline ResidualTable sv_symbol_residual(const MatrixSeq& seq, const SymbolGrid& k, const TestFamily& family,
                                        const std::vector<std::size_t>& sizes, std::size_t threads = 1) {
  return residual_table(sizes, [&seq](std::size_t n) { return singular_values(seq(n)); }, k, family,
                        SymbolMode::Abs, threads);
}

inline ResidualTable eig_symbol_residual(const MatrixSeq& seq, const SymbolGrid& k, const TestFamily& family,
                                         const std::vector<std::size_t>& sizes, std::size_t threads = 1) {
  return residual_table(sizes, [&seq](std::size_t n) { return eigenvalues(seq(n)); }, k, family,
                        SymbolMode::Plain, threads);
}

struct ZeroTestResult {
  ResidualTable table;
  double tolerance = 0.0;
  bool pass = false;
};

/**
 * Zero-distribution check: residuals |(1/n) sum F(sigma_i) - F(0)|; PASS when
 * the largest size is within tau(n).
 */
inline ZeroTestResult zero_distributed_test(const MatrixSeq& seq, const std::vector<std::size_t>& sizes,
                                            const TestFamily& family, std::size_t threads = 1) {
  require_ladder(sizes, 3, "zero_distributed_test");
  const SymbolGrid zero(GridSpec{Domain::Unit, 1, 1}, {cplx(0.0)});
  ZeroTestResult res;
  res.table = sv_symbol_residual(seq, zero, family, sizes, threads);
  res.table.grid_error = 0.0;
  const std::size_t last = sizes.size() - 1;
  res.tolerance = tau(sizes[last]);
  res.pass = res.table.max_at(last) < res.tolerance;
  return res;
}

inline ZeroTestResult zero_distributed_test(const MatrixSeq& seq, const std::vector<std::size_t>& sizes,
                                            std::size_t threads = 1) {
  return zero_distributed_test(seq, sizes, TestFamily::hats(1.0), threads);
}

}  // namespace glt
