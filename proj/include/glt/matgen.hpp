#pragma once

#include <glt/error.hpp>
#include <glt/expr.hpp>
#include <glt/linalg.hpp>
#include <glt/symbol.hpp>
#include <glt/trig_poly.hpp>

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace glt {

/**
 * Block structure shared by the LT/LC operators:
 * m = floor(sqrt(n)) blocks of size floor(n/m), then a tail of size t.
 */
struct BlockLayout {
  std::size_t n;
  std::size_t m;
  std::size_t block;
  std::size_t tail;

  explicit BlockLayout(std::size_t size) : n(size) {
    m = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
    while (m * m > n) --m;
    while ((m + 1) * (m + 1) <= n) ++m;
    block = m ? n / m : 0;
    tail = n - m * block;
  }
};

namespace detail {

inline cplx finite_or_throw(cplx v, const char* where) {
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
    throw EvalError(std::string(where) + ": non-finite sample");
  }
  return v;
}

inline void require_blocks(std::size_t n, const char* where) {
  if (n < 4) throw DomainError(std::string(where) + ": n must be at least 4");
}

}  // namespace detail

/** T_n(f) = [f_{i-j}] */
inline Matrix toeplitz(const TrigPoly& f, std::size_t n) {
  Matrix t = Matrix::Zero(n, n);
  const long d = f.degree();
  for (long i = 0; i < static_cast<long>(n); ++i) {
    for (long k = -d; k <= d; ++k) {
      const long j = i - k;
      if (j >= 0 && j < static_cast<long>(n)) t(i, j) = f.coeff(static_cast<int>(k));
    }
  }
  return t;
}

/** D_n(a) = diag a(i/n), i = 1..n */
inline Diagonal diag_sampling(const FuncExpr& a, std::size_t n) {
  Vector d(n);
  for (std::size_t i = 0; i < n; ++i) {
    d(i) = detail::finite_or_throw(a.at_x(static_cast<double>(i + 1) / static_cast<double>(n)), "diag_sampling");
  }
  return Diagonal(d);
}

/**
 * C_n(f) = sum_k f_k C^k with entry (i, j) = f_{(i-j) mod n}, so that it
 * shares the corner-free part of T_n(f). Needs n > 2 * degree.
 */
inline Matrix circulant(const TrigPoly& f, std::size_t n) {
  const long d = f.degree();
  if (static_cast<long>(n) <= 2 * d) throw DomainError("circulant: n must exceed twice the degree");
  Matrix c = Matrix::Zero(n, n);
  const long nn = static_cast<long>(n);
  for (long i = 0; i < nn; ++i) {
    for (long k = -d; k <= d; ++k) {
      const long j = ((i - k) % nn + nn) % nn;
      c(i, j) += f.coeff(static_cast<int>(k));
    }
  }
  return c;
}

/** D'_n(f) = diag f(2 pi k / n), k = 0..n-1 */
inline Diagonal circulant_spectrum(const TrigPoly& f, std::size_t n) {
  Vector d(n);
  for (std::size_t k = 0; k < n; ++k) {
    d(k) = f(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
  }
  return Diagonal(d);
}

/** F_n = n^{-1/2} [w^{ij}], w = e^{2 pi i / n} */
inline Matrix fourier_matrix(std::size_t n) {
  Matrix f(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      // reduce the exponent mod n before forming the angle
      const double angle = 2.0 * std::numbers::pi * static_cast<double>((i * j) % n) / static_cast<double>(n);
      f(i, j) = scale * cplx(std::cos(angle), std::sin(angle));
    }
  }
  return f;
}

namespace detail {

template <class BlockFn>
Matrix block_operator(const FuncExpr& a, std::size_t n, const BlockFn& make_block, const char* where) {
  require_blocks(n, where);
  const BlockLayout lay(n);
  const Matrix blk = make_block(lay.block);
  Matrix out = Matrix::Zero(n, n);
  for (std::size_t s = 0; s < lay.m; ++s) {
    const cplx w = finite_or_throw(a.at_x(static_cast<double>(s + 1) / static_cast<double>(lay.m)), where);
    out.block(s * lay.block, s * lay.block, lay.block, lay.block) = w * blk;
  }
  return out;
}

}  // namespace detail

/** LT_n(a, f) = [D_m(a) (x) T_{n/m}(f)] (+) 0_t */
inline Matrix lt_op(const FuncExpr& a, const TrigPoly& f, std::size_t n) {
  return detail::block_operator(a, n, [&f](std::size_t b) { return toeplitz(f, b); }, "lt_op");
}

/** LC_n(a, f) = [D_m(a) (x) C_{n/m}(f)] (+) 0_t */
inline Matrix lc_op(const FuncExpr& a, const TrigPoly& f, std::size_t n) {
  detail::require_blocks(n, "lc_op");
  if (static_cast<long>(BlockLayout(n).block) <= 2L * f.degree()) {
    throw DomainError("lc_op: block size must exceed twice the degree");
  }
  return detail::block_operator(a, n, [&f](std::size_t b) { return circulant(f, b); }, "lc_op");
}

/** Q_n = diag(F_b, ..., F_b, I_t) */
inline Matrix q_block(std::size_t n) {
  detail::require_blocks(n, "q_block");
  const BlockLayout lay(n);
  const Matrix f = fourier_matrix(lay.block);
  Matrix q = Matrix::Zero(n, n);
  for (std::size_t s = 0; s < lay.m; ++s) q.block(s * lay.block, s * lay.block, lay.block, lay.block) = f;
  for (std::size_t r = lay.m * lay.block; r < n; ++r) q(r, r) = 1.0;
  return q;
}

/** D_n(a, f): blocks a(i/m) D'_b(f), then t zeros. */
inline Diagonal d_af(const FuncExpr& a, const TrigPoly& f, std::size_t n) {
  detail::require_blocks(n, "d_af");
  const BlockLayout lay(n);
  if (static_cast<long>(lay.block) <= 2L * f.degree()) {
    throw DomainError("d_af: block size must exceed twice the degree");
  }
  const Diagonal spec = circulant_spectrum(f, lay.block);
  Vector d = Vector::Zero(n);
  for (std::size_t s = 0; s < lay.m; ++s) {
    const cplx w = detail::finite_or_throw(a.at_x(static_cast<double>(s + 1) / static_cast<double>(lay.m)), "d_af");
    d.segment(s * lay.block, lay.block) = w * spec.diagonal();
  }
  return Diagonal(d);
}

/**
 * theta nodes of one block of the regular grid: for even b,
 * -pi + j 2pi/b (j = 0..b-1); for odd b, j 2pi/b in the order 0, +1, -1, +2, -2, ...
 */
inline std::vector<double> grid_thetas(std::size_t b) {
  std::vector<double> th;
  th.reserve(b);
  const double h = 2.0 * std::numbers::pi / static_cast<double>(b);
  if (b % 2 == 0) {
    for (std::size_t j = 0; j < b; ++j) th.push_back(-std::numbers::pi + static_cast<double>(j) * h);
  } else {
    th.push_back(0.0);
    for (std::size_t j = 1; j <= b / 2; ++j) {
      th.push_back(static_cast<double>(j) * h);
      th.push_back(-static_cast<double>(j) * h);
    }
  }
  return th;
}

/** D_n(k): k on the regular grid (i/m, theta_j), block-major, then t zeros. */
template <class Fn>
Diagonal d_grid_with(const Fn& k, std::size_t n) {
  detail::require_blocks(n, "d_grid");
  const BlockLayout lay(n);
  const auto th = grid_thetas(lay.block);
  Vector d = Vector::Zero(n);
  std::size_t r = 0;
  for (std::size_t s = 1; s <= lay.m; ++s) {
    const double x = static_cast<double>(s) / static_cast<double>(lay.m);
    for (double theta : th) d(r++) = detail::finite_or_throw(k(x, theta), "d_grid");
  }
  return Diagonal(d);
}

inline Diagonal d_grid(const FuncExpr& k, std::size_t n) {
  return d_grid_with([&k](double x, double theta) { return k.at(x, theta); }, n);
}

inline Diagonal d_grid(const GltExpr& k, std::size_t n) {
  return d_grid_with([&k](double x, double theta) { return k(x, theta); }, n);
}

/** Largest n for which scaled_cycle keeps the exact corner n^{n-1}. */
inline constexpr std::size_t kScaledCycleExactMax = 12;

inline const std::vector<std::string>& counterexample_names() {
  static const std::vector<std::string> names{"alt_identity", "half_shift", "scaled_cycle", "jordan_shift"};
  return names;
}

/**
 * Pathological sequences:
 *  - alt_identity: (-1)^n I_n
 *  - half_shift: ones at (i, floor(n/2) + i); squares to zero
 *  - scaled_cycle: superdiagonal 1/n, corner (n, 1) = n^{n-1} (1e3 for n > 12)
 *  - jordan_shift: T_n(e^{i theta})
 */
inline Matrix counterexample(const std::string& name, std::size_t n) {
  if (n < 2) throw DomainError("counterexample: n must be at least 2");
  const double dn = static_cast<double>(n);
  if (name == "alt_identity") {
    return (n % 2 == 0 ? 1.0 : -1.0) * Matrix::Identity(n, n);
  }
  if (name == "half_shift") {
    Matrix a = Matrix::Zero(n, n);
    const std::size_t k = n / 2;
    for (std::size_t i = 0; i < k; ++i) a(i, k + i) = 1.0;
    return a;
  }
  if (name == "scaled_cycle") {
    Matrix e = Matrix::Zero(n, n);
    for (std::size_t i = 0; i + 1 < n; ++i) e(i, i + 1) = 1.0 / dn;
    e(n - 1, 0) = n > kScaledCycleExactMax ? 1e3 : std::pow(dn, dn - 1.0);
    return e;
  }
  if (name == "jordan_shift") return toeplitz(TrigPoly::monomial(1), n);
  throw UnknownName("unknown counterexample '" + name + "'");
}

/**
 * A matrix sequence: a deterministic generator n -> n x n matrix with an
 * optional attached symbol and free-form metadata.
 */
class MatrixSeq {
public:
  using Generator = std::function<Matrix(std::size_t)>;
  using Symbol = std::variant<std::monostate, GltExpr, FuncExpr>;

  MatrixSeq(std::string name, Generator gen, Symbol symbol = {},
            std::map<std::string, std::string> metadata = {})
      : name_(std::move(name)), gen_(std::move(gen)), symbol_(std::move(symbol)), metadata_(std::move(metadata)) {}

  Matrix operator()(std::size_t n) const {
    Matrix a = gen_(n);
    if (static_cast<std::size_t>(a.rows()) != n || static_cast<std::size_t>(a.cols()) != n) {
      throw DomainError("MatrixSeq '" + name_ + "': generator returned the wrong shape");
    }
    return a;
  }

  const std::string& name() const noexcept { return name_; }
  const Symbol& symbol() const noexcept { return symbol_; }
  const std::map<std::string, std::string>& metadata() const noexcept { return metadata_; }

private:
  std::string name_;
  Generator gen_;
  Symbol symbol_;
  std::map<std::string, std::string> metadata_;
};

namespace seqs {

inline MatrixSeq identity() {
  return MatrixSeq("identity", [](std::size_t n) { return Matrix(Matrix::Identity(n, n)); },
                   FuncExpr::constant(1.0));
}

inline MatrixSeq zero() {
  return MatrixSeq("zero", [](std::size_t n) { return Matrix(Matrix::Zero(n, n)); }, FuncExpr::constant(0.0));
}

inline MatrixSeq toeplitz(const TrigPoly& f) {
  return MatrixSeq("toeplitz", [f](std::size_t n) { return glt::toeplitz(f, n); },
                   GltExpr(FuncExpr::constant(1.0), f));
}

inline MatrixSeq circulant(const TrigPoly& f) {
  return MatrixSeq("circulant", [f](std::size_t n) { return glt::circulant(f, n); },
                   GltExpr(FuncExpr::constant(1.0), f));
}

inline MatrixSeq diag_sampling(const FuncExpr& a) {
  return MatrixSeq("diag", [a](std::size_t n) { return dense(glt::diag_sampling(a, n)); },
                   GltExpr(a, TrigPoly()));
}

inline MatrixSeq lt(const FuncExpr& a, const TrigPoly& f) {
  return MatrixSeq("lt", [a, f](std::size_t n) { return lt_op(a, f, n); }, GltExpr(a, f));
}

inline MatrixSeq lc(const FuncExpr& a, const TrigPoly& f) {
  return MatrixSeq("lc", [a, f](std::size_t n) { return lc_op(a, f, n); }, GltExpr(a, f));
}

/** sum_i D_n(a_i) T_n(f_i) */
inline MatrixSeq glt_sum(const GltExpr& e) {
  return MatrixSeq("glt", [e](std::size_t n) {
    Matrix acc = Matrix::Zero(n, n);
    for (const auto& term : e.terms()) acc += glt::diag_sampling(term.a, n) * toeplitz(term.f, n);
    return acc;
  }, e);
}

/** sum_i LC_n(a_i, f_i) */
inline MatrixSeq lc_sum(const GltExpr& e) {
  return MatrixSeq("lc_sum", [e](std::size_t n) {
    Matrix acc = Matrix::Zero(n, n);
    for (const auto& term : e.terms()) acc += lc_op(term.a, term.f, n);
    return acc;
  }, e);
}

inline MatrixSeq counterexample(const std::string& name) {
  bool known = false;
  for (const auto& k : counterexample_names()) known = known || k == name;
  if (!known) throw UnknownName("unknown counterexample '" + name + "'");
  std::map<std::string, std::string> meta;
  if (name == "scaled_cycle") {
    meta["capped"] = "corner entry n^(n-1) replaced by 1e3 for n > " + std::to_string(kScaledCycleExactMax);
  }
  MatrixSeq::Symbol sym;
  if (name == "alt_identity") sym = FuncExpr::constant(1.0);
  if (name == "scaled_cycle") sym = FuncExpr::constant(0.0);
  if (name == "jordan_shift") sym = GltExpr(FuncExpr::constant(1.0), TrigPoly::monomial(1));
  return MatrixSeq(name, [name](std::size_t n) { return glt::counterexample(name, n); }, sym, meta);
}

inline MatrixSeq difference(const MatrixSeq& a, const MatrixSeq& b) {
  return MatrixSeq(a.name() + "-" + b.name(), [a, b](std::size_t n) { return Matrix(a(n) - b(n)); });
}

/** A_n - c I_n */
inline MatrixSeq shifted(const MatrixSeq& a, cplx c) {
  return MatrixSeq(a.name() + "-cI", [a, c](std::size_t n) {
    Matrix m = a(n);
    m.diagonal().array() -= c;
    return m;
  });
}

}  // namespace seqs

}  // namespace glt
