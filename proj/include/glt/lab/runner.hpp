#pragma once

#include <glt/glt.hpp>
#include <glt/lab/config.hpp>
#include <glt/lab/report.hpp>

#include <Eigen/QR>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace glt::lab {

struct RunOptions {
  std::size_t threads = 1;
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> dump_dir;
  std::ostream* log = &std::cerr;
};

/** GLT_LAB_THREADS if set to a positive integer, else the hardware concurrency. */
inline std::size_t threads_from_env() {
  if (const char* env = std::getenv("GLT_LAB_THREADS")) {
    try {
      const auto v = text::parse_number<std::size_t>(env, "GLT_LAB_THREADS");
      if (v > 0) return v;
    } catch (const ConfigError&) {
    }
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/** Writes `i,j,re,im` (1-based) for every nonzero entry. */
inline void write_matrix_dump(const std::filesystem::path& file, const Matrix& a) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("cannot write matrix dump '" + file.string() + "'");
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      const cplx v = a(i, j);
      if (v == cplx(0.0)) continue;
      out << (i + 1) << ',' << (j + 1) << ',' << format_value(v.real()) << ',' << format_value(v.imag()) << '\n';
    }
  }
}

namespace detail {

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

/** Haar-like random unitary: QR of a complex Gaussian matrix, phases fixed by diag(R). */
inline Matrix random_unitary(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Matrix z(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    for (Eigen::Index i = 0; i < z.rows(); ++i) z(i, j) = cplx(g(rng), g(rng));
  }
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    const cplx d = r(j, j);
    if (std::abs(d) > 0.0) q.col(j) *= d / std::abs(d);
  }
  return q;
}

inline std::string shift_label(cplx c) { return "c=" + glt::detail::format_complex(c); }

class Context {
public:
  Context(const std::string& id, const RunOptions& opt, Report& report) : id_(id), opt_(opt), report_(report) {}

  const std::string& id() const { return id_; }
  std::size_t threads() const { return opt_.threads; }
  Report& report() { return report_; }

  void dump(const std::string& label, const MatrixSeq& seq, const std::vector<std::size_t>& sizes) const {
    if (!opt_.dump_dir) return;
    std::filesystem::create_directories(*opt_.dump_dir);
    for (std::size_t n : sizes) {
      write_matrix_dump(*opt_.dump_dir / (id_ + "_" + label + "_n" + std::to_string(n) + ".csv"), seq(n));
    }
  }

  void record_family(const TestFamily& fam) {
    for (const auto& tf : fam.functions) report_.add(id_, 0, "test_function:" + tf.label, tf.support_radius, {}, Verdict::NA);
  }

  /**
   * Rows for a residual table: per-function values as N/A, the per-size
   * maximum judged against tau(n) (or a fixed override) on the trailing half.
   */
  void residual_rows(const std::string& metric, const ResidualTable& t, std::optional<double> tol_override,
                     bool judge_all = false) {
    for (std::size_t r = 0; r < t.rows(); ++r) {
      for (std::size_t j = 0; j < t.labels.size(); ++j) {
        report_.add(id_, t.sizes[r], metric + "[" + t.labels[j] + "]", t.residuals[r][j], {}, Verdict::NA);
      }
      const double tol = tol_override ? *tol_override : t.tolerance_at(r);
      const double v = t.max_at(r);
      const bool judged = judge_all || r >= t.trailing_begin();
      report_.add(id_, t.sizes[r], metric + "_max", v, tol,
                  judged ? (v <= tol ? Verdict::Pass : Verdict::Fail) : Verdict::NA);
    }
  }

private:
  std::string id_;
  const RunOptions& opt_;
  Report& report_;
};

inline int symbol_degree(const MatrixSeq& seq) {
  int d = 0;
  if (const auto* g = std::get_if<GltExpr>(&seq.symbol())) {
    for (const auto& term : g->terms()) d = std::max(d, term.f.degree());
  }
  return d;
}

inline const GltTerm* first_term(const MatrixSeq& seq) {
  if (const auto* g = std::get_if<GltExpr>(&seq.symbol())) return &g->terms().front();
  return nullptr;
}

inline void run_symbol_check(const ExperimentConfig& cfg, Context& ctx, std::uint64_t seed) {
  const MatrixSeq base = parse_sequence(cfg.get("sequence"));
  const SymbolGrid k = resolve_symbol(cfg, base);
  const auto fam_opt = parse_family(cfg.get_or("family", "default"));
  const TestFamily fam = fam_opt ? *fam_opt : TestFamily::default_for(k);
  ctx.record_family(fam);
  ctx.dump("sequence", base, cfg.sizes);

  MatrixSeq seq = base;
  if (cfg.get_or("randomize", "false") == "true") {
    const std::uint64_t s = seed ^ fnv1a(cfg.id);
    seq = MatrixSeq(base.name() + "-randomized", [base, s](std::size_t n) {
      return Matrix(random_unitary(n, s + 2 * n) * base(n) * random_unitary(n, s + 2 * n + 1));
    });
  }
  const std::string spectrum = cfg.get_or("spectrum", "sv");
  if (spectrum == "sv" || spectrum == "both") {
    ctx.residual_rows("sv_residual", sv_symbol_residual(seq, k, fam, cfg.sizes, ctx.threads()), cfg.tolerance);
  }
  if (spectrum == "eig" || spectrum == "both") {
    ctx.residual_rows("eig_residual", eig_symbol_residual(seq, k, fam, cfg.sizes, ctx.threads()), cfg.tolerance);
  }
}

inline void run_acs(const ExperimentConfig& cfg, Context& ctx) {
  const MatrixSeq a = parse_sequence(cfg.get("a"));
  const MatrixSeq b = parse_sequence(cfg.get("b"));
  ctx.dump("a", a, cfg.sizes);
  ctx.dump("b", b, cfg.sizes);
  const double tol = cfg.tolerance.value_or(0.25);
  const AcsVerdict verdict = acs_equivalent(a, b, cfg.sizes, tol, ctx.threads());
  const std::string bound_kind = cfg.get_or("bound", "none");
  const int deg = std::max(symbol_degree(a), symbol_degree(b));
  for (std::size_t r = 0; r < cfg.sizes.size(); ++r) {
    const std::size_t n = cfg.sizes[r];
    const double p = verdict.estimate.p[r];
    std::optional<double> bound;
    if (bound_kind == "toeplitz_circulant") bound = bounds::toeplitz_circulant(n, deg);
    if (bound_kind == "lt_lc") bound = bounds::lt_lc(n, deg);
    if (bound_kind == "lt") {
      const GltTerm* t = first_term(a) ? first_term(a) : first_term(b);
      if (!t) throw DomainError("bound 'lt' needs a sequence with an attached (a, f) symbol");
      bound = bounds::lt(n, t->f.degree(), t->f.max_abs_coeff(), lipschitz_estimate(t->a));
    }
    if (bound) {
      ctx.report().add(ctx.id(), n, "p", p, *bound, p <= *bound + 1e-8 ? Verdict::Pass : Verdict::Fail);
    } else {
      ctx.report().add(ctx.id(), n, "p", p, {}, Verdict::NA);
    }
  }
  const std::size_t last = cfg.sizes.back();
  ctx.report().add(ctx.id(), last, "p_median", median(verdict.estimate.p), {}, Verdict::NA);
  ctx.report().add(ctx.id(), last, "rho_estimate", verdict.estimate.rho_estimate, tol,
                   verdict.pass ? Verdict::Pass : Verdict::Fail);
}

inline void run_normal_form(const ExperimentConfig& cfg, Context& ctx) {
  const GltExpr expr = parse_glt_expr(cfg.get("expr"));
  const SymbolGrid k = sample_symbol(expr, cfg.grid);
  const auto fam_opt = parse_family(cfg.get_or("family", "default"));
  const TestFamily fam = fam_opt ? *fam_opt : TestFamily::default_for(k);
  ctx.record_family(fam);
  ctx.dump("glt", seqs::glt_sum(expr), cfg.sizes);
  ctx.dump("normal_form", seqs::normal_form(expr), cfg.sizes);

  const NormalFormReport rep = verify_normal_form(expr, cfg.sizes, cfg.grid, fam, ctx.threads());
  for (const auto& row : rep.rows) {
    ctx.report().add(ctx.id(), row.n, "acs_p", row.p, row.bound,
                     row.p <= row.bound + 1e-8 ? Verdict::Pass : Verdict::Fail);
  }
  std::vector<double> ps;
  for (const auto& row : rep.rows) ps.push_back(row.p);
  const std::size_t last = cfg.sizes.back();
  ctx.report().add(ctx.id(), last, "acs_p_last_minus_median", ps.back() - median(ps), 0.0,
                   ps.back() <= median(ps) ? Verdict::Pass : Verdict::Fail);
  ctx.report().add(ctx.id(), last, "acs_p_decreasing", rep.p_decreasing ? 1.0 : 0.0, {}, Verdict::NA);
  ctx.residual_rows("eig_residual", rep.eig_table, cfg.tolerance, true);
  ctx.report().add(ctx.id(), last, "eig_residual_decreasing", rep.residual_decreasing ? 1.0 : 0.0, {},
                   Verdict::NA);
}

inline void run_embed(const ExperimentConfig& cfg, Context& ctx) {
  const MatrixSeq a = parse_sequence(cfg.get("a"));
  const MatrixSeq b = parse_sequence(cfg.get("b"));
  ctx.dump("a", a, cfg.sizes);
  ctx.dump("b", b, cfg.sizes);
  const bool inv_n = cfg.get_or("bound", "none") == "inverse_n";
  const auto pairs = parallel_map(cfg.sizes, [&](std::size_t n) { return group_embed(a, b, n); }, ctx.threads());
  for (std::size_t r = 0; r < cfg.sizes.size(); ++r) {
    const std::size_t n = cfg.sizes[r];
    const auto& e = pairs[r];
    if (inv_n) {
      ctx.report().add_upper(ctx.id(), n, "residual_p", e.residual_p, 1.0 / static_cast<double>(n) + 1e-8);
    } else {
      ctx.report().add(ctx.id(), n, "residual_p", e.residual_p, {}, Verdict::NA);
    }
    ctx.report().add_upper(ctx.id(), n, "unitarity_u", unitarity_residual(e.u), 1e-10);
    ctx.report().add_upper(ctx.id(), n, "unitarity_v", unitarity_residual(e.v), 1e-10);
  }
}

inline void run_hermitian_fn(const ExperimentConfig& cfg, Context& ctx) {
  const MatrixSeq seq = parse_sequence(cfg.get("sequence"));
  const FuncExpr g = parse_expr(cfg.get("g"), Role::F);
  const SymbolGrid k = resolve_symbol(cfg, seq);
  const auto fam = parse_family(cfg.get_or("family", "default"));
  ctx.dump("sequence", seq, cfg.sizes);
  const HermitianFnReport rep = hermitian_function(seq, g, k, cfg.sizes, fam, ctx.threads());
  ctx.record_family(fam ? *fam : TestFamily::default_for(rep.pushed));
  ctx.residual_rows("sv_residual", rep.sv_table, cfg.tolerance);
  ctx.residual_rows("eig_residual", rep.eig_table, cfg.tolerance);
}

inline void run_shift_test(const ExperimentConfig& cfg, Context& ctx) {
  const MatrixSeq seq = parse_sequence(cfg.get("sequence"));
  const SymbolGrid k = resolve_symbol(cfg, seq);
  const auto fam = parse_family(cfg.get_or("family", "default"));
  ctx.dump("sequence", seq, cfg.sizes);
  const ShiftReport rep = affine_shift_test(seq, k, resolve_shifts(cfg), cfg.sizes, fam, ctx.threads());
  if (fam) ctx.record_family(*fam);
  for (const auto& s : rep.shifts) {
    ctx.residual_rows("sv_residual[" + shift_label(s.shift) + "]", s.table, cfg.tolerance);
  }
  for (std::size_t r = 0; r < rep.sizes.size(); ++r) {
    ctx.report().add(ctx.id(), rep.sizes[r], "normality_residual", rep.normality[r], {}, Verdict::NA);
  }
  const std::size_t last = cfg.sizes.back();
  ctx.report().add(ctx.id(), last, "normal", rep.normal ? 1.0 : 0.0, {}, Verdict::NA);
  ctx.report().add(ctx.id(), last, "lambda_licensed", rep.lambda_licensed ? 1.0 : 0.0, {}, Verdict::NA);
}

}  // namespace detail

/** Default ladders of the canned counterexample demos. */
inline std::vector<std::size_t> demo_default_sizes(const std::string& name) {
  if (name == "alt_identity") return {256, 257, 512, 513};
  if (name == "half_shift") return {64, 128, 256, 512};
  if (name == "scaled_cycle") return {16, 32, 64, 128};
  if (name == "jordan_shift") return {64, 128, 256, 512};
  throw UnknownName("unknown demo '" + name + "'");
}

namespace detail {

inline void demo_alt_identity(Context& ctx, const std::vector<std::size_t>& sizes) {
  const MatrixSeq seq = seqs::counterexample("alt_identity");
  const SymbolGrid one = sample_symbol(FuncExpr::constant(1.0), GridSpec{Domain::Unit, 4096, 1});
  TestFamily fam;
  fam.functions.push_back(hat(1.0, 1.0));
  ctx.record_family(fam);
  ctx.dump("sequence", seq, sizes);
  ctx.residual_rows("sv_residual", sv_symbol_residual(seq, one, fam, sizes, ctx.threads()), std::nullopt);
  ctx.residual_rows("eig_residual", eig_symbol_residual(seq, one, fam, sizes, ctx.threads()), std::nullopt);

  const auto values = parallel_map(sizes, [&](std::size_t n) {
    return empirical_functional(eigenvalues(seq(n)), fam.functions.front().f).real();
  }, ctx.threads());
  std::optional<double> gap;
  for (std::size_t r = 1; r < sizes.size(); ++r) {
    if ((sizes[r] - sizes[r - 1]) % 2 == 1) {
      const double g = std::abs(values[r] - values[r - 1]);
      gap = gap ? std::min(*gap, g) : g;
    }
  }
  if (!gap) throw DomainError("alt_identity demo needs adjacent sizes of opposite parity");
  ctx.report().add(ctx.id(), sizes.back(), "even_odd_gap_min", *gap, 0.9, *gap >= 0.9 ? Verdict::Pass : Verdict::Fail);
}

inline void demo_half_shift(Context& ctx, const std::vector<std::size_t>& sizes) {
  const MatrixSeq seq = seqs::counterexample("half_shift");
  // Indicator of [0, 1/2); the grid has an even resolution, so no midpoint hits 1/2.
  const FuncExpr chi = parse_expr("(1 + (0.5 - x)/abs(0.5 - x))/2", Role::A);
  const SymbolGrid k = sample_symbol(chi, GridSpec{Domain::Unit, 4096, 1});
  const TestFamily fam = TestFamily::default_for(k);
  ctx.record_family(fam);
  ctx.dump("sequence", seq, sizes);
  ctx.residual_rows("sv_residual", sv_symbol_residual(seq, k, fam, sizes, ctx.threads()), std::nullopt, true);
  for (std::size_t n : sizes) {
    const Matrix a = seq(n);
    const double sq = (a * a).cwiseAbs().maxCoeff();
    ctx.report().add(ctx.id(), n, "square_max_abs", sq, 0.0, sq == 0.0 ? Verdict::Pass : Verdict::Fail);
  }
}

/** f(E_n) through the eigendecomposition E = S C S^{-1}, C the cyclic shift, S = diag(n^{i-1}). */
inline Matrix scaled_cycle_function(std::size_t n, const FuncExpr& f) {
  const Matrix fourier = fourier_matrix(n);
  const Diagonal lambda = circulant_spectrum(TrigPoly::monomial(-1), n);
  Vector fl(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < fl.size(); ++i) fl(i) = f.at_t(lambda.diagonal()(i));
  Matrix m = fourier.adjoint() * fl.asDiagonal() * fourier;
  const double dn = static_cast<double>(n);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) *= std::pow(dn, static_cast<double>(i - j));
  }
  return m;
}

inline void demo_scaled_cycle(Context& ctx, const std::vector<std::size_t>& sizes) {
  const MatrixSeq seq = seqs::counterexample("scaled_cycle");
  ctx.dump("sequence", seq, sizes);
  const TestFamily fam = TestFamily::hats(1.0);
  ctx.record_family(fam);
  const ZeroTestResult z = zero_distributed_test(seq, sizes, fam, ctx.threads());
  for (std::size_t r = 0; r < z.table.rows(); ++r) {
    for (std::size_t j = 0; j < z.table.labels.size(); ++j) {
      ctx.report().add(ctx.id(), sizes[r], "zero_residual[" + z.table.labels[j] + "]", z.table.residuals[r][j], {},
                       Verdict::NA);
    }
  }
  ctx.report().add(ctx.id(), sizes.back(), "zero_residual_max", z.table.max_at(z.table.rows() - 1), z.tolerance,
                   z.pass ? Verdict::Pass : Verdict::Fail);
  const auto ps = parallel_map(sizes, [&](std::size_t n) { return p_metric(seq(n)); }, ctx.threads());
  for (std::size_t r = 0; r < sizes.size(); ++r) {
    const double bound = 2.0 / static_cast<double>(sizes[r]);
    ctx.report().add(ctx.id(), sizes[r], "p", ps[r], bound, ps[r] <= bound + 1e-12 ? Verdict::Pass : Verdict::Fail);
  }

  // f(t) = t + 1 - |t|^2 fixes the unit circle, so f(E) = E while f(0) = 1.
  const FuncExpr f = parse_expr("t + 1 - abs(t)^2", Role::F);
  const TestFunction probe = hat(1.0, 0.5);
  for (std::size_t n = 4; n <= kScaledCycleExactMax; n += 2) {
    const Matrix e = glt::counterexample("scaled_cycle", n);
    const Matrix fe = scaled_cycle_function(n, f);
    const double rel = (fe - e).norm() / e.norm();
    ctx.report().add_upper(ctx.id(), n, "f(E)-E_relative", rel, 1e-8);
    const double resid = std::abs(empirical_functional(singular_values(fe), probe.f) - probe.f.at_t(f.at_t(0.0)));
    ctx.report().add(ctx.id(), n, "f(E)_sv_residual_vs_f(0)", resid, 0.5, resid >= 0.5 ? Verdict::Pass : Verdict::Fail);
  }
}

inline void demo_jordan_shift(Context& ctx, const std::vector<std::size_t>& sizes) {
  const MatrixSeq seq = seqs::counterexample("jordan_shift");
  ctx.dump("sequence", seq, sizes);
  const SymbolGrid zero = sample_symbol(FuncExpr::constant(0.0), GridSpec{Domain::Unit, 4096, 1});
  const TestFamily fam0 = TestFamily::hats(1.0);
  ctx.residual_rows("eig_residual_vs_0", eig_symbol_residual(seq, zero, fam0, sizes, ctx.threads()), std::nullopt,
                    true);
  const SymbolGrid circle = sample_symbol(parse_expr("exp(i*theta)", Role::K), GridSpec{});
  const ShiftReport rep = affine_shift_test(seq, circle, {0.0, 1.0}, sizes, std::nullopt, ctx.threads());
  for (const auto& s : rep.shifts) ctx.residual_rows("sv_residual[" + shift_label(s.shift) + "]", s.table, std::nullopt);
  for (std::size_t r = 0; r < sizes.size(); ++r) {
    ctx.report().add(ctx.id(), sizes[r], "normality_residual", rep.normality[r], {}, Verdict::NA);
  }
  ctx.report().add(ctx.id(), sizes.back(), "lambda_licensed", rep.lambda_licensed ? 1.0 : 0.0, {}, Verdict::NA);
}

}  // namespace detail

inline const std::vector<std::string>& demo_names() { return counterexample_names(); }

/** Canned counterexample experiment; `id` names the rows (defaults to the demo name). */
inline Report demo(const std::string& name, const RunOptions& opt, std::optional<std::vector<std::size_t>> sizes = {},
                   std::string id = {}) {
  const std::vector<std::size_t> ladder = sizes ? *sizes : demo_default_sizes(name);
  if (id.empty()) id = name;
  Report report;
  detail::Context ctx(id, opt, report);
  if (name == "alt_identity") detail::demo_alt_identity(ctx, ladder);
  else if (name == "half_shift") detail::demo_half_shift(ctx, ladder);
  else if (name == "scaled_cycle") detail::demo_scaled_cycle(ctx, ladder);
  else detail::demo_jordan_shift(ctx, ladder);
  return report;
}

/**
 * Runs one experiment. Numerical failures become a FAIL row named
 * "error:<message>"; configuration errors propagate.
 */
inline Report run_experiment(const ExperimentConfig& cfg, const RunOptions& opt) {
  Report report;
  detail::Context ctx(cfg.id, opt, report);
  try {
    switch (cfg.kind) {
      case Kind::SymbolCheck: detail::run_symbol_check(cfg, ctx, opt.seed); break;
      case Kind::Acs: detail::run_acs(cfg, ctx); break;
      case Kind::NormalForm: detail::run_normal_form(cfg, ctx); break;
      case Kind::Embed: detail::run_embed(cfg, ctx); break;
      case Kind::Counterexample: {
        std::optional<std::vector<std::size_t>> sizes;
        if (!cfg.sizes.empty()) sizes = cfg.sizes;
        report = demo(cfg.get("name"), opt, sizes, cfg.id);
        break;
      }
      case Kind::HermitianFn: detail::run_hermitian_fn(cfg, ctx); break;
      case Kind::ShiftTest: detail::run_shift_test(cfg, ctx); break;
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    if (opt.log) *opt.log << "[" << cfg.id << "] " << e.what() << '\n';
    report.add(cfg.id, 0, std::string("error:") + e.what(), 0.0, {}, Verdict::Fail);
  }
  return report;
}

/** All experiments in file order. */
inline Report run(const LabConfig& cfg, RunOptions opt) {
  opt.seed = cfg.seed;
  Report all;
  for (const auto& e : cfg.experiments) all.append(run_experiment(e, opt));
  return all;
}

}  // namespace glt::lab
