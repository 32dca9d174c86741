#pragma once

#include <glt/error.hpp>
#include <glt/expr.hpp>
#include <glt/matgen.hpp>
#include <glt/normal_form.hpp>
#include <glt/spectra.hpp>
#include <glt/symbol.hpp>
#include <glt/trig_poly.hpp>

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace glt::lab {

enum class Kind { SymbolCheck, Acs, NormalForm, Embed, Counterexample, HermitianFn, ShiftTest };

inline const std::vector<std::pair<std::string, Kind>>& kind_table() {
  static const std::vector<std::pair<std::string, Kind>> table{
      {"symbol-check", Kind::SymbolCheck}, {"acs", Kind::Acs},
      {"normal-form", Kind::NormalForm},   {"embed", Kind::Embed},
      {"counterexample", Kind::Counterexample}, {"hermitian-fn", Kind::HermitianFn},
      {"shift-test", Kind::ShiftTest}};
  return table;
}

inline std::string kind_name(Kind k) {
  for (const auto& [name, kind] : kind_table()) {
    if (kind == k) return name;
  }
  return "?";
}

namespace text {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <class T>
T parse_number(std::string_view s, const std::string& what) {
  const std::string t = trim(s);
  T v{};
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ConfigError(what + ": expected a number, got '" + t + "'");
  }
  return v;
}

/** A complex literal, written as a constant expression ("1", "-i", "0.5 + 0.5*i"). */
inline cplx parse_complex(std::string_view s, const std::string& what) {
  try {
    const FuncExpr e = parse_expr(trim(s), Role::Any);
    if (e.variables() != 0) throw ConfigError(what + ": expected a constant, got '" + trim(s) + "'");
    return e.eval(Point{});
  } catch (const SyntaxError& err) {
    throw ConfigError(what + ": " + err.what());
  }
}

}  // namespace text

/** Raw INI document: top-level keys plus ordered sections. */
struct IniDocument {
  struct Section {
    std::string name;
    std::size_t line = 0;
    std::vector<std::pair<std::string, std::string>> entries;
  };
  std::vector<std::pair<std::string, std::string>> globals;
  std::vector<Section> sections;
};

/**
 * `key = value` lines grouped under `[section]` headers. Lines whose first
 * non-blank character is '#' are comments; ';' is part of values.
 */
inline IniDocument parse_ini(std::string_view source) {
  IniDocument doc;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= source.size()) {
    auto end = source.find('\n', start);
    if (end == std::string_view::npos) end = source.size();
    ++line_no;
    const std::string line = text::trim(source.substr(start, end - start));
    start = end + 1;
    if (line.empty() || line[0] == '#') continue;
    const std::string where = "line " + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
      const std::string name = text::trim(std::string_view(line).substr(1, line.size() - 2));
      if (name.empty()) throw ConfigError(where + ": empty section name");
      for (const auto& s : doc.sections) {
        if (s.name == name) throw ConfigError(where + ": duplicate section [" + name + "]");
      }
      doc.sections.push_back({name, line_no, {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = text::trim(std::string_view(line).substr(0, eq));
    const std::string value = text::trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    auto& target = doc.sections.empty() ? doc.globals : doc.sections.back().entries;
    for (const auto& [k, v] : target) {
      if (k == key) throw ConfigError(where + ": duplicate key '" + key + "'");
    }
    target.emplace_back(key, value);
  }
  return doc;
}

/** "32, 64, 128" or "32..256" (doubling). */
inline std::vector<std::size_t> parse_sizes(std::string_view s) {
  std::vector<std::size_t> out;
  const std::string t = text::trim(s);
  if (const auto dots = t.find(".."); dots != std::string::npos) {
    const auto lo = text::parse_number<std::size_t>(std::string_view(t).substr(0, dots), "sizes");
    const auto hi = text::parse_number<std::size_t>(std::string_view(t).substr(dots + 2), "sizes");
    if (lo == 0 || hi < lo) throw ConfigError("sizes: bad range '" + t + "'");
    for (std::size_t n = lo; n <= hi; n *= 2) out.push_back(n);
  } else {
    for (const auto& item : text::split(t, ',')) out.push_back(text::parse_number<std::size_t>(item, "sizes"));
  }
  if (out.empty()) throw ConfigError("sizes: empty ladder");
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] == 0) throw ConfigError("sizes: sizes must be positive");
    if (i > 0 && out[i] <= out[i - 1]) throw ConfigError("sizes: ladder must be strictly ascending");
  }
  return out;
}

/** "rect 256x256" or "unit 4096". */
inline GridSpec parse_grid(std::string_view s) {
  std::istringstream in{text::trim(s)};
  std::string domain, res;
  in >> domain >> res;
  std::string extra;
  if (domain.empty() || res.empty() || (in >> extra)) throw ConfigError("grid: expected 'rect NXxNT' or 'unit NX'");
  GridSpec g;
  if (domain == "unit") {
    g.domain = Domain::Unit;
    g.nx = text::parse_number<std::size_t>(res, "grid");
    g.ntheta = 1;
  } else if (domain == "rect") {
    g.domain = Domain::Rect;
    const auto x = res.find('x');
    if (x == std::string::npos) throw ConfigError("grid: rect resolution must read NXxNT");
    g.nx = text::parse_number<std::size_t>(std::string_view(res).substr(0, x), "grid");
    g.ntheta = text::parse_number<std::size_t>(std::string_view(res).substr(x + 1), "grid");
  } else {
    throw ConfigError("grid: unknown domain '" + domain + "'");
  }
  if (g.nx == 0 || g.ntheta == 0) throw ConfigError("grid: resolution must be positive");
  return g;
}

/** Trig polynomial from an expression in theta. */
inline TrigPoly parse_trig(std::string_view s) { return TrigPoly::from_expr(parse_expr(text::trim(s), Role::Theta)); }

/**
 * Sequence specs:
 *   identity | zero | toeplitz | f | circulant | f | diag | a | lt | a | f |
 *   lc | a | f | dt | a | f | glt | a|f ; ... | lc_sum | a|f ; ... |
 *   normal_form | a|f ; ... | counterexample | name
 */
inline MatrixSeq parse_sequence(std::string_view spec) {
  const std::string s = text::trim(spec);
  const auto bar = s.find('|');
  const std::string head = text::trim(std::string_view(s).substr(0, bar));
  const std::string rest = bar == std::string::npos ? std::string() : text::trim(std::string_view(s).substr(bar + 1));
  auto need_rest = [&] {
    if (rest.empty()) throw ConfigError("sequence '" + head + "' needs arguments");
  };
  auto two = [&]() -> std::pair<FuncExpr, TrigPoly> {
    need_rest();
    const auto parts = text::split(rest, '|');
    if (parts.size() != 2) throw ConfigError("sequence '" + head + "' expects 'a | f'");
    return {parse_expr(parts[0], Role::A), parse_trig(parts[1])};
  };
  if (head == "identity" || head == "zero") {
    if (!rest.empty()) throw ConfigError("sequence '" + head + "' takes no arguments");
    return head == "identity" ? seqs::identity() : seqs::zero();
  }
  if (head == "toeplitz") return need_rest(), seqs::toeplitz(parse_trig(rest));
  if (head == "circulant") return need_rest(), seqs::circulant(parse_trig(rest));
  if (head == "diag") return need_rest(), seqs::diag_sampling(parse_expr(rest, Role::A));
  if (head == "lt") {
    auto [a, f] = two();
    return seqs::lt(a, f);
  }
  if (head == "lc") {
    auto [a, f] = two();
    return seqs::lc(a, f);
  }
  if (head == "dt") {
    auto [a, f] = two();
    return seqs::glt_sum(GltExpr(a, f));
  }
  if (head == "glt") return need_rest(), seqs::glt_sum(parse_glt_expr(rest));
  if (head == "lc_sum") return need_rest(), seqs::lc_sum(parse_glt_expr(rest));
  if (head == "normal_form") return need_rest(), seqs::normal_form(parse_glt_expr(rest));
  if (head == "counterexample") {
    need_rest();
    try {
      return seqs::counterexample(rest);
    } catch (const UnknownName& e) {
      throw ConfigError(e.what());
    }
  }
  throw ConfigError("unknown sequence kind '" + head + "'");
}

/** "default", "hats R", or "hat c w ; hat c w ; ...". */
inline std::optional<TestFamily> parse_family(std::string_view s) {
  const std::string t = text::trim(s);
  if (t.empty() || t == "default") return std::nullopt;
  if (t.rfind("hats", 0) == 0 && (t.size() == 4 || t[4] == ' ')) {
    const double r = text::parse_number<double>(std::string_view(t).substr(4), "family");
    if (!(r > 0.0)) throw ConfigError("family: radius must be positive");
    return TestFamily::hats(r);
  }
  TestFamily fam;
  for (const auto& item : text::split(t, ';')) {
    std::istringstream in{item};
    std::string tag, c, w, extra;
    in >> tag >> c >> w;
    if (tag != "hat" || w.empty() || (in >> extra)) throw ConfigError("family: expected 'hat <center> <width>'");
    const double width = text::parse_number<double>(w, "family");
    if (!(width > 0.0)) throw ConfigError("family: width must be positive");
    fam.functions.push_back(hat(text::parse_complex(c, "family"), width));
  }
  return fam;
}

/** One experiment section with validated, kind-specific fields. */
struct ExperimentConfig {
  std::string id;
  Kind kind = Kind::SymbolCheck;
  std::map<std::string, std::string> fields;
  std::vector<std::size_t> sizes;
  GridSpec grid;
  std::optional<double> tolerance;

  bool has(const std::string& key) const { return fields.count(key) > 0; }
  const std::string& get(const std::string& key) const {
    const auto it = fields.find(key);
    if (it == fields.end()) throw ConfigError("[" + id + "]: missing key '" + key + "'");
    return it->second;
  }
  std::string get_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? get(key) : fallback;
  }
};

struct LabConfig {
  std::uint64_t seed = 0;
  std::optional<std::string> output;
  std::vector<ExperimentConfig> experiments;
};

namespace detail {

struct KindKeys {
  std::vector<std::string> required;
  std::vector<std::string> optional;
};

inline KindKeys keys_for(Kind k) {
  const std::vector<std::string> common{"kind", "sizes", "grid", "tolerance", "family"};
  KindKeys kk;
  switch (k) {
    case Kind::SymbolCheck:
      kk = {{"sequence"}, {"symbol", "spectrum", "randomize"}};
      break;
    case Kind::Acs:
      kk = {{"a", "b"}, {"bound"}};
      break;
    case Kind::NormalForm:
      kk = {{"expr"}, {}};
      break;
    case Kind::Embed:
      kk = {{"a", "b"}, {"bound"}};
      break;
    case Kind::Counterexample:
      kk = {{"name"}, {}};
      break;
    case Kind::HermitianFn:
      kk = {{"sequence", "g"}, {"symbol"}};
      break;
    case Kind::ShiftTest:
      kk = {{"sequence"}, {"symbol", "shifts"}};
      break;
  }
  kk.optional.insert(kk.optional.end(), common.begin(), common.end());
  return kk;
}

}  // namespace detail

/** The symbol sampled for a sequence: an explicit `symbol` key wins over the attached one. */
inline SymbolGrid resolve_symbol(const ExperimentConfig& cfg, const MatrixSeq& seq) {
  if (cfg.has("symbol")) return sample_symbol(parse_expr(cfg.get("symbol"), Role::K), cfg.grid);
  if (const auto* g = std::get_if<GltExpr>(&seq.symbol())) return sample_symbol(*g, cfg.grid);
  if (const auto* f = std::get_if<FuncExpr>(&seq.symbol())) return sample_symbol(*f, cfg.grid);
  throw ConfigError("[" + cfg.id + "]: sequence has no attached symbol; give 'symbol'");
}

inline std::vector<cplx> resolve_shifts(const ExperimentConfig& cfg) {
  if (!cfg.has("shifts")) return default_shifts();
  std::vector<cplx> out;
  for (const auto& item : text::split(cfg.get("shifts"), ',')) out.push_back(text::parse_complex(item, "shifts"));
  return out;
}

/** Builds every object the experiment will need; any failure becomes ConfigError. */
inline void validate_experiment(const ExperimentConfig& cfg) {
  const std::string ctx = "[" + cfg.id + "]: ";
  try {
    switch (cfg.kind) {
      case Kind::SymbolCheck: {
        const auto seq = parse_sequence(cfg.get("sequence"));
        const std::string spectrum = cfg.get_or("spectrum", "sv");
        if (spectrum != "sv" && spectrum != "eig" && spectrum != "both") {
          throw ConfigError("spectrum must be sv, eig or both");
        }
        const std::string rnd = cfg.get_or("randomize", "false");
        if (rnd != "true" && rnd != "false") throw ConfigError("randomize must be true or false");
        (void)resolve_symbol(cfg, seq);
        break;
      }
      case Kind::Acs:
      case Kind::Embed: {
        (void)parse_sequence(cfg.get("a"));
        (void)parse_sequence(cfg.get("b"));
        if (cfg.kind == Kind::Acs) {
          const std::string b = cfg.get_or("bound", "none");
          if (b != "none" && b != "toeplitz_circulant" && b != "lt" && b != "lt_lc") {
            throw ConfigError("bound must be none, toeplitz_circulant, lt or lt_lc");
          }
          if (cfg.sizes.size() < 4) throw ConfigError("acs needs at least 4 sizes");
        } else {
          const std::string b = cfg.get_or("bound", "none");
          if (b != "none" && b != "inverse_n") throw ConfigError("bound must be none or inverse_n");
        }
        break;
      }
      case Kind::NormalForm:
        (void)parse_glt_expr(cfg.get("expr"));
        break;
      case Kind::Counterexample: {
        bool known = false;
        for (const auto& n : counterexample_names()) known = known || n == cfg.get("name");
        if (!known) throw ConfigError("unknown counterexample '" + cfg.get("name") + "'");
        break;
      }
      case Kind::HermitianFn: {
        const auto seq = parse_sequence(cfg.get("sequence"));
        (void)parse_expr(cfg.get("g"), Role::F);
        (void)resolve_symbol(cfg, seq);
        break;
      }
      case Kind::ShiftTest: {
        const auto seq = parse_sequence(cfg.get("sequence"));
        (void)resolve_symbol(cfg, seq);
        (void)resolve_shifts(cfg);
        break;
      }
    }
    (void)parse_family(cfg.get_or("family", "default"));
  } catch (const ConfigError& e) {
    throw ConfigError(ctx + e.what());
  } catch (const Error& e) {
    throw ConfigError(ctx + e.what());
  }
}

inline LabConfig load_config(std::string_view source) {
  const IniDocument doc = parse_ini(source);
  LabConfig cfg;
  bool have_seed = false;
  for (const auto& [k, v] : doc.globals) {
    if (k == "seed") {
      cfg.seed = text::parse_number<std::uint64_t>(v, "seed");
      have_seed = true;
    } else if (k == "output") {
      cfg.output = v;
    } else {
      throw ConfigError("unknown top-level key '" + k + "'");
    }
  }
  if (!have_seed) throw ConfigError("missing mandatory top-level key 'seed'");
  if (doc.sections.empty()) throw ConfigError("no experiments defined");

  for (const auto& sec : doc.sections) {
    ExperimentConfig e;
    e.id = sec.name;
    for (const auto& [k, v] : sec.entries) e.fields[k] = v;
    const std::string ctx = "[" + e.id + "]: ";
    if (!e.has("kind")) throw ConfigError(ctx + "missing key 'kind'");
    bool found = false;
    for (const auto& [name, kind] : kind_table()) {
      if (name == e.get("kind")) {
        e.kind = kind;
        found = true;
      }
    }
    if (!found) throw ConfigError(ctx + "unknown kind '" + e.get("kind") + "'");

    const auto keys = detail::keys_for(e.kind);
    for (const auto& req : keys.required) {
      if (!e.has(req)) throw ConfigError(ctx + "missing key '" + req + "'");
    }
    for (const auto& [k, v] : e.fields) {
      const bool ok = std::find(keys.required.begin(), keys.required.end(), k) != keys.required.end() ||
                      std::find(keys.optional.begin(), keys.optional.end(), k) != keys.optional.end();
      if (!ok) throw ConfigError(ctx + "unknown key '" + k + "' for kind " + e.get("kind"));
    }
    try {
      if (e.kind != Kind::Counterexample || e.has("sizes")) e.sizes = parse_sizes(e.get("sizes"));
      if (e.has("grid")) e.grid = parse_grid(e.get("grid"));
      if (e.has("tolerance")) {
        const double t = text::parse_number<double>(e.get("tolerance"), "tolerance");
        if (!(t > 0.0)) throw ConfigError("tolerance must be positive");
        e.tolerance = t;
      }
    } catch (const ConfigError& err) {
      throw ConfigError(ctx + err.what());
    }
    validate_experiment(e);
    cfg.experiments.push_back(std::move(e));
  }
  return cfg;
}

inline LabConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_config(ss.str());
}

}  // namespace glt::lab
