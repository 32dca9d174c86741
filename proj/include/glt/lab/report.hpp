#pragma once

#include <glt/error.hpp>

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace glt::lab {

enum class Verdict { Pass, Fail, NA };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "PASS";
    case Verdict::Fail: return "FAIL";
    case Verdict::NA: return "N/A";
  }
  return "?";
}

struct ReportRow {
  std::string experiment;
  std::size_t n = 0;
  std::string metric;
  double value = 0.0;
  std::optional<double> bound;
  Verdict verdict = Verdict::NA;
};

/** 17 significant digits, '.' decimal point regardless of locale. */
inline std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  for (auto& c : s) {
    if (c == ',') c = '.';
  }
  return s;
}

class Report {
public:
  static constexpr const char* kHeader = "experiment,n,metric,value,bound,verdict";

  /** Non-finite values are not representable in a row; they are recorded as FAIL. */
  void add(ReportRow row) {
    if (!std::isfinite(row.value)) {
      row.metric += ":nonfinite";
      row.value = 0.0;
      row.verdict = Verdict::Fail;
    }
    if (row.bound && !std::isfinite(*row.bound)) row.bound.reset();
    rows_.push_back(std::move(row));
  }

  void add(const std::string& id, std::size_t n, const std::string& metric, double value,
           std::optional<double> bound, Verdict verdict) {
    add(ReportRow{id, n, metric, value, bound, verdict});
  }

  /** Row checked as value <= bound. */
  void add_upper(const std::string& id, std::size_t n, const std::string& metric, double value, double bound) {
    add(id, n, metric, value, bound, value <= bound ? Verdict::Pass : Verdict::Fail);
  }

  void append(const Report& other) { rows_.insert(rows_.end(), other.rows_.begin(), other.rows_.end()); }

  const std::vector<ReportRow>& rows() const noexcept { return rows_; }

  bool any_fail() const {
    for (const auto& r : rows_) {
      if (r.verdict == Verdict::Fail) return true;
    }
    return false;
  }

  int exit_code() const { return any_fail() ? 1 : 0; }

  void write_csv(std::ostream& out) const {
    out << kHeader << '\n';
    for (const auto& r : rows_) {
      out << csv_field(r.experiment) << ',' << r.n << ',' << csv_field(r.metric) << ',' << format_value(r.value)
          << ',' << (r.bound ? format_value(*r.bound) : std::string()) << ',' << verdict_name(r.verdict) << '\n';
    }
  }

  std::string csv() const {
    std::ostringstream out;
    write_csv(out);
    return out.str();
  }

private:
  static std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + '"';
  }

  std::vector<ReportRow> rows_;
};

}  // namespace glt::lab
