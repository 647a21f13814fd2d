#pragma once

// CSV -> differentiator -> CSV / JSON-lines pipeline behind `hound run`.
//
// Input: comma separated, optional header row, '#' comment lines ignored.
// Output CSV columns: t, z0..z{n-1}, epsilon, [e0..e{n-1}], [k0..k{n-1}],
// preceded by a '# hound ...' metadata comment and followed by '# summary' and
// '# coeffs' comments. JSON-lines output carries the same data as
// {"type":"meta"}, one object per row, and {"type":"summary"}.

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "hound/coefficients.hpp"
#include "hound/differentiator.hpp"
#include "hound/errors.hpp"
#include "hound/signals.hpp"
#include "hound/state_io.hpp"
#include "hound/taylor.hpp"

namespace hound::stream {

enum class OutputFormat { csv, json_lines };

/// Column selector: a 0-based index or a header name.
struct ColumnRef {
  std::optional<std::size_t> index;
  std::string name;

  static ColumnRef parse(const std::string& text) {
    if (!text.empty() && text.find_first_not_of("0123456789") == std::string::npos) {
      return {static_cast<std::size_t>(std::stoul(text)), {}};
    }
    return {std::nullopt, text};
  }
  static ColumnRef at(std::size_t i) { return {i, {}}; }
};

struct ExtrapolationRange {
  double from = 0.0;
  double to = 0.0;
  double step = 1.0;

  /// "from:to:step"
  static ExtrapolationRange parse(const std::string& text) {
    ExtrapolationRange r;
    std::vector<double> parts;
    std::size_t start = 0;
    while (true) {
      const auto colon = text.find(':', start);
      double v = 0.0;
      if (!parse_double(text.substr(start, colon == std::string::npos ? std::string::npos : colon - start), v)) {
        throw InputError(0, "extrapolation range must be 'from:to:step'");
      }
      parts.push_back(v);
      if (colon == std::string::npos) break;
      start = colon + 1;
    }
    if (parts.size() != 3) throw InputError(0, "extrapolation range must be 'from:to:step'");
    r = {parts[0], parts[1], parts[2]};
    r.validate();
    return r;
  }

  void validate() const {
    if (!std::isfinite(from) || !std::isfinite(to) || !(to >= from) || !(step > 0.0)) {
      throw InputError(0, "extrapolation range must satisfy from <= to and step > 0");
    }
  }

  std::vector<double> points() const {
    std::vector<double> out;
    const auto count = static_cast<std::uint64_t>(std::floor((to - from) / step + 1e-9)) + 1;
    for (std::uint64_t i = 0; i < count; ++i) out.push_back(from + static_cast<double>(i) * step);
    return out;
  }
};

struct RunConfig {
  int order = 1;
  ColumnRef t_column = ColumnRef::at(0);
  /// Defaults to column 1, or column 0 when `dt` is set.
  std::optional<ColumnRef> f_column;
  /// Explicit-dt mode: sample i of the input is taken at t0 + i*dt and the
  /// time column is ignored.
  std::optional<double> dt;
  double t0 = 0.0;
  OutputFormat format = OutputFormat::csv;
  bool emit_estimates = true;
  bool emit_residual = true;
  bool emit_errors = false;  // requires `truth`
  bool emit_coeffs = false;
  std::optional<SignalSpec> truth;
  std::optional<ExtrapolationRange> extrapolation;
  std::optional<StateRecord> resume;
  bool skip_repeats = false;
};

struct RunSummary {
  std::uint64_t data_rows = 0;
  std::uint64_t accepted = 0;
  std::uint64_t skipped_nonmonotone = 0;
  std::uint64_t skipped_nonfinite = 0;
  std::uint64_t skipped_repeat = 0;
  std::optional<StateRecord> final_state;
  std::vector<double> coeffs;

  std::uint64_t skipped() const { return skipped_nonmonotone + skipped_nonfinite + skipped_repeat; }
};

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    std::string field = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string{} : field.substr(b, e - b + 1));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

inline bool looks_numeric(const std::string& field) {
  double v = 0.0;
  return parse_double(field, v);
}

inline std::size_t resolve(const ColumnRef& ref, const std::vector<std::string>& header, std::size_t line) {
  if (ref.index) return *ref.index;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == ref.name) return i;
  }
  throw InputError(line, "column '" + ref.name + "' not found in header");
}

class Writer {
 public:
  Writer(const RunConfig& cfg, std::ostream& out) : cfg_(cfg), out_(out) {}

  void meta(double t0, const GainTable& table) {
    const auto sum = gain_checksum(table);
    std::ostringstream hex;
    hex << std::hex << std::setw(16) << std::setfill('0') << sum;
    if (cfg_.format == OutputFormat::json_lines) {
      out_ << nlohmann::json{{"type", "meta"}, {"order", table.order}, {"t0", t0},
                             {"gain_checksum", hex.str()}}
                  .dump()
           << '\n';
      return;
    }
    out_ << "# hound order=" << table.order << " t0=" << format_double(t0) << " gain_checksum=" << hex.str()
         << '\n';
    const int n = table.order;
    out_ << 't';
    if (cfg_.emit_estimates) {
      for (int k = 0; k < n; ++k) out_ << ",z" << k;
    }
    if (cfg_.emit_residual) out_ << ",epsilon";
    if (cfg_.emit_errors) {
      for (int k = 0; k < n; ++k) out_ << ",e" << k;
    }
    if (cfg_.emit_coeffs) {
      for (int k = 0; k < n; ++k) out_ << ",k" << k;
    }
    out_ << '\n';
  }

  void row(double t, std::span<const double> z, double residual) {
    std::vector<double> errors, coeffs;
    if (cfg_.emit_errors) errors = state_error(z, derivative_vector(*cfg_.truth, t, static_cast<int>(z.size())));
    if (cfg_.emit_coeffs) coeffs = TaylorModel(t, {z.begin(), z.end()}).extract_poly_coeffs();

    if (cfg_.format == OutputFormat::json_lines) {
      nlohmann::json j{{"t", t}};
      if (cfg_.emit_estimates) j["z"] = std::vector<double>(z.begin(), z.end());
      if (cfg_.emit_residual) j["epsilon"] = residual;
      if (cfg_.emit_errors) j["e"] = errors;
      if (cfg_.emit_coeffs) j["k"] = coeffs;
      out_ << j.dump() << '\n';
      return;
    }
    out_ << format_double(t);
    if (cfg_.emit_estimates) {
      for (double v : z) out_ << ',' << format_double(v);
    }
    if (cfg_.emit_residual) out_ << ',' << format_double(residual);
    for (double v : errors) out_ << ',' << format_double(v);
    for (double v : coeffs) out_ << ',' << format_double(v);
    out_ << '\n';
  }

  void summary(const RunSummary& s) {
    if (cfg_.format == OutputFormat::json_lines) {
      out_ << nlohmann::json{{"type", "summary"},
                             {"rows", s.data_rows},
                             {"accepted", s.accepted},
                             {"skipped_nonmonotone", s.skipped_nonmonotone},
                             {"skipped_nonfinite", s.skipped_nonfinite},
                             {"skipped_repeat", s.skipped_repeat},
                             {"coeffs", s.coeffs}}
                  .dump()
           << '\n';
      return;
    }
    out_ << "# summary rows=" << s.data_rows << " accepted=" << s.accepted
         << " skipped_nonmonotone=" << s.skipped_nonmonotone << " skipped_nonfinite=" << s.skipped_nonfinite
         << " skipped_repeat=" << s.skipped_repeat << '\n';
    if (!s.coeffs.empty()) {
      out_ << "# coeffs";
      for (std::size_t j = 0; j < s.coeffs.size(); ++j) out_ << " K" << j << '=' << format_double(s.coeffs[j]);
      out_ << '\n';
    }
  }

 private:
  const RunConfig& cfg_;
  std::ostream& out_;
};

}  // namespace detail

/// Writes the model's value and derivatives over `range` as CSV:
/// tau, f0, f1, ..., f{n-1}.
inline void write_extrapolation(const TaylorModel& model, const ExtrapolationRange& range, std::ostream& out,
                                const std::string& prefix = {}) {
  out << prefix << "tau";
  for (int k = 0; k < model.order(); ++k) out << ",f" << k;
  out << '\n';
  for (double tau : range.points()) {
    out << prefix << format_double(tau);
    for (int k = 0; k < model.order(); ++k) out << ',' << format_double(model.eval_derivative(k, tau));
    out << '\n';
  }
}

/// Processes the whole input. Throws InputError on malformed rows; timestamps
/// that do not increase and non-finite values are skipped, counted and reported
/// on `diag`.
inline RunSummary run_stream(const RunConfig& cfg, std::istream& in, std::ostream& out, std::ostream& diag,
                             std::ostream* extrapolation_out = nullptr) {
  hound::detail::check_order(cfg.order);
  if (cfg.emit_errors && !cfg.truth) throw InputError(0, "error columns need a truth signal");
  if (cfg.dt && !(*cfg.dt > 0.0)) throw InputError(0, "dt must be positive");
  if (cfg.resume && cfg.resume->order != cfg.order) {
    throw InputError(0, "snapshot order " + std::to_string(cfg.resume->order) + " differs from --order " +
                            std::to_string(cfg.order));
  }

  const auto gains = make_gain_table(cfg.order);
  const ColumnRef f_ref = cfg.f_column.value_or(ColumnRef::at(cfg.dt ? 0 : 1));
  detail::Writer writer(cfg, out);
  RunSummary summary;
  std::optional<Differentiator> diff;
  if (cfg.resume) {
    diff.emplace(*cfg.resume, gains);
    writer.meta(cfg.resume->t, *gains);
  }

  std::vector<std::string> header;
  bool header_decided = false;
  std::optional<std::size_t> t_idx, f_idx;
  std::string line;
  std::size_t line_no = 0;
  std::uint64_t data_index = 0;

  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    auto fields = detail::split_csv(line);

    if (!header_decided) {
      header_decided = true;
      bool numeric = true;
      for (const auto& f : fields) numeric = numeric && detail::looks_numeric(f);
      if (!numeric) {
        header = fields;
        t_idx = detail::resolve(cfg.t_column, header, line_no);
        f_idx = detail::resolve(f_ref, header, line_no);
        continue;
      }
      if (!cfg.t_column.index || !f_ref.index) throw InputError(line_no, "column names given but input has no header");
      t_idx = *cfg.t_column.index;
      f_idx = *f_ref.index;
    }

    ++summary.data_rows;
    const std::uint64_t index = data_index++;
    double t = 0.0, f = 0.0;
    if (*f_idx >= fields.size()) throw InputError(line_no, "missing signal column");
    if (!parse_double(fields[*f_idx], f)) throw InputError(line_no, "cannot parse value '" + fields[*f_idx] + "'");
    if (cfg.dt) {
      t = cfg.t0 + static_cast<double>(index) * *cfg.dt;
    } else {
      if (*t_idx >= fields.size()) throw InputError(line_no, "missing time column");
      if (!parse_double(fields[*t_idx], t)) throw InputError(line_no, "cannot parse time '" + fields[*t_idx] + "'");
    }

    if (!std::isfinite(t) || !std::isfinite(f)) {
      ++summary.skipped_nonfinite;
      diag << "line " << line_no << ": non-finite value skipped\n";
      continue;
    }

    if (!diff) {
      if (t < 0.0) throw InputError(line_no, "first timestamp must be non-negative");
      diff.emplace(DifferentiatorConfig{cfg.order, std::nullopt, cfg.skip_repeats}, Sample{t, f}, gains);
      writer.meta(t, *gains);
      ++summary.accepted;
      writer.row(t, diff->estimates(), 0.0);
      continue;
    }

    if (!(t > diff->time())) {
      ++summary.skipped_nonmonotone;
      diag << "line " << line_no << ": timestamp " << format_double(t) << " does not follow "
           << format_double(diff->time()) << ", skipped\n";
      continue;
    }
    const auto res = diff->update({t, f});
    if (!res.applied) {
      ++summary.skipped_repeat;
      continue;
    }
    ++summary.accepted;
    writer.row(t, diff->estimates(), res.residual);
  }

  if (!diff) {
    diag << "no samples\n";
    return summary;
  }

  const TaylorModel model = TaylorModel::capture(*diff);
  summary.coeffs = model.extract_poly_coeffs();
  summary.final_state = diff->snapshot();
  writer.summary(summary);
  if (cfg.extrapolation) {
    if (extrapolation_out) {
      write_extrapolation(model, *cfg.extrapolation, *extrapolation_out);
    } else if (cfg.format == OutputFormat::csv) {
      out << "# extrapolation\n";
      write_extrapolation(model, *cfg.extrapolation, out, "# ");
    } else {
      for (double tau : cfg.extrapolation->points()) {
        std::vector<double> f(static_cast<std::size_t>(model.order()));
        for (int k = 0; k < model.order(); ++k) f[k] = model.eval_derivative(k, tau);
        out << nlohmann::json{{"type", "extrapolation"}, {"tau", tau}, {"f", f}}.dump() << '\n';
      }
    }
  }
  return summary;
}

}  // namespace hound::stream
