// hound: command-line front end for the cumulative-smoothing differentiator.
//
// Exit codes: 0 success, 1 validation failure, 2 input error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hound/hound.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitInput = 2;

class InputSource {
 public:
  explicit InputSource(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ifstream>(path);
    if (!*file_) throw hound::InputError(0, "cannot open '" + path + "'");
  }
  std::istream& get() { return file_ ? *file_ : std::cin; }

 private:
  std::unique_ptr<std::ifstream> file_;
};

class OutputSink {
 public:
  explicit OutputSink(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw hound::InputError(0, "cannot write '" + path + "'");
  }
  std::ostream& get() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::vector<double> parse_list(const std::string& text) {
  return hound::detail::parse_number_list(text, 0);
}

hound::SignalConfig load_signal_config(const std::string& path) {
  InputSource src(path);
  return hound::parse_signal_config(src.get());
}

// --- run ---------------------------------------------------------------------

struct RunOptions {
  int order = 1;
  std::string input = "-";
  std::string output = "-";
  std::string t_col = "0";
  std::string f_col;
  double dt = 0.0;
  double t0 = 0.0;
  std::string format = "csv";
  std::vector<std::string> emit;
  std::string truth;
  std::string extrapolate;
  std::string extrapolation_out;
  std::string snapshot_out;
  std::string snapshot_format = "json";
  std::string resume;
  bool skip_repeats = false;
};

hound::stream::RunConfig make_run_config(const RunOptions& o) {
  hound::stream::RunConfig cfg;
  cfg.order = o.order;
  cfg.t_column = hound::stream::ColumnRef::parse(o.t_col);
  if (!o.f_col.empty()) cfg.f_column = hound::stream::ColumnRef::parse(o.f_col);
  if (o.dt > 0.0) cfg.dt = o.dt;
  cfg.t0 = o.t0;
  cfg.format = o.format == "jsonl" ? hound::stream::OutputFormat::json_lines : hound::stream::OutputFormat::csv;
  cfg.skip_repeats = o.skip_repeats;
  if (!o.truth.empty()) cfg.truth = load_signal_config(o.truth).spec;
  if (!o.emit.empty()) {
    cfg.emit_estimates = cfg.emit_residual = false;
    for (const auto& e : o.emit) {
      if (e == "estimates") cfg.emit_estimates = true;
      else if (e == "residual") cfg.emit_residual = true;
      else if (e == "errors") cfg.emit_errors = true;
      else if (e == "coeffs") cfg.emit_coeffs = true;
      else throw hound::InputError(0, "unknown --emit item '" + e + "'");
    }
  } else {
    cfg.emit_errors = cfg.truth.has_value();
  }
  if (!o.extrapolate.empty()) cfg.extrapolation = hound::stream::ExtrapolationRange::parse(o.extrapolate);
  if (!o.resume.empty()) {
    InputSource src(o.resume);
    cfg.resume = hound::load_state(src.get());
  }
  return cfg;
}

int cmd_run(const RunOptions& o) {
  const auto cfg = make_run_config(o);
  InputSource in(o.input);
  OutputSink out(o.output);
  std::unique_ptr<OutputSink> extra;
  if (!o.extrapolation_out.empty()) extra = std::make_unique<OutputSink>(o.extrapolation_out);
  const auto summary =
      hound::stream::run_stream(cfg, in.get(), out.get(), std::cerr, extra ? &extra->get() : nullptr);
  if (summary.skipped() > 0) {
    std::cerr << "skipped " << summary.skipped() << " of " << summary.data_rows << " rows\n";
  }
  if (!o.snapshot_out.empty() && summary.final_state) {
    OutputSink snap(o.snapshot_out);
    if (o.snapshot_format == "text") snap.get() << hound::to_text(*summary.final_state);
    else snap.get() << hound::to_json(*summary.final_state).dump(2) << '\n';
  }
  return kExitOk;
}

// --- generate ----------------------------------------------------------------

struct GenerateOptions {
  std::string config;
  std::string poly;
  std::vector<std::string> harmonics;
  std::optional<double> sigma;
  std::optional<std::uint64_t> seed;
  std::optional<double> t_start, t_end, dt;
  std::string output = "-";
};

int cmd_generate(const GenerateOptions& o) {
  hound::SignalConfig cfg;
  if (!o.config.empty()) cfg = load_signal_config(o.config);
  if (!o.poly.empty()) cfg.spec.poly = parse_list(o.poly);
  for (const auto& h : o.harmonics) cfg.spec.harmonics.push_back(hound::detail::parse_harmonic(h, 0));
  if (o.sigma) cfg.spec.noise_sigma = *o.sigma;
  if (o.seed) cfg.spec.seed = *o.seed;
  if (o.t_start) cfg.grid.t_start = *o.t_start;
  if (o.t_end) cfg.grid.t_end = *o.t_end;
  if (o.dt) cfg.grid.dt = *o.dt;
  cfg.spec.validate();
  if (!(cfg.grid.dt > 0.0)) throw hound::InputError(0, "dt must be positive");

  OutputSink sink(o.output);
  auto& out = sink.get();
  out << "# hound-generate sigma=" << hound::format_double(cfg.spec.noise_sigma) << " seed=" << cfg.spec.seed
      << " poly=";
  for (std::size_t j = 0; j < cfg.spec.poly.size(); ++j) {
    out << (j ? ";" : "") << hound::format_double(cfg.spec.poly[j]);
  }
  out << '\n' << "t,f\n";
  const auto count = cfg.grid.size();
  for (std::uint64_t i = 0; i < count; ++i) {
    const double t = cfg.grid.at(i);
    out << hound::format_double(t) << ',' << hound::format_double(hound::sample(cfg.spec, t, i)) << '\n';
  }
  return kExitOk;
}

// --- verify-identities -------------------------------------------------------

int cmd_verify(int max_order) {
  bool ok = true;
  for (const auto& r : hound::run_identity_suite(max_order)) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.identity << " n=" << r.order;
    if (!r.detail.empty()) std::cout << "  " << r.detail;
    std::cout << '\n';
    ok = ok && r.passed;
  }
  return ok ? kExitOk : kExitValidation;
}

// --- oracle-check ------------------------------------------------------------

int cmd_oracle() {
  bool ok = true;
  for (const auto& r : hound::oracle::run_oracle_checks()) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << "  measured=" << r.measured
              << " threshold=" << r.threshold;
    if (!r.detail.empty()) std::cout << "  (" << r.detail << ')';
    std::cout << '\n';
    ok = ok && r.passed;
  }
  return ok ? kExitOk : kExitValidation;
}

// --- variance-check ----------------------------------------------------------

struct VarianceOptions {
  int order = 3;
  double sigma = 1.0;
  int runs = 200;
  std::string grid = "1000,2000,5000,10000";
  std::string poly = "5,-0.004,0.0003";
  std::uint64_t seed = 20240601;
  double tolerance = 0.3;
  unsigned threads = 0;
};

int cmd_variance(const VarianceOptions& o) {
  if (o.runs < hound::kMinVarianceRuns) {
    throw hound::InsufficientRuns("need at least " + std::to_string(hound::kMinVarianceRuns) + " runs");
  }
  hound::SignalSpec spec{parse_list(o.poly), {}, o.sigma, o.seed};
  if (spec.degree() > o.order - 1) throw hound::InputError(0, "polynomial degree must be at most order-1");
  hound::MonteCarloConfig cfg;
  cfg.order = o.order;
  cfg.runs = o.runs;
  cfg.grid_times = parse_list(o.grid);
  cfg.threads = o.threads;
  const auto profile = hound::variance_profile(spec, cfg);
  bool ok = true;
  for (int m = 1; m <= o.order; ++m) {
    const auto s = hound::slope_from_profile(profile, m, o.sigma);
    const double expected = -(2.0 * m - 1.0);
    if (!s.slope) {
      std::cout << "SKIP channel m=" << m << "  variance is zero (sigma = 0), slope undefined\n";
      continue;
    }
    const bool pass = std::abs(*s.slope - expected) <= o.tolerance;
    ok = ok && pass;
    std::cout << (pass ? "PASS" : "FAIL") << " channel m=" << m << "  slope=" << *s.slope << " expected=" << expected
              << " tol=" << o.tolerance << " K=" << s.constant;
    if (s.transient_warning) std::cout << "  [warning: variance not monotone over the late grid]";
    std::cout << '\n';
  }
  return ok ? kExitOk : kExitValidation;
}

// --- extract-coeffs ----------------------------------------------------------

struct ExtractOptions {
  std::string snapshot;
  RunOptions run;
  std::string extrapolate;
};

int cmd_extract(const ExtractOptions& o) {
  std::optional<hound::StateRecord> state;
  if (!o.snapshot.empty()) {
    InputSource src(o.snapshot);
    state = hound::load_state(src.get());
  } else {
    auto cfg = make_run_config(o.run);
    cfg.extrapolation.reset();
    InputSource in(o.run.input);
    std::ostringstream discard;
    state = hound::stream::run_stream(cfg, in.get(), discard, std::cerr).final_state;
    if (!state) return kExitInput;
  }
  const hound::TaylorModel model(state->t, state->z);
  const auto k = model.extract_poly_coeffs();
  std::cout << "# anchor t=" << hound::format_double(model.anchor()) << " order=" << model.order() << '\n';
  std::cout << "j,K\n";
  for (std::size_t j = 0; j < k.size(); ++j) std::cout << j << ',' << hound::format_double(k[j]) << '\n';
  if (!o.extrapolate.empty()) {
    std::cout << '\n';
    hound::stream::write_extrapolation(model, hound::stream::ExtrapolationRange::parse(o.extrapolate), std::cout);
  }
  return kExitOk;
}

void add_column_flags(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("-i,--input", o.input, "Input CSV file, '-' for stdin");
  cmd->add_option("--t-col", o.t_col, "Time column: 0-based index or header name");
  cmd->add_option("--f-col", o.f_col, "Signal column: 0-based index or header name");
  cmd->add_option("--dt", o.dt, "Explicit sampling step; row i is taken at t0 + i*dt")->check(CLI::PositiveNumber);
  cmd->add_option("--t0", o.t0, "Start time in explicit-dt mode");
  cmd->add_flag("--skip-repeats", o.skip_repeats, "Ignore samples equal to the previous value");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hound: parameter-free online high-order numerical differentiator"};
  app.require_subcommand(1);

  RunOptions run_opts;
  auto* run = app.add_subcommand("run", "Differentiate a (t, f) stream");
  run->add_option("-n,--order", run_opts.order, "Order parameter n (estimates f .. f^(n-1))")
      ->required()
      ->check(CLI::Range(1, hound::kMaxOrder));
  add_column_flags(run, run_opts);
  run->add_option("-o,--output", run_opts.output, "Output file, '-' for stdout");
  run->add_option("--format", run_opts.format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
  run->add_option("--emit", run_opts.emit, "Columns: estimates,residual,errors,coeffs")->delimiter(',');
  run->add_option("--truth", run_opts.truth, "Signal config of the clean signal, enables error columns");
  run->add_option("--extrapolate", run_opts.extrapolate, "Final Taylor model table over from:to:step");
  run->add_option("--extrapolation-out", run_opts.extrapolation_out, "Write the extrapolation table here");
  run->add_option("--snapshot-out", run_opts.snapshot_out, "Write the final state here");
  run->add_option("--snapshot-format", run_opts.snapshot_format, "json or text")
      ->check(CLI::IsMember({"json", "text"}));
  run->add_option("--resume", run_opts.resume, "Continue from a snapshot");

  GenerateOptions gen_opts;
  auto* gen = app.add_subcommand("generate", "Emit a synthetic (t, f) CSV stream");
  gen->add_option("-c,--config", gen_opts.config, "key = value signal config file");
  gen->add_option("--poly", gen_opts.poly, "Polynomial coefficients K0,K1,...");
  gen->add_option("--harmonic", gen_opts.harmonics, "amplitude,omega[,phase]; repeatable");
  gen->add_option("--sigma", gen_opts.sigma, "Noise standard deviation");
  gen->add_option("--seed", gen_opts.seed, "Noise seed");
  gen->add_option("--t-start", gen_opts.t_start, "First sample time");
  gen->add_option("--t-end", gen_opts.t_end, "Last sample time");
  gen->add_option("--dt", gen_opts.dt, "Sampling step");
  gen->add_option("-o,--output", gen_opts.output, "Output file, '-' for stdout");

  int max_order = 12;
  auto* verify = app.add_subcommand("verify-identities", "Check the coefficient identities in exact arithmetic");
  verify->add_option("--max-order", max_order, "Highest order to check")->check(CLI::Range(1, hound::kMaxOrder));

  auto* oracle = app.add_subcommand("oracle-check", "Compare discrete, RK4 and closed-form solutions");

  VarianceOptions var_opts;
  auto* variance = app.add_subcommand("variance-check", "Monte Carlo check of the noise variance law");
  variance->add_option("-n,--order", var_opts.order)->check(CLI::Range(1, hound::kMaxOrder));
  variance->add_option("--sigma", var_opts.sigma)->check(CLI::NonNegativeNumber);
  variance->add_option("--runs", var_opts.runs);
  variance->add_option("--grid", var_opts.grid, "Comma separated grid times");
  variance->add_option("--poly", var_opts.poly, "Clean signal coefficients (degree <= n-1)");
  variance->add_option("--seed", var_opts.seed);
  variance->add_option("--tolerance", var_opts.tolerance);
  variance->add_option("--threads", var_opts.threads);

  ExtractOptions ext_opts;
  auto* extract = app.add_subcommand("extract-coeffs", "Polynomial coefficients from a snapshot or a stream");
  extract->add_option("--snapshot", ext_opts.snapshot, "Snapshot file (json or text)");
  extract->add_option("-n,--order", ext_opts.run.order)->check(CLI::Range(1, hound::kMaxOrder));
  add_column_flags(extract, ext_opts.run);
  extract->add_option("--extrapolate", ext_opts.extrapolate, "Also print the model over from:to:step");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*run) return cmd_run(run_opts);
    if (*gen) return cmd_generate(gen_opts);
    if (*verify) return cmd_verify(max_order);
    if (*oracle) return cmd_oracle();
    if (*variance) return cmd_variance(var_opts);
    if (*extract) return cmd_extract(ext_opts);
  } catch (const hound::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const hound::InsufficientRuns& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const hound::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitOk;
}
