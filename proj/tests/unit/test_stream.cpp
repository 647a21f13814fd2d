#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <iomanip>
#include <random>
#include <sstream>

#include "json.hpp"

#include "hound/state_io.hpp"
#include "hound/stream.hpp"
#include "oracles.hpp"

namespace hound::stream {
namespace {

struct Outcome {
  RunSummary summary;
  std::string out;
  std::string diag;
};

Outcome run(const RunConfig& cfg, const std::string& input) {
  std::istringstream in(input);
  std::ostringstream out, diag;
  Outcome o;
  o.summary = run_stream(cfg, in, out, diag);
  o.out = out.str();
  o.diag = diag.str();
  return o;
}

std::vector<std::string> data_lines(const std::string& text) {
  std::vector<std::string> rows;
  std::istringstream in(text);
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    rows.push_back(line);
  }
  return rows;
}

std::vector<double> fields(const std::string& row) {
  std::vector<double> out;
  for (const auto& f : detail::split_csv(row)) {
    double v = 0.0;
    EXPECT_TRUE(parse_double(f, v)) << f;
    out.push_back(v);
  }
  return out;
}

TEST(RunStream, FirstOrderColumnIsRunningMean) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::string input;
  std::vector<double> xs;
  for (int i = 1; i <= 500; ++i) {
    xs.push_back(u(gen));
    input += std::to_string(i) + "," + format_double(xs.back()) + "\n";
  }
  RunConfig cfg;
  cfg.order = 1;
  const auto o = run(cfg, input);
  const auto rows = data_lines(o.out);
  ASSERT_EQ(rows.size(), xs.size());
  // The first row initialises at t = 1, so row k holds the mean of x[0..k].
  const auto means = test::running_means(xs);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto v = fields(rows[i]);
    EXPECT_NEAR(v[1], means[i], 1e-12 * 10.0) << "row " << i;
  }
  EXPECT_EQ(o.summary.accepted, 500u);
}

TEST(RunStream, ConstantInputStaysConstant) {
  std::string input = "t,f\n";
  for (int i = 0; i <= 100; ++i) input += std::to_string(i) + ",4.25\n";
  RunConfig cfg;
  cfg.order = 3;
  for (const auto& row : data_lines(run(cfg, input).out)) {
    const auto v = fields(row);
    EXPECT_EQ(v[1], 4.25);
    EXPECT_EQ(v[2], 0.0);
    EXPECT_EQ(v[3], 0.0);
    EXPECT_EQ(v[4], 0.0);
  }
}

TEST(RunStream, EmptyInputReportsNoSamples) {
  RunConfig cfg;
  cfg.order = 2;
  const auto o = run(cfg, "");
  EXPECT_EQ(o.out, "");
  EXPECT_NE(o.diag.find("no samples"), std::string::npos);
  EXPECT_FALSE(o.summary.final_state.has_value());

  const auto only_comments = run(cfg, "# nothing here\n\n");
  EXPECT_NE(only_comments.diag.find("no samples"), std::string::npos);
}

TEST(RunStream, MetadataAndHeader) {
  RunConfig cfg;
  cfg.order = 2;
  cfg.emit_coeffs = true;
  const auto o = run(cfg, "0,1\n1,2\n");
  std::istringstream in(o.out);
  std::string meta, header;
  std::getline(in, meta);
  std::getline(in, header);
  std::ostringstream hex;
  hex << std::hex << std::setw(16) << std::setfill('0') << gain_checksum(GainTable::build(2));
  EXPECT_EQ(meta, "# hound order=2 t0=0 gain_checksum=" + hex.str());
  EXPECT_EQ(header, "t,z0,z1,epsilon,k0,k1");
  EXPECT_NE(o.out.find("# summary rows=2 accepted=2"), std::string::npos);
  EXPECT_NE(o.out.find("# coeffs K0="), std::string::npos);
}

TEST(RunStream, NamedColumnsAndComments) {
  const std::string input =
      "# produced elsewhere\n"
      "id,value,time\n"
      "a,1,0\n"
      "# mid-stream comment\n"
      "b,3,1\n"
      "\n"
      "c,5,2\n";
  RunConfig cfg;
  cfg.order = 1;
  cfg.t_column = ColumnRef::parse("time");
  cfg.f_column = ColumnRef::parse("value");
  const auto rows = data_lines(run(cfg, input).out);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(fields(rows[2])[1], 4.0);  // mean of 3 and 5
}

TEST(RunStream, ExplicitDtUsesSingleColumn) {
  RunConfig cfg;
  cfg.order = 1;
  cfg.dt = 0.5;
  cfg.t0 = 2.0;
  const auto rows = data_lines(run(cfg, "1\n2\n3\n").out);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(fields(rows[0])[0], 2.0);
  EXPECT_EQ(fields(rows[2])[0], 3.0);
}

TEST(RunStream, ParseErrorsCarryLineNumbers) {
  RunConfig cfg;
  cfg.order = 1;
  auto line_of = [&](const std::string& input) -> std::size_t {
    try {
      run(cfg, input);
    } catch (const InputError& e) {
      return e.line();
    }
    return 0;
  };
  EXPECT_EQ(line_of("0,1\n1,2\n2,abc\n"), 3u);
  EXPECT_EQ(line_of("# c\nt,f\n0,1\n1\n"), 4u);
  RunConfig named = cfg;
  named.t_column = ColumnRef::parse("time");
  try {
    run(named, "t,f\n0,1\n");
    FAIL();
  } catch (const InputError& e) {
    EXPECT_EQ(e.line(), 1u);
  }
  EXPECT_THROW(run(named, "0,1\n"), InputError);
}

TEST(RunStream, SkippedRowsReconcile) {
  const std::string input =
      "t,f\n"
      "0,1\n"
      "1,2\n"
      "1,2\n"    // repeated timestamp
      "0.5,9\n"  // goes backwards
      "2,nan\n"
      "3,inf\n"
      "4,5\n";
  RunConfig cfg;
  cfg.order = 2;
  const auto o = run(cfg, input);
  EXPECT_EQ(o.summary.data_rows, 7u);
  EXPECT_EQ(o.summary.accepted, 3u);
  EXPECT_EQ(o.summary.skipped_nonmonotone, 2u);
  EXPECT_EQ(o.summary.skipped_nonfinite, 2u);
  EXPECT_EQ(o.summary.accepted + o.summary.skipped(), o.summary.data_rows);
  EXPECT_EQ(data_lines(o.out).size(), o.summary.accepted);
  EXPECT_NE(o.diag.find("line 4"), std::string::npos);
  EXPECT_NE(o.diag.find("line 6: non-finite"), std::string::npos);
}

TEST(RunStream, SkipRepeatsIsCounted) {
  RunConfig cfg;
  cfg.order = 1;
  cfg.skip_repeats = true;
  const auto o = run(cfg, "0,1\n1,1\n2,1\n3,2\n");
  EXPECT_EQ(o.summary.skipped_repeat, 2u);
  EXPECT_EQ(o.summary.accepted, 2u);
}

TEST(RunStream, ErrorsNeedTruth) {
  RunConfig cfg;
  cfg.order = 2;
  cfg.emit_errors = true;
  EXPECT_THROW(run(cfg, "0,1\n"), InputError);
  cfg.truth = SignalSpec{{1.0, 2.0}, {}, 0.0, 0};
  const auto rows = data_lines(run(cfg, "0,1\n1,3\n2,5\n").out);
  ASSERT_EQ(rows.size(), 3u);
  const auto v = fields(rows[2]);
  ASSERT_EQ(v.size(), 6u);
  EXPECT_DOUBLE_EQ(v[4], v[1] - 5.0);
  EXPECT_DOUBLE_EQ(v[5], v[2] - 2.0);
}

TEST(RunStream, JsonLines) {
  RunConfig cfg;
  cfg.order = 2;
  cfg.format = OutputFormat::json_lines;
  cfg.extrapolation = ExtrapolationRange::parse("10:12:1");
  const auto o = run(cfg, "0,1\n1,2\n2,3\n");
  std::istringstream in(o.out);
  std::vector<nlohmann::json> recs;
  std::string line;
  while (std::getline(in, line)) recs.push_back(nlohmann::json::parse(line));
  ASSERT_EQ(recs.size(), 1u + 3u + 1u + 3u);
  EXPECT_EQ(recs[0]["type"], "meta");
  EXPECT_EQ(recs[0]["order"], 2);
  EXPECT_EQ(recs[1]["z"].size(), 2u);
  EXPECT_EQ(recs[1]["epsilon"], 0.0);
  EXPECT_EQ(recs[4]["type"], "summary");
  EXPECT_EQ(recs[4]["accepted"], 3);
  EXPECT_EQ(recs[5]["type"], "extrapolation");
  EXPECT_EQ(recs[7]["tau"], 12.0);
}

TEST(RunStream, ExtrapolationToSeparateStream) {
  RunConfig cfg;
  cfg.order = 2;
  cfg.extrapolation = ExtrapolationRange::parse("0:4:2");
  std::istringstream in("0,0\n1,0\n");
  std::ostringstream out, diag, extra;
  run_stream(cfg, in, out, diag, &extra);
  EXPECT_EQ(extra.str(), "tau,f0,f1\n0,0,0\n2,0,0\n4,0,0\n");
  EXPECT_EQ(out.str().find("# extrapolation"), std::string::npos);
  EXPECT_THROW(ExtrapolationRange::parse("3:1:1"), InputError);
  EXPECT_THROW(ExtrapolationRange::parse("0:1"), InputError);
  EXPECT_THROW(ExtrapolationRange::parse("0:1:0"), InputError);
}

TEST(RunStream, ResumeReproducesTailBitForBit) {
  const SignalSpec spec{{1.0, -0.2, 0.01}, {{0.3, 0.7, 0.0}}, 0.4, 8};
  std::string head, tail;
  for (int i = 0; i <= 2000; ++i) {
    const std::string row = format_double(0.5 * i) + "," + format_double(sample(spec, 0.5 * i, i)) + "\n";
    (i <= 1200 ? head : tail) += row;
  }
  RunConfig cfg;
  cfg.order = 4;
  const auto whole = run(cfg, head + tail);
  const auto first = run(cfg, head);

  for (const bool as_json : {true, false}) {
    const std::string text = as_json ? to_json(*first.summary.final_state).dump() : to_text(*first.summary.final_state);
    std::istringstream snap(text);
    RunConfig resumed = cfg;
    resumed.resume = load_state(snap);
    EXPECT_EQ(*resumed.resume, *first.summary.final_state);
    const auto second = run(resumed, tail);

    const auto all_rows = data_lines(whole.out);
    const auto tail_rows = data_lines(second.out);
    ASSERT_EQ(tail_rows.size(), 800u);
    for (std::size_t i = 0; i < tail_rows.size(); ++i) EXPECT_EQ(tail_rows[i], all_rows[1201 + i]);
    EXPECT_EQ(*second.summary.final_state, *whole.summary.final_state);
  }
}

TEST(RunStream, ResumeOrderMustMatch) {
  RunConfig cfg;
  cfg.order = 3;
  cfg.resume = StateRecord{1.0, 2, 2, {1.0, 0.0}, 1.0, false};
  EXPECT_THROW(run(cfg, "2,1\n"), InputError);
}

TEST(StateIo, RoundTripsRandomStates) {
  std::mt19937_64 gen(17);
  std::uniform_int_distribution<std::uint64_t> bits;
  auto any_finite = [&] {
    while (true) {
      const std::uint64_t b = bits(gen);
      double v;
      std::memcpy(&v, &b, sizeof v);
      if (std::isfinite(v)) return v;
    }
  };
  for (int trial = 0; trial < 500; ++trial) {
    StateRecord s;
    s.order = 1 + trial % 7;
    s.t = std::abs(any_finite());
    s.samples_seen = bits(gen);
    s.last_f = any_finite();
    s.skip_repeats = trial % 2 == 0;
    for (int k = 0; k < s.order; ++k) s.z.push_back(any_finite());
    std::istringstream j(to_json(s).dump()), t(to_text(s));
    EXPECT_EQ(load_state(j), s);
    EXPECT_EQ(load_state(t), s);
  }
}

TEST(StateIo, RejectsMalformedSnapshots) {
  auto load = [](const std::string& text) {
    std::istringstream in(text);
    return load_state(in);
  };
  EXPECT_THROW(load(""), InputError);
  EXPECT_THROW(load("{\"format\":\"other\"}"), InputError);
  EXPECT_THROW(load("{not json"), InputError);
  EXPECT_THROW(load("1.0 2 0.5\n"), LengthMismatch);
  EXPECT_THROW(load("1.0 x 0.5\n"), InputError);
  EXPECT_THROW(load("# hound-state v1 samples_seen=abc\n1 1 0\n"), InputError);
}

TEST(StateIo, NumberFormatting) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(159840119925.0), "159840119925");
  double v = 0.0;
  EXPECT_TRUE(parse_double(" +2.5e3 ", v));
  EXPECT_EQ(v, 2500.0);
  EXPECT_FALSE(parse_double("1.5x", v));
  EXPECT_FALSE(parse_double("", v));
}

}  // namespace
}  // namespace hound::stream
