#pragma once

// Snapshot layouts for a differentiator state.
//
// JSON (one object):
//   {"format":"hound-state","version":1,"order":n,"t":t,"samples_seen":k,
//    "last_f":f,"skip_repeats":false,"z":[z0,...,z_{n-1}]}
//
// Plain text (two lines):
//   # hound-state v1 samples_seen=<k> last_f=<f> skip_repeats=<0|1>
//   <t> <n> <z0> ... <z_{n-1}>
//
// Numbers use the shortest representation that reads back to the same double,
// so resuming from a snapshot reproduces the uninterrupted run bit for bit.

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>

#include "json.hpp"

#include "hound/differentiator.hpp"
#include "hound/errors.hpp"

namespace hound {

/// Shortest round-trip decimal form of v.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline bool parse_double(std::string_view text, double& out) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc() && res.ptr == text.data() + text.size();
}

inline nlohmann::json to_json(const StateRecord& s) {
  return {{"format", "hound-state"}, {"version", 1},         {"order", s.order},
          {"t", s.t},                {"samples_seen", s.samples_seen}, {"last_f", s.last_f},
          {"skip_repeats", s.skip_repeats}, {"z", s.z}};
}

inline StateRecord state_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "hound-state") throw InputError(0, "not a hound-state snapshot");
    if (j.at("version").get<int>() != 1) throw InputError(0, "unsupported snapshot version");
    StateRecord s;
    s.order = j.at("order").get<int>();
    s.t = j.at("t").get<double>();
    s.samples_seen = j.at("samples_seen").get<std::uint64_t>();
    s.last_f = j.value("last_f", 0.0);
    s.skip_repeats = j.value("skip_repeats", false);
    s.z = j.at("z").get<std::vector<double>>();
    if (s.z.size() != static_cast<std::size_t>(s.order)) throw LengthMismatch(s.order, s.z.size());
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(0, std::string("malformed snapshot: ") + e.what());
  }
}

inline std::string to_text(const StateRecord& s) {
  std::ostringstream out;
  out << "# hound-state v1 samples_seen=" << s.samples_seen << " last_f=" << format_double(s.last_f)
      << " skip_repeats=" << (s.skip_repeats ? 1 : 0) << '\n';
  out << format_double(s.t) << ' ' << s.order;
  for (double v : s.z) out << ' ' << format_double(v);
  out << '\n';
  return out.str();
}

inline StateRecord state_from_text(const std::string& text) {
  std::istringstream in(text);
  StateRecord s;
  std::string line;
  bool have_values = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string tok;
    if (line.front() == '#') {
      while (fields >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = tok.substr(0, eq);
        const std::string val = tok.substr(eq + 1);
        if (key == "samples_seen") {
          const auto res = std::from_chars(val.data(), val.data() + val.size(), s.samples_seen);
          if (res.ec != std::errc() || res.ptr != val.data() + val.size()) throw InputError(0, "bad samples_seen");
        } else if (key == "last_f" && !parse_double(val, s.last_f)) throw InputError(0, "bad last_f");
        else if (key == "skip_repeats") s.skip_repeats = val == "1";
      }
      continue;
    }
    if (!(fields >> tok) || !parse_double(tok, s.t)) throw InputError(0, "snapshot: bad time");
    if (!(fields >> s.order) || s.order < 1) throw InputError(0, "snapshot: bad order");
    while (fields >> tok) {
      double v = 0.0;
      if (!parse_double(tok, v)) throw InputError(0, "snapshot: bad estimate '" + tok + "'");
      s.z.push_back(v);
    }
    have_values = true;
    break;
  }
  if (!have_values) throw InputError(0, "snapshot: no state line");
  if (s.z.size() != static_cast<std::size_t>(s.order)) throw LengthMismatch(s.order, s.z.size());
  return s;
}

/// Reads either layout; JSON is recognised by a leading '{'.
inline StateRecord load_state(std::istream& in) {
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw InputError(0, std::string("malformed snapshot: ") + e.what());
    }
    return state_from_json(j);
  }
  return state_from_text(text);
}

}  // namespace hound
