#pragma once

// Configuration parsing and JSON (de)serialization of elements, series,
// bivariate series and membership reports.

#include <cstdint>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "ltc/eigenspace.hpp"

namespace ltc {

using Json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

// ---------------------------------------------------------------------------
// Integers and elements.

namespace io_detail {

inline Json int_to_json(const Int& v) {
  if (v.fits_slong_p()) return static_cast<std::int64_t>(v.get_si());
  return v.get_str();
}

inline Int int_from_json(const Json& j, const std::string& path) {
  if (j.is_number_integer()) return Int(std::to_string(j.get<std::int64_t>()));
  if (j.is_string()) {
    Int v;
    if (v.set_str(j.get<std::string>(), 10) != 0) throw ParseError(path + ": not an integer");
    return v;
  }
  throw ParseError(path + ": expected an integer");
}

inline std::vector<Int> int_list(const Json& j, const std::string& path) {
  if (!j.is_array()) throw ParseError(path + ": expected a list of integers");
  std::vector<Int> out;
  for (size_t i = 0; i < j.size(); ++i) out.push_back(int_from_json(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline int small_int(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ParseError(path + ": expected an integer");
  const auto v = j.get<std::int64_t>();
  if (v < INT_MIN || v > INT_MAX) throw ParseError(path + ": out of range");
  return static_cast<int>(v);
}

inline void check_header(const Json& j, const std::string& format) {
  if (!j.is_object()) throw ParseError("$: expected an object");
  if (!j.contains("format") || j["format"] != format)
    throw ParseError("$.format: expected \"" + format + "\"");
  if (!j.contains("version") || !j["version"].is_number_integer())
    throw ParseError("$.version: missing");
  if (j["version"].get<int>() != kFormatVersion)
    throw ParseError("$.version: version mismatch (file " + std::to_string(j["version"].get<int>()) + ", expected " +
                     std::to_string(kFormatVersion) + ")");
}

}  // namespace io_detail

inline Json to_json(const RingElement& x) {
  Json c = Json::array();
  for (const auto& v : x.coords()) c.push_back(io_detail::int_to_json(v));
  return Json{{"c", c}, {"prec", x.prec()}};
}

inline RingElement element_from_json(const Ring& R, const Json& j, const std::string& path = "$") {
  if (!j.is_object() || !j.contains("c") || !j.contains("prec")) throw ParseError(path + ": expected {c, prec}");
  std::vector<Int> c = io_detail::int_list(j["c"], path + ".c");
  if (static_cast<int>(c.size()) != R.dim())
    throw ParseError(path + ".c: expected " + std::to_string(R.dim()) + " coordinates, found " + std::to_string(c.size()));
  const int prec = io_detail::small_int(j["prec"], path + ".prec");
  if (prec < 0 || prec > R.cap()) throw ParseError(path + ".prec: outside 0.." + std::to_string(R.cap()));
  return R.from_coords(std::move(c), prec);
}

// ---------------------------------------------------------------------------
// Series, bivariate series, reports.

inline Json to_json(const Series& s) {
  Json coeffs = Json::array();
  for (const auto& c : s.coeffs()) coeffs.push_back(to_json(c));
  return Json{{"format", "ltc-series"},
              {"version", kFormatVersion},
              {"dim", s.ring().dim()},
              {"D", s.cap()},
              {"tail", s.exact_tail() ? "exact" : "unknown"},
              {"coeffs", coeffs}};
}

inline Series series_from_json(const Ring& R, const Json& j) {
  io_detail::check_header(j, "ltc-series");
  if (!j.contains("D") || !j.contains("tail") || !j.contains("coeffs")) throw ParseError("$: series needs D, tail, coeffs");
  const int D = io_detail::small_int(j["D"], "$.D");
  if (D < 0) throw ParseError("$.D: must be nonnegative");
  if (j.contains("dim") && io_detail::small_int(j["dim"], "$.dim") != R.dim())
    throw ParseError("$.dim: series ring does not match the context");
  const std::string tail = j["tail"].is_string() ? j["tail"].get<std::string>() : "";
  if (tail != "exact" && tail != "unknown") throw ParseError("$.tail: expected \"exact\" or \"unknown\"");
  const Json& cs = j["coeffs"];
  if (!cs.is_array() || static_cast<int>(cs.size()) != D + 1) throw ParseError("$.coeffs: expected D+1 coefficients");
  Series s(R, D, tail == "exact" ? Tail::Exact : Tail::Unknown);
  for (int n = 0; n <= D; ++n) s[n] = element_from_json(R, cs[static_cast<size_t>(n)], "$.coeffs[" + std::to_string(n) + "]");
  return s;
}

inline Json to_json(const BiSeries& b) {
  Json coeffs = Json::array();
  for (int n = 0; n <= b.cap(); ++n)
    for (int j = 0; j <= n; ++j) coeffs.push_back(Json{{"i", n - j}, {"j", j}, {"a", to_json(b.at(n - j, j))}});
  return Json{{"format", "ltc-biseries"},
              {"version", kFormatVersion},
              {"dim", b.ring().dim()},
              {"T", b.cap()},
              {"tail", b.tail() == Tail::Exact ? "exact" : "unknown"},
              {"coeffs", coeffs}};
}

inline BiSeries biseries_from_json(const Ring& R, const Json& j) {
  io_detail::check_header(j, "ltc-biseries");
  if (!j.contains("T") || !j.contains("coeffs") || !j.contains("tail")) throw ParseError("$: bi-series needs T, tail, coeffs");
  const int T = io_detail::small_int(j["T"], "$.T");
  if (T < 0) throw ParseError("$.T: must be nonnegative");
  const std::string tail = j["tail"].is_string() ? j["tail"].get<std::string>() : "";
  if (tail != "exact" && tail != "unknown") throw ParseError("$.tail: expected \"exact\" or \"unknown\"");
  BiSeries b(R, T, tail == "exact" ? Tail::Exact : Tail::Unknown);
  const Json& cs = j["coeffs"];
  if (!cs.is_array() || static_cast<int>(cs.size()) != (T + 1) * (T + 2) / 2)
    throw ParseError("$.coeffs: expected (T+1)(T+2)/2 coefficients");
  for (size_t k = 0; k < cs.size(); ++k) {
    const std::string path = "$.coeffs[" + std::to_string(k) + "]";
    if (!cs[k].is_object() || !cs[k].contains("i") || !cs[k].contains("j") || !cs[k].contains("a"))
      throw ParseError(path + ": expected {i, j, a}");
    const int i = io_detail::small_int(cs[k]["i"], path + ".i"), jj = io_detail::small_int(cs[k]["j"], path + ".j");
    if (i < 0 || jj < 0 || i + jj > T) throw ParseError(path + ": index outside the total-degree cap");
    b.at(i, jj) = element_from_json(R, cs[k]["a"], path + ".a");
  }
  return b;
}

inline Json to_json(const MembershipReport& r) {
  return Json{{"format", "ltc-report"},
              {"version", kFormatVersion},
              {"verdict", to_string(r.verdict)},
              {"checked_precision", r.checked_precision},
              {"checked_degree", r.checked_degree},
              {"witness", r.witness ? Json(*r.witness) : Json(nullptr)},
              {"note", r.note}};
}

inline MembershipReport report_from_json(const Json& j) {
  io_detail::check_header(j, "ltc-report");
  MembershipReport r;
  const std::string v = j.value("verdict", "");
  if (v == "pass")
    r.verdict = Verdict::Pass;
  else if (v == "fail")
    r.verdict = Verdict::Fail;
  else if (v == "indeterminate")
    r.verdict = Verdict::Indeterminate;
  else
    throw ParseError("$.verdict: expected pass, fail or indeterminate");
  if (!j.contains("checked_precision") || !j.contains("checked_degree")) throw ParseError("$: report needs checked_precision and checked_degree");
  r.checked_precision = io_detail::small_int(j["checked_precision"], "$.checked_precision");
  r.checked_degree = io_detail::small_int(j["checked_degree"], "$.checked_degree");
  if (j.contains("witness") && !j["witness"].is_null()) r.witness = io_detail::small_int(j["witness"], "$.witness");
  if (j.contains("note")) {
    if (!j["note"].is_string()) throw ParseError("$.note: expected a string");
    r.note = j["note"].get<std::string>();
  }
  return r;
}

inline Json parse_json_text(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Job configuration.

struct JobConfig {
  ContextSpec context;
  std::uint64_t seed = 0;
  std::vector<std::string> command;
  std::string input, output;
  std::optional<Json> alpha, scalar, s0;
  std::string kind, direction;
  int N_target = 0, D_target = 0;
};

inline JobConfig parse_config(const std::string& text) {
  const Json j = parse_json_text(text);
  if (!j.is_object()) throw ParseError("$: configuration must be an object");
  static const std::set<std::string> known = {"p",     "gL",    "gK",     "prec",      "D",        "N",
                                              "seed",  "fL",    "fK",     "command",   "input",    "output",
                                              "alpha", "scalar", "s0",    "kind",      "direction", "N_target",
                                              "D_target"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw ParseError("$." + it.key() + ": unknown key");
  JobConfig cfg;
  ContextSpec& c = cfg.context;
  if (!j.contains("p")) throw ParseError("$.p: required");
  c.p = io_detail::small_int(j["p"], "$.p");
  if (j.contains("gL")) c.g_L = io_detail::int_list(j["gL"], "$.gL");
  if (j.contains("gK")) {
    if (!j["gK"].is_array()) throw ParseError("$.gK: expected a list of coefficient lists");
    for (size_t i = 0; i < j["gK"].size(); ++i) c.g_K.push_back(io_detail::int_list(j["gK"][i], "$.gK[" + std::to_string(i) + "]"));
  }
  auto positive = [&](const char* key, int& out) {
    if (!j.contains(key)) return;
    out = io_detail::small_int(j[key], std::string("$.") + key);
    if (out < 1) throw ParseError(std::string("$.") + key + ": must be positive");
  };
  positive("D", c.D);
  positive("N", c.N);
  if (j.contains("prec")) {
    c.prec = io_detail::small_int(j["prec"], "$.prec");
    if (c.prec < 0) throw ParseError("$.prec: must be nonnegative (0 = derived from D and N)");
  }
  for (const char* key : {"fL", "fK"}) {
    if (!j.contains(key)) continue;
    const Json& f = j[key];
    if (!f.is_array()) throw ParseError(std::string("$.") + key + ": expected a coefficient list");
    CoefficientList list;
    for (size_t i = 0; i < f.size(); ++i) {
      const std::string path = std::string("$.") + key + "[" + std::to_string(i) + "]";
      list.push_back(f[i].is_array() ? io_detail::int_list(f[i], path) : std::vector<Int>{io_detail::int_from_json(f[i], path)});
    }
    (std::string(key) == "fL" ? c.f_L : c.f_K) = list;
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ParseError("$.seed: expected a nonnegative integer");
    cfg.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("command")) {
    const Json& cmd = j["command"];
    if (cmd.is_string())
      cfg.command = {cmd.get<std::string>()};
    else if (cmd.is_array()) {
      for (size_t i = 0; i < cmd.size(); ++i) {
        if (!cmd[i].is_string()) throw ParseError("$.command[" + std::to_string(i) + "]: expected a string");
        cfg.command.push_back(cmd[i].get<std::string>());
      }
    } else
      throw ParseError("$.command: expected a string or a list of strings");
  }
  auto str = [&](const char* key, std::string& out) {
    if (!j.contains(key)) return;
    if (!j[key].is_string()) throw ParseError(std::string("$.") + key + ": expected a string");
    out = j[key].get<std::string>();
  };
  str("input", cfg.input);
  str("output", cfg.output);
  str("kind", cfg.kind);
  str("direction", cfg.direction);
  positive("N_target", cfg.N_target);
  if (j.contains("D_target")) {
    cfg.D_target = io_detail::small_int(j["D_target"], "$.D_target");
    if (cfg.D_target < 0) throw ParseError("$.D_target: must be nonnegative");
  }
  if (j.contains("alpha")) cfg.alpha = j["alpha"];
  if (j.contains("scalar")) cfg.scalar = j["scalar"];
  if (j.contains("s0")) cfg.s0 = j["s0"];
  return cfg;
}

/// A scalar given as an integer, a coordinate list in O_K, an element
/// object {c, prec}, or one of "pi_K", "pi_L", "pi_K^n", "pi_L^n".
inline RingElement scalar_from_json(const Context& ctx, const Json& j, const std::string& path) {
  const Ring& R = ctx.ring();
  if (j.is_number_integer() || (j.is_string() && !j.get<std::string>().empty() && j.get<std::string>()[0] != 'p'))
    return R.from_int(io_detail::int_from_json(j, path));
  if (j.is_string()) {
    static const std::regex re(R"(pi_(K|L)(\^([0-9]+))?)");
    std::smatch m;
    const std::string s = j.get<std::string>();
    if (!std::regex_match(s, m, re)) throw ParseError(path + ": expected pi_K, pi_L, pi_K^n or pi_L^n");
    const RingElement& base = m[1] == "K" ? ctx.tower().pi_K : ctx.tower().pi_L;
    const unsigned long e = m[3].matched ? std::stoul(m[3].str()) : 1;
    return base.pow(e);
  }
  if (j.is_array()) {
    std::vector<Int> c = io_detail::int_list(j, path);
    if (static_cast<int>(c.size()) > R.dim()) throw ParseError(path + ": too many coordinates for O_K");
    c.resize(static_cast<size_t>(R.dim()));
    return R.from_coords(std::move(c));
  }
  if (j.is_object()) return element_from_json(R, j, path);
  throw ParseError(path + ": expected a scalar");
}

/// An eigenvalue: a scalar, or a serialized series for α(x).
inline Eigenvalue eigenvalue_from_json(const Context& ctx, const Json& j, const std::string& path) {
  if (j.is_object() && j.contains("format")) return series_from_json(ctx.ring(), j);
  return scalar_from_json(ctx, j, path);
}

/// Tower invariants echoed in reports.
inline Json describe(const Context& ctx) {
  const TowerSpec& t = ctx.tower();
  return Json{{"p", t.p},
              {"e_L", t.e_L},
              {"e_KL", t.e_KL},
              {"f_KL", t.f_KL},
              {"q_L", io_detail::int_to_json(t.q_L)},
              {"q_K", io_detail::int_to_json(t.q_K)},
              {"prec", ctx.ring().cap()},
              {"D", ctx.D()},
              {"N", ctx.N()}};
}

}  // namespace ltc
