// ltc: command-line front end for Lubin-Tate formal groups, the trace
// operator and the eigenspace maps.
//
// Exit status: 0 pass, 1 a mathematical check failed, 2 budget, precondition
// or input error.

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "acceptance_suite.hpp"
#include "ltc/io.hpp"

namespace {

using namespace ltc;

enum Exit { kPass = 0, kMathFail = 1, kBudget = 2 };

struct Job {
  JobConfig cfg;
  std::string preset;
  std::string level = "K";
  int min_degree = 0;
  int max_degree = -1;
  bool timings = false;
  bool verbose = false;
  bool pretty = false;
  std::optional<int> D, N, prec;
  std::optional<std::string> alpha_text, scalar_text;
};

std::string read_text(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ContextSpec preset_spec(const std::string& name) {
  ContextSpec s;
  s.p = 3;
  if (name == "C1" || name.empty()) return s;
  if (name == "C3") {
    s.g_L = {-3, 0, 1};
    s.g_K = {{0, -1}, {0}, {1}};
    return s;
  }
  throw ParseError("--preset: expected C1 or C3");
}

/// The unwrapped artifact of an input file: a result envelope yields its output.
Json read_artifact(const std::string& path) {
  if (path.empty()) throw PreconditionError("this command needs --input");
  Json j = parse_json_text(read_text(path));
  if (j.is_object() && j.value("format", "") == "ltc-result") {
    if (!j.contains("output")) throw ParseError("$.output: missing in result file");
    return j["output"];
  }
  return j;
}

/// Series in an artifact; a kernel file also states where its vectors were verified.
std::vector<Series> read_series_list(const Context& ctx, const std::string& path, std::optional<Achieved>* bound = nullptr) {
  Json j = read_artifact(path);
  if (j.is_object() && j.value("format", "") == "ltc-kernel") {
    io_detail::check_header(j, "ltc-kernel");
    if (!j.contains("basis") || !j["basis"].is_array()) throw ParseError("$.basis: expected a list of series");
    std::vector<Series> out;
    for (const auto& b : j["basis"]) out.push_back(series_from_json(ctx.ring(), b));
    if (bound && j.contains("achieved")) {
      const Json& a = j["achieved"];
      *bound = Achieved{io_detail::small_int(a.value("degree", Json(-1)), "$.achieved.degree"),
                        io_detail::small_int(a.value("precision", Json(0)), "$.achieved.precision")};
    }
    return out;
  }
  return {series_from_json(ctx.ring(), j)};
}

Series read_series(const Context& ctx, const std::string& path) {
  auto v = read_series_list(ctx, path);
  if (v.size() != 1) throw PreconditionError("expected a single series in " + path);
  return v.front();
}

Eigenvalue require_alpha(const Job& job, const Context& ctx) {
  if (!job.cfg.alpha) throw PreconditionError("this command needs --alpha");
  return eigenvalue_from_json(ctx, *job.cfg.alpha, "alpha");
}

RingElement require_scalar_alpha(const Job& job, const Context& ctx) {
  Eigenvalue a = require_alpha(job, ctx);
  if (!std::holds_alternative<RingElement>(a)) throw PreconditionError("this command needs a constant --alpha");
  return std::get<RingElement>(a);
}

int min_prec(const Series& s, int upto = -1) {
  int m = INT_MAX;
  for (int n = 0; n <= (upto < 0 ? s.cap() : std::min(upto, s.cap())); ++n) m = std::min(m, s[n].prec());
  return m;
}

Json achieved(int degree, int precision) { return Json{{"degree", degree}, {"precision", precision}}; }

Json frac_series_json(const FracSeries& f) {
  Json coeffs = Json::array();
  for (const auto& c : f.c) coeffs.push_back(Json{{"num", to_json(c.num)}, {"shift", c.shift}});
  return Json{{"format", "ltc-frac-series"}, {"version", kFormatVersion}, {"coeffs", coeffs}};
}

struct Outcome {
  Json output;
  Json extra = Json::object();
  Json achieved;
  int status = kPass;
};

const FormalGroup& group(const Job& job, const Context& ctx) {
  if (job.level == "K") return ctx.GK();
  if (job.level == "L") return ctx.GL();
  throw ParseError("--level: expected L or K");
}

Outcome run_fgl(const std::string& sub, const Job& job, const Context& ctx) {
  const FormalGroup& G = group(job, ctx);
  Outcome o;
  if (sub == "build") {
    const BiSeries& F = G.law();
    int m = INT_MAX;
    for (int n = 0; n <= F.cap(); ++n)
      for (int j = 0; j <= n; ++j) m = std::min(m, F.at(n - j, j).prec());
    o.output = to_json(F);
    o.achieved = achieved(F.cap(), m);
  } else if (sub == "endo") {
    if (!job.cfg.scalar) throw PreconditionError("fgl endo needs --scalar");
    const Series e = G.endomorphism(scalar_from_json(ctx, *job.cfg.scalar, "scalar"), ctx.D());
    o.output = to_json(e);
    o.achieved = achieved(e.cap(), min_prec(e));
  } else if (sub == "inverse") {
    const Series e = G.inverse(ctx.D());
    o.output = to_json(e);
    o.achieved = achieved(e.cap(), min_prec(e));
  } else if (sub == "log" || sub == "exp") {
    if (job.cfg.input.empty()) {
      const FracSeries& f = sub == "log" ? G.log_exp().log : G.log_exp().exp;
      o.output = frac_series_json(f);
      int m = INT_MAX;
      for (const auto& c : f.c) m = std::min(m, c.prec());
      o.achieved = achieved(f.cap(), m);
    } else {
      const Series h = read_series(ctx, job.cfg.input);
      const Series r = sub == "log" ? G.transport_log(h) : G.transport_exp(h);
      o.output = to_json(r);
      o.achieved = achieved(r.cap(), min_prec(r));
    }
  } else {
    throw ParseError("fgl: unknown operation " + sub);
  }
  return o;
}

Outcome run_trace(const std::string& sub, const Job& job, const Context& ctx) {
  Outcome o;
  const int q = ctx.q_K();
  if (sub == "apply") {
    const Series s = read_series(ctx, job.cfg.input);
    const Series l = trace_operator(ctx.algebra(), s);
    o.output = to_json(l);
    o.achieved = achieved(l.cap(), min_prec(l));
  } else if (sub == "preimage") {
    const Series s = read_series(ctx, job.cfg.input);
    const int rows = job.cfg.D_target > 0 ? std::min(job.cfg.D_target, s.cap()) : std::min(s.cap(), 10);
    const PreimageResult pr = trace_preimage(ctx.trace_matrix(rows, q * (rows + 1)), s, ctx.N());
    o.output = to_json(pr.t);
    o.achieved = achieved(pr.achieved.degree, pr.achieved.precision);
  } else if (sub == "kernel") {
    const int rows = job.cfg.D_target > 0 ? job.cfg.D_target : 8;
    std::optional<RingElement> a;
    if (job.cfg.alpha) a = require_scalar_alpha(job, ctx);
    const KernelResult k = kernel_basis(ctx.trace_matrix(rows, q * (rows + 1)), ctx.N(), a);
    Json basis = Json::array();
    for (const auto& b : k.basis) basis.push_back(to_json(b));
    o.output = Json{{"format", "ltc-kernel"},
                    {"version", kFormatVersion},
                    {"achieved", achieved(k.achieved.degree, k.achieved.precision)},
                    {"basis", basis}};
    o.extra["dimension"] = k.basis.size();
    o.achieved = achieved(k.achieved.degree, k.achieved.precision);
  } else {
    throw ParseError("trace: unknown operation " + sub);
  }
  return o;
}

TransportDirection parse_direction(const std::string& d) {
  if (d == "AtoE") return TransportDirection::AtoE;
  if (d == "EtoA") return TransportDirection::EtoA;
  if (d == "DtoC") return TransportDirection::DtoC;
  if (d == "CtoD") return TransportDirection::CtoD;
  throw ParseError("direction: expected AtoE, EtoA, DtoC or CtoD");
}

int status_of(const MembershipReport& r) {
  switch (r.verdict) {
    case Verdict::Pass: return kPass;
    case Verdict::Fail: return kMathFail;
    default: return kBudget;
  }
}

MembershipOptions membership_options(const Job& job, const Context& ctx) {
  return MembershipOptions{ctx.N(), job.min_degree, false, job.max_degree};
}

Outcome run_eigen(const std::string& sub, const Job& job, const Context& ctx) {
  Outcome o;
  if (sub == "kw") {
    const KWPair kw = build_k_w(ctx);
    o.output = Json{{"k", to_json(kw.k)}, {"w", to_json(kw.w)}};
    o.achieved = achieved(kw.D, std::min(min_prec(kw.k), min_prec(kw.w)));
    return o;
  }
  const Series in = read_series(ctx, job.cfg.input);
  if (sub == "rho") {
    const Series r = rho(in, require_alpha(job, ctx), build_k_w(ctx));
    o.output = to_json(r);
    o.achieved = achieved(r.cap(), min_prec(r));
  } else if (sub == "rho-inv") {
    const int target = job.cfg.N_target > 0 ? job.cfg.N_target : ctx.N();
    const RhoInverseResult r = rho_inverse(in, require_alpha(job, ctx), build_k_w(ctx), target);
    o.output = to_json(r.g);
    o.extra["iterations"] = r.iterations;
    o.achieved = achieved(r.g.cap(), r.achieved_precision);
  } else if (sub == "phi") {
    const Series r = phi_alpha(in, require_scalar_alpha(job, ctx), ctx);
    o.output = to_json(r);
    o.achieved = achieved(r.cap(), min_prec(r));
  } else if (sub == "transport") {
    const TransportResult t =
        log_transport_iso(in, parse_direction(job.cfg.direction), require_alpha(job, ctx), ctx, membership_options(job, ctx));
    o.output = to_json(t.out);
    o.extra["source"] = to_json(t.source);
    o.extra["target"] = to_json(t.target);
    o.achieved = achieved(t.target.checked_degree, t.target.checked_precision);
    o.status = std::max(status_of(t.source), status_of(t.target));
  } else {
    throw ParseError("eigen: unknown operation " + sub);
  }
  return o;
}

ModuleKind parse_kind(const std::string& k) {
  if (k == "A") return ModuleKind::A;
  if (k == "D") return ModuleKind::D;
  if (k == "E") return ModuleKind::E;
  if (k == "C") return ModuleKind::C;
  throw ParseError("kind: expected A, D, E or C");
}

Outcome run_check(const Job& job, const Context& ctx) {
  const ModuleKind kind = parse_kind(job.cfg.kind);
  Eigenvalue alpha = ctx.ring().zero();
  if (kind == ModuleKind::A || kind == ModuleKind::E) alpha = require_alpha(job, ctx);
  Outcome o;
  o.output = Json::array();
  int degree = INT_MAX, precision = INT_MAX;
  std::optional<Achieved> bound;
  const std::vector<Series> inputs = read_series_list(ctx, job.cfg.input, &bound);
  MembershipOptions opt = membership_options(job, ctx);
  if (bound && opt.max_degree < 0) {
    opt.max_degree = bound->degree;
    opt.N = std::min(opt.N, bound->precision);
  }
  for (const Series& s : inputs) {
    const MembershipReport r = check_membership(kind, s, alpha, ctx, opt);
    o.output.push_back(to_json(r));
    o.status = std::max(o.status, status_of(r));
    degree = std::min(degree, r.checked_degree);
    precision = std::min(precision, r.checked_precision);
  }
  o.achieved = achieved(degree == INT_MAX ? -1 : degree, precision == INT_MAX ? 0 : precision);
  return o;
}

Outcome run_lift(const Job& job, const Context& ctx) {
  const Series s = read_series(ctx, job.cfg.input);
  const int N_target = job.cfg.N_target > 0 ? job.cfg.N_target : 10;
  const int D_target = job.cfg.D_target > 0 ? job.cfg.D_target : 6;
  const LiftResult lr = lift_to_A(s, require_scalar_alpha(job, ctx), ctx, N_target, D_target);
  Outcome o;
  o.output = to_json(lr.r);
  o.extra["stages"] = lr.stages;
  o.extra["stage_valuations"] = lr.stage_valuations;
  o.achieved = achieved(lr.achieved.degree, lr.achieved.precision);
  return o;
}

Outcome run_suite(const std::string& sub, const Job& job) {
  if (sub != "acceptance") throw ParseError("suite: unknown suite " + sub);
  acceptance::Options opt;
  opt.seed = job.cfg.seed ? job.cfg.seed : opt.seed;
  if (job.D) opt.D = *job.D;
  if (job.N) opt.N = *job.N;
  acceptance::Suite suite(opt);
  Outcome o;
  o.output = Json::array();
  for (const auto& r : suite.run()) {
    Json e{{"id", r.id}, {"name", r.name}, {"result", r.pass ? "PASS" : "FAIL"}, {"detail", r.detail}};
    if (job.timings) e["seconds"] = r.seconds;
    o.output.push_back(e);
    if (!r.pass) o.status = kMathFail;
  }
  o.extra["seed"] = opt.seed;
  o.achieved = achieved(opt.D, opt.N);
  return o;
}

Outcome dispatch(const Job& job, const std::shared_ptr<Context>& ctx) {
  const auto& cmd = job.cfg.command;
  const std::string verb = cmd.empty() ? "" : cmd[0];
  const std::string sub = cmd.size() > 1 ? cmd[1] : "";
  if (verb == "fgl") return run_fgl(sub, job, *ctx);
  if (verb == "trace") return run_trace(sub, job, *ctx);
  if (verb == "eigen") return run_eigen(sub, job, *ctx);
  if (verb == "check") return run_check(job, *ctx);
  if (verb == "lift") return run_lift(job, *ctx);
  if (verb == "twist") {
    const Series s = twist_candidate(read_series(*ctx, job.cfg.input), *ctx);
    return Outcome{to_json(s), Json::object(), achieved(s.cap(), min_prec(s)), kPass};
  }
  if (verb == "map-a-to-c") {
    const Series c = map_A_to_C(read_series(*ctx, job.cfg.input), require_scalar_alpha(job, *ctx), *ctx,
                                membership_options(job, *ctx));
    return Outcome{to_json(c), Json::object(), achieved(c.cap(), min_prec(c)), kPass};
  }
  throw ParseError("no command given (expected fgl, trace, eigen, check, lift, twist, map-a-to-c or suite)");
}

int run(Job& job) {
  if (job.verbose) set_warnings(true);
  if (!job.preset.empty()) {
    const ContextSpec p = preset_spec(job.preset);
    job.cfg.context.p = p.p;
    job.cfg.context.g_L = p.g_L;
    job.cfg.context.g_K = p.g_K;
  }
  if (job.D) job.cfg.context.D = *job.D;
  if (job.N) job.cfg.context.N = *job.N;
  if (job.prec) job.cfg.context.prec = *job.prec;
  if (job.cfg.context.D < 1 || job.cfg.context.N < 1) throw ParseError("budgets D and N must be positive");
  if (job.alpha_text) job.cfg.alpha = parse_json_text(*job.alpha_text);
  if (job.scalar_text) job.cfg.scalar = parse_json_text(*job.scalar_text);

  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  std::shared_ptr<Context> ctx;
  const bool is_suite = !job.cfg.command.empty() && job.cfg.command[0] == "suite";
  if (is_suite) {
    o = run_suite(job.cfg.command.size() > 1 ? job.cfg.command[1] : "", job);
  } else {
    ctx = Context::build(job.cfg.context);
    o = dispatch(job, ctx);
  }
  Json meta{{"achieved", o.achieved}, {"exit_status", o.status}};
  if (job.timings) meta["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::string cmd;
  for (const auto& c : job.cfg.command) cmd += (cmd.empty() ? "" : " ") + c;
  Json doc{{"format", "ltc-result"}, {"version", kFormatVersion}, {"command", cmd}};
  if (ctx) doc["context"] = describe(*ctx);
  doc["output"] = o.output;
  for (auto it = o.extra.begin(); it != o.extra.end(); ++it) doc[it.key()] = it.value();
  doc["metadata"] = meta;
  const std::string text = doc.dump(job.pretty ? 2 : -1) + "\n";
  if (job.cfg.output.empty() || job.cfg.output == "-") {
    std::cout << text;
  } else {
    std::ofstream out(job.cfg.output);
    if (!out) throw PreconditionError("cannot write " + job.cfg.output);
    out << text;
  }
  return o.status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lubin-Tate formal groups, the trace operator L and the maps between its modules"};
  app.require_subcommand(0, 1);
  app.fallthrough();
  Job job;
  std::string config_path;
  app.add_option("--config", config_path, "JSON job configuration");
  app.add_option("--preset", job.preset, "reference context C1 or C3");
  app.add_option("--D", job.D, "degree budget");
  app.add_option("--N", job.N, "precision budget (pi_K digits)");
  app.add_option("--prec", job.prec, "working precision override");
  app.add_option("--input,-i", job.cfg.input, "input artifact (series, kernel or result file; - for stdin)");
  app.add_option("--output,-o", job.cfg.output, "output file (default stdout)");
  app.add_option("--alpha", job.alpha_text, "eigenvalue: integer, \"pi_L\", coordinate list or series JSON");
  app.add_option("--scalar", job.scalar_text, "endomorphism scalar");
  app.add_option("--level", job.level, "formal group level L or K")->check(CLI::IsMember({"L", "K"}));
  app.add_option("--N-target", job.cfg.N_target, "target precision for iterations");
  app.add_option("--D-target", job.cfg.D_target, "target degree for truncated solves");
  app.add_option("--min-degree", job.min_degree, "membership must be verified through this degree");
  app.add_option("--max-degree", job.max_degree, "membership examines degrees up to this one");
  app.add_option("--seed", job.cfg.seed, "seed for randomized suites");
  app.add_flag("--timings", job.timings, "include wall-clock timings (output no longer byte-reproducible)");
  app.add_flag("--pretty", job.pretty, "indent JSON output");
  app.add_flag("--verbose,-v", job.verbose, "print warnings to stderr");

  std::vector<std::string> chosen;
  auto verb_with_ops = [&](const char* name, const char* help, std::vector<std::string> ops) {
    CLI::App* v = app.add_subcommand(name, help);
    v->require_subcommand(1);
    for (const auto& op : ops) v->add_subcommand(op, op)->callback([&chosen, name, op] { chosen = {name, op}; });
  };
  verb_with_ops("fgl", "formal group law operations", {"build", "endo", "log", "exp", "inverse"});
  verb_with_ops("trace", "trace operator", {"apply", "preimage", "kernel"});
  verb_with_ops("eigen", "eigenspace maps", {"kw", "rho", "rho-inv", "phi", "transport"});
  verb_with_ops("suite", "property suites", {"acceptance"});
  CLI::App* check = app.add_subcommand("check", "module membership");
  check->add_option("--kind", job.cfg.kind, "A, D, E or C")->check(CLI::IsMember({"A", "D", "E", "C"}));
  check->callback([&] { chosen = {"check"}; });
  CLI::App* transport = app.get_subcommand("eigen")->get_subcommand("transport");
  transport->add_option("--direction", job.cfg.direction, "AtoE, EtoA, DtoC or CtoD");
  for (const char* v : {"lift", "twist", "map-a-to-c"}) {
    const std::string name = v;
    app.add_subcommand(name, name)->callback([&chosen, name] { chosen = {name}; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kBudget;
  }

  try {
    if (!config_path.empty()) {
      JobConfig base = parse_config(read_text(config_path));
      // command-line values take precedence over the file
      if (!job.cfg.input.empty()) base.input = job.cfg.input;
      if (!job.cfg.output.empty()) base.output = job.cfg.output;
      if (!job.cfg.kind.empty()) base.kind = job.cfg.kind;
      if (!job.cfg.direction.empty()) base.direction = job.cfg.direction;
      if (job.cfg.N_target > 0) base.N_target = job.cfg.N_target;
      if (job.cfg.D_target > 0) base.D_target = job.cfg.D_target;
      if (job.cfg.seed) base.seed = job.cfg.seed;
      job.cfg = base;
    }
    if (!chosen.empty()) job.cfg.command = chosen;
    return run(job);
  } catch (const ConsistencyError& e) {
    std::cerr << "ltc: check failed: " << e.what() << "\n";
    return kMathFail;
  } catch (const Error& e) {
    std::cerr << "ltc: " << e.what() << "\n";
    return kBudget;
  } catch (const std::exception& e) {
    std::cerr << "ltc: " << e.what() << "\n";
    return kBudget;
  }
}
