#pragma once

// Modules 𝒜^α, 𝒟, ℰ^α, 𝒞 and the maps between them: φ^α, the series k and
// w, ρ_α and its inverse, the operator T, the root-sum criterion and the
// lifting into 𝒜^α, twists, and the composite 𝒜^α -> 𝒞.

#include <climits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ltc/context.hpp"

namespace ltc {

enum class Verdict { Pass, Fail, Indeterminate };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    default: return "indeterminate";
  }
}

struct MembershipReport {
  Verdict verdict = Verdict::Indeterminate;
  int checked_precision = 0;
  int checked_degree = -1;
  std::optional<int> witness;  // first degree where the defining equation fails
  std::string note;
};

/// Verdict on "s ≡ 0 mod π_K^N": fail at the first coefficient known to be
/// nonzero mod π_K^N; otherwise pass when every coefficient up to
/// `min_degree` is known to N digits, indeterminate if not.
inline MembershipReport zero_report(const Series& s, int N, int min_degree) {
  MembershipReport r;
  r.checked_precision = N;
  bool contiguous = true;
  for (int n = 0; n <= s.cap(); ++n) {
    const RingElement& c = s[n];
    if (!c.is_zero() && c.val() < N) {
      r.verdict = Verdict::Fail;
      r.witness = n;
      r.checked_degree = n;
      return r;
    }
    if (contiguous && c.prec() >= N)
      r.checked_degree = n;
    else
      contiguous = false;
  }
  r.verdict = r.checked_degree >= min_degree ? Verdict::Pass : Verdict::Indeterminate;
  if (r.verdict == Verdict::Indeterminate)
    r.note = "precision budget supports the congruence only up to degree " + std::to_string(r.checked_degree);
  return r;
}

/// Smallest valuation among coefficients known to be nonzero in degrees
/// 0..D (INT_MAX if none), and the smallest precision among those known
/// only to be zero.
struct ValuationProfile {
  int nonzero = INT_MAX;
  int zero_prec = INT_MAX;
  int floor() const { return std::min(nonzero, zero_prec); }
};
inline ValuationProfile valuation_profile(const Series& s, int D) {
  ValuationProfile v;
  for (int n = 0; n <= std::min(D, s.cap()); ++n) {
    const RingElement& c = s[n];
    if (c.is_zero())
      v.zero_prec = std::min(v.zero_prec, c.prec());
    else
      v.nonzero = std::min(v.nonzero, c.val());
  }
  return v;
}

/// An eigenvalue: a constant or a series α(x).
using Eigenvalue = std::variant<RingElement, Series>;

enum class ModuleKind { A, D, E, C };

inline const char* to_string(ModuleKind k) {
  switch (k) {
    case ModuleKind::A: return "A";
    case ModuleKind::D: return "D";
    case ModuleKind::E: return "E";
    default: return "C";
  }
}

namespace detail {

inline void require_constant_divisible(const Series& r, const char* what) {
  if (r[0].val() < 1) throw PreconditionError(std::string(what) + ": constant term must be divisible by pi_K");
}

/// α as an element of O_L (embedded in O_K); throws if it is not in O_L.
inline RingElement alpha_in_L(const Context& ctx, const RingElement& a) {
  const RingElement x = ctx.ring().embed(a);
  try {
    (void)ctx.ring().restrict_to(x, ctx.ring_L());
  } catch (const ConsistencyError&) {
    throw PreconditionError("alpha must lie in O_L");
  }
  return x;
}

/// [a]_L(g), using f_L itself for a = π_L with the standard polynomial.
inline Series apply_endo_L(const Context& ctx, const RingElement& a, const Series& g) {
  const Ring& R = ctx.ring();
  const int D = g.cap();
  if (a.is_zero() && a.prec() >= R.cap()) return Series(R, D);
  if ((a - R.one()).is_zero() && a.prec() >= R.cap()) return g;
  if (ctx.standard_L() && (a - ctx.tower().pi_L).is_zero() && a.prec() >= R.cap())
    return compose(resized(ctx.GL().f(), D), g);
  return compose(ctx.GL().endomorphism(a, D), g);
}

}  // namespace detail

/// T(f) = Σ^{F_L}_z f(x ⊕_K z) ⊖_L [α]_L(f([π_K](x))); T(f) = 0 exactly for f in 𝒜^α.
inline Series t_operator(const Series& f, const RingElement& alpha, const Context& ctx) {
  detail::require_constant_divisible(f, "T operator");
  const RingElement a = detail::alpha_in_L(ctx, alpha);
  const int D = f.cap();
  Series lhs = lt_root_sum(ctx.GL(), ctx.algebra(), f);
  Series rhs = detail::apply_endo_L(ctx, a, compose(f, ctx.sigma(D)));
  return ctx.GL().sub(lhs, rhs);
}

/// φ^α(r) = [q_K/α]_L(r) ⊖_L r([π_K](x)); requires α | q_K/π_L in O_L.
inline Series phi_alpha(const Series& r, const RingElement& alpha, const Context& ctx) {
  detail::require_constant_divisible(r, "phi");
  const RingElement a = detail::alpha_in_L(ctx, alpha);
  const TowerSpec& t = ctx.tower();
  const RingElement qK = ctx.ring().from_int(t.q_K.get_si());
  if (a.is_zero() || a.val() > qK.val() - t.pi_L.val())
    throw PreconditionError("phi: alpha must divide q_K/pi_L in O_L");
  const RingElement c = divide_exact(qK, a);
  return ctx.GL().sub(detail::apply_endo_L(ctx, c, r), compose(r, ctx.sigma(r.cap())));
}

struct MembershipOptions {
  int N = 0;                // 0: the context's N
  int min_degree = 0;       // pass requires verification through this degree
  bool pi_L_divisible = false;  // the π_L-restricted submodule
  int max_degree = -1;      // >= 0: only degrees 0..max_degree are examined
};

/// Membership of r in 𝒜^α (T(r) = 0), 𝒟 (root sum 0), ℰ^α (ℒ(r) = α r)
/// or 𝒞 (ℒ(r) = 0), decided at the precision the budget supports.
inline MembershipReport check_membership(ModuleKind kind, const Series& r, const Eigenvalue& alpha, const Context& ctx,
                                         MembershipOptions opt = {}) {
  const int N = opt.N > 0 ? opt.N : ctx.N();
  if ((kind == ModuleKind::A || kind == ModuleKind::D) && r[0].val() < 1)
    throw PreconditionError(std::string("membership in ") + to_string(kind) + ": constant term must be divisible by pi_K");
  if (opt.pi_L_divisible) {
    const int e = ctx.tower().e_KL;
    const int top = opt.max_degree >= 0 ? std::min(opt.max_degree, r.cap()) : r.cap();
    for (int n = 0; n <= top; ++n)
      if (!r[n].is_zero() && r[n].val() < e) {
        MembershipReport rep;
        rep.verdict = Verdict::Fail;
        rep.checked_precision = N;
        rep.checked_degree = n;
        rep.witness = n;
        rep.note = "coefficient of x^" + std::to_string(n) + " is not divisible by pi_L";
        return rep;
      }
  }
  Series diff;
  switch (kind) {
    case ModuleKind::A: {
      if (!std::holds_alternative<RingElement>(alpha)) throw PreconditionError("membership in A needs a constant alpha");
      diff = t_operator(r, std::get<RingElement>(alpha), ctx);
      break;
    }
    case ModuleKind::D:
      diff = lt_root_sum(ctx.GL(), ctx.algebra(), r);
      break;
    case ModuleKind::E: {
      Series l = trace_operator(ctx.algebra(), r);
      if (std::holds_alternative<RingElement>(alpha))
        diff = l - std::get<RingElement>(alpha) * r;
      else
        diff = l - resized(std::get<Series>(alpha), r.cap()) * r;
      break;
    }
    case ModuleKind::C:
      diff = trace_operator(ctx.algebra(), r);
      break;
  }
  if (opt.max_degree >= 0 && opt.max_degree < diff.cap()) diff = diff.truncated(opt.max_degree);
  return zero_report(diff, N, opt.min_degree);
}

// ---------------------------------------------------------------------------

/// k = -x^{q-1}/(q-1) and w = ℒ(k)/π_K for the standard f_K, with the
/// substituted series 1/w([π_K](x)) cached.
struct KWPair {
  Series k, w, inv_w_sigma;
  const Context* ctx = nullptr;
  int D = 0;
};

inline KWPair build_k_w(const Context& ctx, int D = 0) {
  if (!ctx.standard_K())
    throw PreconditionError("k and w are only available for f_K = pi_K x + x^q (unsupported form)");
  if (D <= 0) D = ctx.D();
  const Ring& R = ctx.ring();
  const int q = ctx.q_K();
  const TorsionAlgebra& A = ctx.algebra();
  KWPair kw;
  kw.ctx = &ctx;
  kw.D = D;
  kw.k = Series(R, D);
  const RingElement inv = R.unit_inverse(R.from_int(q - 1));
  if (q - 1 <= D) kw.k[q - 1] = -inv;
  RingElement ku = A.evaluate(kw.k, A.u0()) - A.ring().embed(ctx.tower().pi_K * inv);
  if (!ku.is_zero() || ku.prec() < A.ring().cap() / 2)
    throw ConsistencyError("k(u0) differs from pi_K/(q-1) in the torsion algebra");
  Series l = trace_operator(A, kw.k);
  kw.w = Series(R, D, l.tail());
  for (int n = 0; n <= D; ++n) {
    try {
      kw.w[n] = exact_div_pi(l[n], 1);
    } catch (const DivisibilityError&) {
      throw ConsistencyError("L(k) is not divisible by pi_K at degree " + std::to_string(n));
    }
  }
  if (!(l - ctx.tower().pi_K * kw.w).is_zero()) throw ConsistencyError("L(k) differs from pi_K w");
  if (!kw.w[0].is_unit()) throw ConsistencyError("w(0) is not a unit");
  kw.inv_w_sigma = series_inverse(compose(kw.w, ctx.sigma(D)));
  return kw;
}

/// ρ_α(g) = g - α([π_K]x)·k·g([π_K]x) / (π_K·w([π_K]x)).
inline Series rho(const Series& g_in, const Eigenvalue& alpha, const KWPair& kw) {
  const Context& ctx = *kw.ctx;
  const int D = kw.D;
  const Series g = resized(g_in, D);
  const Series sig = ctx.sigma(D);
  Series core = kw.k * compose(g, sig) * kw.inv_w_sigma;
  Series corr;
  if (std::holds_alternative<RingElement>(alpha)) {
    const RingElement& a = std::get<RingElement>(alpha);
    if (a.is_zero() && a.prec() >= ctx.ring().cap()) return g;
    if (a.val() < 1) throw PreconditionError("rho: alpha must be divisible by pi_K");
    corr = exact_div_pi(a, 1) * core;
  } else {
    const Series& as = std::get<Series>(alpha);
    for (int n = 0; n <= as.cap(); ++n)
      if (as[n].val() < 1) throw PreconditionError("rho: alpha(x) must be divisible by pi_K");
    Series prod = compose(resized(as, D), sig) * core;
    corr = Series(ctx.ring(), D, prod.tail());
    for (int n = 0; n <= D; ++n) {
      try {
        corr[n] = exact_div_pi(prod[n], 1);
      } catch (const DivisibilityError&) {
        throw DivisibilityError("rho: correction term not divisible by pi_K at degree " + std::to_string(n), n);
      }
    }
  }
  return g - corr;
}

struct RhoInverseResult {
  Series g;
  int iterations = 0;
  int achieved_precision = 0;  // ρ(g) ≡ h mod π_K^this
};

/// g with ρ_α(g) = h, by g_1 = h, g_{i+1} = h - ρ(g_1 + ... + g_i). Each step
/// must raise the valuation of the increment; at most N_target + 4 steps.
inline RhoInverseResult rho_inverse(const Series& h_in, const Eigenvalue& alpha, const KWPair& kw, int N_target) {
  const Context& ctx = *kw.ctx;
  if (std::holds_alternative<RingElement>(alpha)) {
    const RingElement& a = std::get<RingElement>(alpha);
    if (!(a.is_zero() && a.prec() >= ctx.ring().cap()) && a.val() < 2)
      throw ConvergenceError("rho inverse: the iteration needs |alpha/pi_K| < 1");
  } else {
    const Series& as = std::get<Series>(alpha);
    for (int n = 0; n <= as.cap(); ++n)
      if (as[n].val() < 2) throw ConvergenceError("rho inverse: the iteration needs pi_K^2 | alpha(x)");
  }
  const Series h = resized(h_in, kw.D);
  RhoInverseResult out;
  out.g = Series(ctx.ring(), kw.D);
  Series inc = h;
  int prev = -1;
  for (int it = 0; it <= N_target + 4; ++it) {
    const ValuationProfile v = valuation_profile(inc, kw.D);
    if (v.nonzero >= N_target) {
      out.iterations = it;
      out.achieved_precision = std::min(N_target, v.floor());
      if (it == 0) out.g = h;  // h ≡ 0: nothing to invert
      return out;
    }
    if (v.nonzero <= prev)
      throw ConvergenceError("rho inverse: no valuation gain at step " + std::to_string(it) +
                             " (requires |alpha/pi_K| < 1 or pi_K^2 | alpha(x))");
    prev = v.nonzero;
    out.g += inc;
    inc = h - rho(out.g, alpha, kw);
  }
  throw ConvergenceError("rho inverse: iteration cap reached before pi_K^" + std::to_string(N_target));
}

// ---------------------------------------------------------------------------

/// Validate the standing hypotheses of the root-sum criterion; every
/// violated assumption is listed.
inline void validate_criterion_hypotheses(const Series& s, const RingElement& alpha, const Context& ctx) {
  const TowerSpec& t = ctx.tower();
  std::vector<std::string> bad;
  if (!ctx.standard_L()) bad.push_back("f_L is not pi_L x + x^q_L");
  if (!ctx.standard_K()) bad.push_back("f_K is not pi_K x + x^q_K");
  if (ctx.q_L() < 3) bad.push_back("q_L < 3");
  if (t.pi_L.val() < 2) bad.push_back("pi_K^2 does not divide pi_L");
  const RingElement a = ctx.ring().embed(alpha);
  RingElement expected = ctx.ring().from_int(t.q_K.get_si());
  bool alpha_ok = true;
  for (int i = 0; i < t.f_KL && alpha_ok; ++i) {
    try {
      expected = divide_exact(expected, t.pi_L);
    } catch (const DivisibilityError&) {
      alpha_ok = false;
    }
  }
  if (!alpha_ok || !(a - expected).is_zero()) bad.push_back("alpha is not q_K/pi_L^f(K/L)");
  if (a.is_zero() ? a.prec() < t.pi_L.val() : a.val() < t.pi_L.val()) bad.push_back("pi_L does not divide alpha");
  if (s[0].val() < 1) bad.push_back("pi_K does not divide s(0)");
  if (!bad.empty()) {
    std::string msg = "criterion hypotheses violated:";
    for (const auto& b : bad) msg += " [" + b + "]";
    throw PreconditionError(msg);
  }
}

/// Σ^{F_L}_z s(x ⊕ z) ≡ [α]_L(s([π_K](x))) mod π_K^2.
inline MembershipReport criterion_root_sum(const Series& s, const RingElement& alpha, const Context& ctx,
                                           int min_degree = 0) {
  validate_criterion_hypotheses(s, alpha, ctx);
  const int D = s.cap();
  Series lhs = lt_root_sum(ctx.GL(), ctx.algebra(), s);
  Series rhs = detail::apply_endo_L(ctx, ctx.ring().embed(alpha), compose(s, ctx.sigma(D)));
  return zero_report(lhs - rhs, 2, min_degree);
}

struct LiftResult {
  Series r;
  int stages = 0;
  Achieved achieved;                    // T(r) ≡ 0 mod π_K^N' through degree D'
  std::vector<int> stage_valuations;    // valuation of T(current) per stage
};

/// A series r ≡ s mod π_K with T(r) ≡ 0 mod π_K^{N_target} through degree
/// D_target: r = s ⊖ (t_1 ⊕ ... ⊕ t_n), where ℒ(t_{n+1}) is T(current)
/// de-substituted through [π_K] and t_{n+1} is divisible by π_K^{n+1}.
inline LiftResult lift_to_A(const Series& s, const RingElement& alpha, const Context& ctx, int N_target, int D_target) {
  MembershipReport crit = criterion_root_sum(s, alpha, ctx);
  if (crit.verdict != Verdict::Pass)
    throw PreconditionError(std::string("lift: the root-sum criterion does not pass (") + to_string(crit.verdict) + ")");
  const Ring& R = ctx.ring();
  const int D = s.cap();
  const int q = ctx.q_K();
  D_target = std::min(D_target, D);
  const TraceMatrix& M = ctx.trace_matrix(D_target, q * (D_target + 1));
  const Series sig = ctx.sigma(D_target);
  LiftResult out;
  Series current = s;
  std::optional<Series> tsum;
  int prev = 1;
  for (int n = 0; n <= N_target + 4; ++n) {
    const Series Tc = t_operator(current, alpha, ctx);
    const ValuationProfile v = valuation_profile(Tc, D_target);
    out.stage_valuations.push_back(std::min(v.nonzero, N_target));
    if (v.nonzero >= N_target) {
      if (v.zero_prec < N_target)
        throw BudgetError("lift: T(r) is known only to pi_K^" + std::to_string(v.zero_prec) + " through degree " +
                          std::to_string(D_target) + "; increase the degree cap or precision");
      out.r = current;
      out.stages = n;
      out.achieved = {D_target, N_target};
      return out;
    }
    if (v.nonzero <= prev)
      throw ConvergenceError("lift: stage " + std::to_string(n) + " did not raise the valuation of T (found " +
                             std::to_string(v.nonzero) + ")");
    prev = v.nonzero;
    Series sn;
    try {
      sn = desubstitute(Tc.truncated(D_target), sig);
    } catch (const DivisibilityError& e) {
      throw ConsistencyError("lift: stage " + std::to_string(n) + " de-substitution failed: " + e.what());
    }
    const ValuationProfile vs = valuation_profile(sn, D_target);
    if (vs.nonzero == INT_MAX)
      throw BudgetError("lift: stage " + std::to_string(n) + " has no correction left at the working precision");
    if (vs.nonzero < 2)
      throw ConsistencyError("lift: stage " + std::to_string(n) + " series is not divisible by pi_K^2");
    // t = π^e t' with ℒ(t') = s_n / π^e, e = v(s_n) - 1
    const int e = vs.nonzero - 1;
    Series scaled(R, D_target, Tail::Unknown);
    int known = -1;
    for (int k = 0; k <= D_target; ++k) {
      scaled[k] = exact_div_pi(sn[k], std::min(e, sn[k].prec()));
      if (known == k - 1 && scaled[k].prec() >= 1) known = k;
    }
    if (known < 0) throw BudgetError("lift: stage " + std::to_string(n) + " series is not known modulo pi_K");
    PreimageResult pre;
    try {
      pre = trace_preimage(M, scaled.truncated(known), N_target);
    } catch (const Error& ex) {
      throw BudgetError("lift: stage " + std::to_string(n) + " preimage failed: " + ex.what());
    }
    Series t = R.uniformizer().pow(static_cast<unsigned long>(e)) * resized(pre.t, D);
    tsum = tsum ? ctx.GL().add(*tsum, t) : t;
    current = ctx.GL().sub(s, *tsum);
  }
  throw ConvergenceError("lift: stage cap reached before pi_K^" + std::to_string(N_target));
}

/// s(x) = s0(x^{q_K}) at degree cap D (a warning if s0 is cut).
inline Series twist_candidate(const Series& s0, const Context& ctx, int D = 0) {
  const TowerSpec& t = ctx.tower();
  if (t.e_KL < 2) throw PreconditionError("twist: K/L must be ramified");
  if (t.e_K() < 2) throw PreconditionError("twist: pi_K^2 must divide p");
  if (D <= 0) D = ctx.D();
  const int q = ctx.q_K();
  Series s(ctx.ring(), D, s0.tail());
  bool cut = false;
  for (int n = 0; n <= s0.cap(); ++n) {
    if (static_cast<long>(n) * q <= D)
      s[n * q] = s0[n];
    else if (!s0[n].is_zero())
      cut = true;
  }
  if (cut) {
    s.set_tail(Tail::Unknown);
    detail::warn("twist: s0 has degree above D/q_K; the twist is truncated at degree " + std::to_string(D));
  }
  return s;
}

/// Least m with [π_L]^m(π_K O_K[[x]]) ⊆ π_L O_K[[x]], from the growth
/// bound v -> min(e(K/L) + v, q_L v) starting at v = 1.
inline int power_exponent(const Context& ctx) {
  const int e = ctx.tower().e_KL;
  const int q = ctx.q_L();
  int v = 1, m = 0;
  while (v < e) {
    v = std::min(e + v, q * v);
    ++m;
  }
  return m;
}

/// log_L([π_L^m](φ^α(r))) for r in 𝒜^α, m = power_exponent.
inline Series map_A_to_C(const Series& r, const RingElement& alpha, const Context& ctx, MembershipOptions opt = {}) {
  opt.pi_L_divisible = false;
  MembershipReport rep = check_membership(ModuleKind::A, r, alpha, ctx, opt);
  if (rep.verdict == Verdict::Fail) throw PreconditionError("map A->C: input is not in A (fails at degree " + std::to_string(*rep.witness) + ")");
  Series x = phi_alpha(r, alpha, ctx);
  const int m = power_exponent(ctx);
  for (int i = 0; i < m; ++i) x = detail::apply_endo_L(ctx, ctx.tower().pi_L, x);
  return ctx.GL().transport_log(x);
}

enum class TransportDirection { AtoE, EtoA, DtoC, CtoD };

struct TransportResult {
  Series out;
  MembershipReport source, target;
};

/// log_L / exp_L between the π_L-divisible parts of 𝒜^α and ℰ^α, or of 𝒟 and 𝒞.
inline TransportResult log_transport_iso(const Series& r, TransportDirection dir, const Eigenvalue& alpha,
                                         const Context& ctx, MembershipOptions opt = {}) {
  static const ModuleKind src[] = {ModuleKind::A, ModuleKind::E, ModuleKind::D, ModuleKind::C};
  static const ModuleKind dst[] = {ModuleKind::E, ModuleKind::A, ModuleKind::C, ModuleKind::D};
  const int i = static_cast<int>(dir);
  opt.pi_L_divisible = true;
  TransportResult res;
  res.source = check_membership(src[i], r, alpha, ctx, opt);
  if (res.source.verdict == Verdict::Fail)
    throw PreconditionError(std::string("transport: input is not in ") + to_string(src[i]));
  const bool use_log = dir == TransportDirection::AtoE || dir == TransportDirection::DtoC;
  res.out = use_log ? ctx.GL().transport_log(r) : ctx.GL().transport_exp(r);
  res.target = check_membership(dst[i], res.out, alpha, ctx, opt);
  return res;
}

}  // namespace ltc
