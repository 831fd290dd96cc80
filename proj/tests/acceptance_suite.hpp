#pragma once

// Property-based acceptance suite. Each criterion computes its expected values
// from independent oracles (rational arithmetic, Newton identities, direct
// evaluation in the torsion algebra) and reports where it was verified.

#include <chrono>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "ltc/eigenspace.hpp"

namespace ltc::acceptance {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0;
};

struct Options {
  std::uint64_t seed = 20261016;
  int D = 32;
  int N = 16;
};

namespace helpers {

/// Agreement of two series in degrees 0..upto: every difference must be zero
/// at its own precision; `precision` is the least such precision.
struct Agreement {
  bool ok = true;
  int precision = INT_MAX;
  int first_failure = -1;
};

inline Agreement agree(const Series& a, const Series& b, int upto) {
  Agreement g;
  upto = std::min({upto, a.cap(), b.cap()});
  for (int n = 0; n <= upto; ++n) {
    const RingElement d = a[n] - b[n];
    g.precision = std::min(g.precision, d.prec());
    if (!d.is_zero() && g.ok) {
      g.ok = false;
      g.first_failure = n;
    }
  }
  return g;
}

inline Agreement agree(const BiSeries& a, const BiSeries& b, int upto) {
  Agreement g;
  upto = std::min({upto, a.cap(), b.cap()});
  for (int n = 0; n <= upto; ++n)
    for (int j = 0; j <= n; ++j) {
      const RingElement d = a.at(n - j, j) - b.at(n - j, j);
      g.precision = std::min(g.precision, d.prec());
      if (!d.is_zero() && g.ok) {
        g.ok = false;
        g.first_failure = n;
      }
    }
  return g;
}

inline RingElement random_element(const Ring& R, std::mt19937_64& rng, long bound = 1000) {
  std::uniform_int_distribution<long> d(-bound, bound);
  std::vector<Int> c(static_cast<size_t>(R.dim()));
  for (auto& x : c) x = d(rng);
  return R.from_coords(std::move(c));
}

/// Polynomial with random coefficients in degrees lowest..deg, times scale.
inline Series random_poly(const Ring& R, std::mt19937_64& rng, int deg, int D, const RingElement& scale, int lowest = 0) {
  Series s(R, D);
  for (int n = lowest; n <= std::min(deg, D); ++n) s[n] = scale * random_element(R, rng);
  return s;
}

inline BiSeries scale(const RingElement& c, BiSeries b) {
  for (int n = 0; n <= b.cap(); ++n)
    for (int j = 0; j <= n; ++j) b.at(n - j, j) = c * b.at(n - j, j);
  return b;
}

/// x ∈ Q as an element of Z_p-scaled form: (unit mod p^cap, valuation).
inline FracElement rational_to_frac(const Ring& R, const mpq_class& x) {
  mpz_class num = x.get_num(), den = x.get_den();
  const mpz_class p = R.p();
  int shift = 0;
  while (den % p == 0) {
    den /= p;
    ++shift;
  }
  const Int& mod = R.p_pow(R.cap());
  mpz_class inv;
  mpz_invert(inv.get_mpz_t(), den.get_mpz_t(), mod.get_mpz_t());
  mpz_class u = (num * inv) % mod;
  return FracElement{R.from_int(Int(u)), shift};
}

/// The single unknown X of a linear equation a·X = b over Q.
inline mpq_class solve_single(const mpq_class& a, const mpq_class& b) { return b / a; }

/// π_L·h for the first `count` kernel vectors of ℒ at rows 0..rows.
inline std::vector<Series> kernel_samples(const Context& ctx, size_t count, int rows = 8) {
  const TraceMatrix& M = ctx.trace_matrix(rows, ctx.q_K() * (rows + 1));
  KernelResult k = kernel_basis(M, ctx.N());
  std::vector<Series> out;
  for (size_t i = 0; i < k.basis.size() && out.size() < count; ++i)
    out.push_back(ctx.tower().pi_L * resized(k.basis[i], ctx.D()));
  return out;
}

}  // namespace helpers

class Suite {
 public:
  explicit Suite(Options opt = {}) : opt_(opt) {}

  /// C1: p = 3, L = K = Q_3, f = 3x + x^3.
  const Context& c1() {
    if (!c1_) {
      ContextSpec s;
      s.p = 3;
      s.D = opt_.D;
      s.N = opt_.N;
      c1_ = Context::build(s);
    }
    return *c1_;
  }
  /// C3: L = Q_3(s), s^2 = 3; K = L(t), t^2 = s; f_K = t x + x^3.
  const Context& c3() {
    if (!c3_) {
      ContextSpec s;
      s.p = 3;
      s.g_L = {-3, 0, 1};
      s.g_K = {{0, -1}, {0}, {1}};
      s.D = opt_.D;
      s.N = opt_.N;
      c3_ = Context::build(s);
    }
    return *c3_;
  }

  std::vector<CriterionResult> run(const std::function<void(const CriterionResult&)>& on_result = {}) {
    using Fn = Outcome (Suite::*)();
    const std::vector<std::pair<const char*, Fn>> all = {
        {"group_law_axioms", &Suite::group_law_axioms},
        {"endomorphism_ring", &Suite::endomorphism_ring},
        {"degree_three_fixtures", &Suite::degree_three_fixtures},
        {"log_exp_laws", &Suite::log_exp_laws},
        {"trace_operator_properties", &Suite::trace_operator_properties},
        {"trace_preimage", &Suite::trace_preimage_roundtrip},
        {"kw_invariants", &Suite::kw_invariants},
        {"rho_roundtrip", &Suite::rho_roundtrip},
        {"log_transport_roundtrip", &Suite::log_transport_roundtrip},
        {"root_sum_pipeline", &Suite::root_sum_pipeline},
        {"unit_alpha_nullspace", &Suite::unit_alpha_nullspace},
        {"map_a_to_c", &Suite::map_a_to_c}};
    std::vector<CriterionResult> out;
    for (size_t i = 0; i < all.size(); ++i) {
      CriterionResult r;
      r.id = static_cast<int>(i + 1);
      r.name = std::string("criterion_") + all[i].first;
      const auto t0 = std::chrono::steady_clock::now();
      try {
        Outcome o = (this->*all[i].second)();
        r.pass = o.pass;
        r.detail = o.detail;
      } catch (const std::exception& e) {
        r.pass = false;
        r.detail = std::string("exception: ") + e.what();
      }
      r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (on_result) on_result(r);
      out.push_back(std::move(r));
    }
    return out;
  }

  // 1. Unit, commutativity, associativity; F ≡ x + y below total degree q_L.
  Outcome group_law_axioms() {
    using namespace helpers;
    std::mt19937_64 rng(opt_.seed + 1);
    std::ostringstream os;
    bool ok = true;
    int worst = INT_MAX;
    int groups = 0;
    for (const Context* ctx : {&c1(), &c3()}) {
      for (const FormalGroup* G : {&ctx->GL(), &ctx->GK()}) {
        const Ring& R = ctx->ring();
        const BiSeries& F = G->law();
        const int T = F.cap();
        for (int i = 0; i <= T; ++i) {
          const RingElement want = i == 1 ? R.one() : R.zero();
          ok &= (F.at(i, 0) - want).is_zero() && (F.at(0, i) - want).is_zero();
        }
        for (int n = 0; n <= T; ++n)
          for (int j = 0; j <= n; ++j) ok &= (F.at(n - j, j) - F.at(j, n - j)).is_zero();
        BiSeries lin = BiSeries::x(R, T) + BiSeries::y(R, T);
        const int q = static_cast<int>(G->q().get_si());
        Agreement low = agree(F, lin, q - 1);
        ok &= low.ok && low.precision >= opt_.N;
        for (int k = 0; k < 3; ++k) {
          Series a = random_poly(R, rng, T, T, R.one(), 1), b = random_poly(R, rng, T, T, R.one(), 1),
                 c = random_poly(R, rng, T, T, R.one(), 1);
          Agreement as = agree(G->add(G->add(a, b), c), G->add(a, G->add(b, c)), T);
          ok &= as.ok;
          worst = std::min(worst, as.precision);
        }
        ++groups;
      }
    }
    ok &= worst >= opt_.N;
    os << groups << " groups (C1, C3; F_L and F_K) to total degree " << opt_.D << "; associativity verified mod pi^" << worst;
    return {ok, os.str()};
  }

  // 2. [a]∘[b] = [ab], F([a], [b]) = [a + b], [π] = f.
  Outcome endomorphism_ring() {
    using namespace helpers;
    bool ok = true;
    int worst = INT_MAX;
    for (const Context* ctx : {&c1(), &c3()}) {
      const FormalGroup& G = ctx->GK();
      const Ring& R = ctx->ring();
      const int D = ctx->D();
      std::vector<RingElement> as{R.zero(), R.one(), R.from_int(2), R.from_int(3), G.pi()};
      for (const auto& a : as)
        for (const auto& b : as) {
          const Series ea = G.endomorphism(a, D), eb = G.endomorphism(b, D);
          Agreement m = agree(compose(ea, eb), G.endomorphism(a * b, D), D);
          Agreement s = agree(G.add(ea, eb), G.endomorphism(a + b, D), D);
          ok &= m.ok && s.ok;
          worst = std::min({worst, m.precision, s.precision});
        }
      const Series pi = G.endomorphism(G.pi(), D);
      ok &= pi == resized(G.f(), D);
    }
    ok &= worst >= opt_.N;
    return {ok, "a, b in {0,1,2,3,pi} in C1 and C3 to degree " + std::to_string(opt_.D) + ", verified mod pi^" +
                    std::to_string(worst) + "; [pi] = f coefficientwise"};
  }

  // 3. C1 degree-3 coefficients against single-degree linear solves over Q.
  //    Degree-3 part of f∘F = F∘(f, f): π Φ + (x + y)^3 = π^3 Φ + x^3 + y^3.
  //    Degree-3 part of [a]∘f = f∘[a]: π^3 c + a = π c + a^3.
  //    Degree-3 part of log∘f = π log:  π^3 l + 1 = π l.
  Outcome degree_three_fixtures() {
    using namespace helpers;
    const Context& ctx = c1();
    const Ring& R = ctx.ring();
    const mpq_class pi(3), pi3 = pi * pi * pi;
    const mpq_class phi_xxy = solve_single(pi3 - pi, mpq_class(3));
    const mpq_class endo2 = solve_single(pi3 - pi, mpq_class(2 * 2 * 2 - 2));
    const mpq_class log3 = solve_single(pi - pi3, mpq_class(1));
    const int N = opt_.N;
    auto matches = [&](const RingElement& have, const mpq_class& want) {
      const FracElement w = rational_to_frac(R, want);
      return w.shift == 0 && have.prec() >= N && have.congruent(w.num, N);
    };
    const BiSeries& F = ctx.GK().law();
    bool ok = matches(F.at(2, 1), phi_xxy) && matches(F.at(1, 2), phi_xxy) && F.at(3, 0).is_zero() && F.at(0, 3).is_zero();
    const Series two = ctx.GK().endomorphism(R.from_int(2), 3);
    ok &= matches(two[3], endo2);
    const FracElement l3 = ctx.GK().log_exp().log.c[3];
    const FracElement want = rational_to_frac(R, log3);
    ok &= l3.shift == want.shift && l3.val() == -1 && l3.prec() >= N && l3.congruent(want, N);
    std::ostringstream os;
    os << "F_3 = (x^2y + xy^2)*" << phi_xxy << ", [2]_3 = " << endo2 << ", l_3 = " << log3 << " (v = " << l3.val()
       << "), matched mod 3^" << N;
    return {ok, os.str()};
  }

  // 4. log(F(x, y)) = log x + log y as bivariate series; exp∘log = id on 10
  //    random π_L-divisible series.
  Outcome log_exp_laws() {
    using namespace helpers;
    std::ostringstream os;
    bool ok = true;
    for (const Context* ctx : {&c1(), &c3()}) {
      const FormalGroup& G = ctx->GL();
      const int T = G.law().cap();
      const FracSeries& lg = G.log_exp().log;
      const int S = lg.max_shift(T);
      const Series L = lg.scaled(S);
      const BiSeries& F = G.law();
      BiSeries power = F, lhs = scale(L[1], F);
      for (int n = 2; n <= T; ++n) {
        power = power * F;
        lhs += scale(L[n], power);
      }
      const Series Lt = resized(L, T);
      BiSeries rhs = BiSeries::from_x(Lt, T) + BiSeries::from_x(Lt, T, true);
      Agreement a = agree(lhs, rhs, T);
      ok &= a.ok && a.precision - S >= opt_.N;
      os << (ctx == c1_.get() ? "C1" : "C3") << ": log law to total degree " << T << " mod pi^" << a.precision - S << "; ";
    }
    const Context& ctx = c3();
    const Ring& R = ctx.ring();
    std::mt19937_64 rng(opt_.seed + 4);
    int worst = INT_MAX;
    for (int k = 0; k < 10; ++k) {
      const Series g = random_poly(R, rng, 12, ctx.D(), ctx.tower().pi_L);
      const Series back = ctx.GL().transport_exp(ctx.GL().transport_log(g));
      Agreement a = agree(back, g, ctx.D());
      ok &= a.ok;
      worst = std::min(worst, a.precision);
    }
    ok &= worst >= opt_.N / 2;
    os << "exp(log g) = g on 10 series in C3 through degree " << ctx.D() << " mod pi^" << worst;
    return {ok, os.str()};
  }

  // 5. ℒ(c) = q c; π | ℒ(f); O_K-linearity; descent exact; C1 ℒ(-x^2/2)(0).
  Outcome trace_operator_properties() {
    using namespace helpers;
    std::mt19937_64 rng(opt_.seed + 5);
    bool ok = true;
    int worst = INT_MAX;
    const int D = 16;
    for (const Context* ctx : {&c1(), &c3()}) {
      const Ring& R = ctx->ring();
      const TorsionAlgebra& A = ctx->algebra();
      const RingElement c = random_element(R, rng);
      Series lc = trace_operator(A, Series::constant(R, D, c));
      Agreement k = agree(lc, Series::constant(R, D, R.from_int(ctx->q_K()) * c), D);
      ok &= k.ok;
      worst = std::min(worst, k.precision);
      std::vector<Series> images;
      std::vector<Series> fs;
      for (int i = 0; i < 20; ++i) {
        fs.push_back(random_poly(R, rng, D, D, R.one()));
        images.push_back(trace_operator(A, fs.back()));  // descent to O_K is checked inside
        for (int n = 0; n <= D; ++n) ok &= images.back()[n].val() >= std::min(1, images.back()[n].prec());
      }
      const RingElement a = random_element(R, rng), b = random_element(R, rng);
      Agreement lin = agree(trace_operator(A, a * fs[0] + b * fs[1]), a * images[0] + b * images[1], D);
      ok &= lin.ok;
      worst = std::min(worst, lin.precision);
    }
    // Roots of x^3 + 3x: power sum p_2 = e_1^2 - 2 e_2 = -6, so Σ -z^2/2 = 3.
    const Ring& R = c1().ring();
    const mpq_class e1 = 0, e2 = 3;
    const mpq_class oracle = -(e1 * e1 - 2 * e2) / 2;
    Series k = Series::monomial(R, 2, D, -R.unit_inverse(R.from_int(2)));
    const RingElement l0 = trace_operator(c1().algebra(), k)[0];
    ok &= (l0 - R.from_int(Int(oracle.get_num()))).is_zero() && oracle.get_den() == 1;
    ok &= worst >= opt_.N;
    return {ok, "C1 and C3, 20 random f each to degree " + std::to_string(D) + ", verified mod pi^" + std::to_string(worst) +
                    "; L(-x^2/2)(0) = " + l0.to_string()};
  }

  // 6. ℒ(preimage(s)) ≡ s mod π^{N'} through D', N' ≥ N - D'.
  Outcome trace_preimage_roundtrip() {
    using namespace helpers;
    const Context& ctx = c1();
    const Ring& R = ctx.ring();
    const int Dp = 10;
    const TraceMatrix& M = ctx.trace_matrix(Dp, ctx.q_K() * (Dp + 1));
    std::mt19937_64 rng(opt_.seed + 6);
    bool ok = true;
    int worstN = INT_MAX, worstD = INT_MAX;
    for (int k = 0; k < 10; ++k) {
      const Series s = random_poly(R, rng, Dp, Dp, ctx.tower().pi_K);
      PreimageResult pr = trace_preimage(M, s, ctx.N());
      // independent check through the direct route
      const Series image = trace_operator(ctx.algebra(), pr.t);
      const int Np = pr.achieved.precision;
      const MembershipReport a = zero_report(resized(image, pr.achieved.degree) - s.truncated(pr.achieved.degree), Np,
                                             pr.achieved.degree);
      ok &= a.verdict == Verdict::Pass && Np >= ctx.N() - pr.achieved.degree && pr.achieved.degree >= 1;
      worstN = std::min(worstN, Np);
      worstD = std::min(worstD, pr.achieved.degree);
    }
    return {ok, "10 preimages in C1: D' = " + std::to_string(worstD) + ", N' = " + std::to_string(worstN) +
                    " (required >= N - D' = " + std::to_string(ctx.N() - worstD) + ")"};
  }

  // 7. k(u0) = π/(q-1) in the torsion algebra, ℒ(k) = π w, w(0) a unit.
  Outcome kw_invariants() {
    bool ok = true;
    std::ostringstream os;
    for (const Context* ctx : {&c1(), &c3()}) {
      const KWPair kw = build_k_w(*ctx);
      const TorsionAlgebra& A = ctx->algebra();
      const Ring& R = ctx->ring();
      const RingElement inv = R.unit_inverse(R.from_int(ctx->q_K() - 1));
      // u0 is a root of π + u^{q-1}, so the expected value is π/(q-1).
      const RingElement& u = A.u0();
      ok &= (u.pow(static_cast<unsigned long>(ctx->q_K() - 1)) + A.ring().embed(ctx->tower().pi_K)).is_zero();
      ok &= (A.evaluate(kw.k, u) - A.ring().embed(ctx->tower().pi_K * inv)).is_zero();
      const Series lk = trace_operator(A, kw.k);
      ok &= (lk - ctx->tower().pi_K * kw.w).is_zero() && kw.w[0].is_unit();
      os << (ctx == c1_.get() ? "C1" : "C3") << ": w(0) = " << kw.w[0].to_string() << "; ";
    }
    return {ok, os.str() + "k(u0), L(k) = pi w verified at full working precision"};
  }

  // 8. ρ^{-1} round trips in C1 for α ∈ {9, 27, 9(1 + x)} and injectivity.
  Outcome rho_roundtrip() {
    using namespace helpers;
    const Context& ctx = c1();
    const Ring& R = ctx.ring();
    const KWPair kw = build_k_w(ctx);
    const std::vector<Eigenvalue> alphas = {R.from_int(9), R.from_int(27),
                                            Series::from(R, {R.from_int(9), R.from_int(9)}, ctx.D())};
    const std::vector<Series> hs = kernel_samples(ctx, 5);
    bool ok = hs.size() == 5;
    int worst = INT_MAX;
    const MembershipOptions opt{8, 4, false};
    for (const Series& h : hs) {
      ok &= check_membership(ModuleKind::C, h, R.zero(), ctx, opt).verdict == Verdict::Pass;
      for (const auto& a : alphas) {
        RhoInverseResult r = rho_inverse(h, a, kw, ctx.N());
        const MembershipReport back = zero_report(rho(r.g, a, kw) - h, r.achieved_precision, ctx.D());
        const MembershipReport e = check_membership(ModuleKind::E, r.g, a, ctx, opt);
        const int Np = r.achieved_precision;
        ok &= Np >= 8 && back.verdict == Verdict::Pass && e.verdict == Verdict::Pass;
        worst = std::min(worst, Np);
      }
    }
    std::mt19937_64 rng(opt_.seed + 8);
    int injective = 0;
    for (int k = 0; k < 5; ++k) {
      const Series delta = random_poly(R, rng, 5, ctx.D(), R.from_int(9));
      const int v = valuation_profile(delta, ctx.D()).nonzero;
      const bool nonzero = zero_report(rho(delta, R.from_int(27), kw), v + 1, 0).verdict == Verdict::Fail;
      injective += nonzero;
    }
    ok &= injective == 5;
    return {ok, "5 kernel vectors x 3 eigenvalues: rho(g) = h and L(g) = alpha g, N' = " + std::to_string(worst) +
                    "; rho(delta) != 0 on " + std::to_string(injective) + "/5 perturbations"};
  }

  // 9. ℰ → 𝒜 → ℰ in C3 (α = π_L) with 𝒜-membership of the image.
  Outcome log_transport_roundtrip() {
    using namespace helpers;
    const Context& ctx = c3();
    const RingElement alpha = ctx.tower().pi_L;
    const KWPair kw = build_k_w(ctx);
    const MembershipOptions opt{8, 3, true};
    bool ok = true;
    int count = 0, worst = INT_MAX;
    for (const Series& h : kernel_samples(ctx, 3)) {
      const RhoInverseResult g = rho_inverse(h, alpha, kw, ctx.N());
      const TransportResult toA = log_transport_iso(g.g, TransportDirection::EtoA, alpha, ctx, opt);
      const TransportResult back = log_transport_iso(toA.out, TransportDirection::AtoE, alpha, ctx, opt);
      ok &= toA.source.verdict == Verdict::Pass && toA.target.verdict == Verdict::Pass &&
            back.target.verdict == Verdict::Pass;
      const Series d = back.out - g.g;
      const MembershipReport same = zero_report(d, 8, 8);
      ok &= same.verdict == Verdict::Pass;
      worst = std::min(worst, valuation_profile(d, 8).floor());
      ++count;
    }
    ok &= count == 3;
    return {ok, std::to_string(count) + " eigenvectors: A-membership pass mod pi^8 through degree 3; round trip agrees mod pi^" +
                    std::to_string(std::min(worst, ctx.ring().cap())) + " through degree 8"};
  }

  // 10. C3: π_K | f ⇒ π_K^2 | T(f); twist passes the root-sum criterion; the
  //     lift lands in 𝒜 mod π_K^10.
  Outcome root_sum_pipeline() {
    using namespace helpers;
    const Context& ctx = c3();
    const Ring& R = ctx.ring();
    const RingElement alpha = ctx.tower().pi_L;
    std::mt19937_64 rng(opt_.seed + 10);
    bool ok = true;
    const int D = 16;
    for (int k = 0; k < 10; ++k) {
      const Series f = random_poly(R, rng, D, D, ctx.tower().pi_K);
      const Series Tf = t_operator(f, alpha, ctx);
      for (int n = 0; n <= D; ++n) ok &= Tf[n].prec() >= 2 && Tf[n].val() >= 2;
    }
    const bool lemma = ok;
    const Series s = twist_candidate(Series::from(R, {ctx.tower().pi_K, R.one(), R.one()}, 2), ctx);
    const MembershipReport crit = criterion_root_sum(s, alpha, ctx, 8);
    ok &= crit.verdict == Verdict::Pass;
    const LiftResult lr = lift_to_A(s, alpha, ctx, 10, 6);
    const bool close = zero_report(lr.r - s, 1, ctx.D()).verdict == Verdict::Pass;
    const MembershipReport inA = zero_report(t_operator(lr.r, alpha, ctx), 10, 6);
    ok &= close && inA.verdict == Verdict::Pass;
    std::ostringstream os;
    os << "lemma on 10 f to degree " << D << ": " << (lemma ? "ok" : "FAILED") << "; criterion on pi_K + x^3 + x^6: "
       << to_string(crit.verdict) << " (degree " << crit.checked_degree << "); lift in " << lr.stages
       << " stages, T(r) = 0 mod pi_K^10 through degree 6: " << to_string(inA.verdict);
    return {ok, os.str()};
  }

  // 11. ker(ℒ - 1) = 0 in C1.
  Outcome unit_alpha_nullspace() {
    const Context& ctx = c1();
    const int rows = 10;
    const TraceMatrix& M = ctx.trace_matrix(rows, ctx.q_K() * (rows + 1));
    const KernelResult k = kernel_basis(M, ctx.N(), ctx.ring().one());
    const bool ok = k.basis.empty() && k.achieved.degree >= rows;
    return {ok, "nullspace of L - 1 through degree " + std::to_string(k.achieved.degree) + " mod 3^" +
                    std::to_string(ctx.N()) + ": dimension " + std::to_string(k.basis.size())};
  }

  // 12. map_A_to_C lands in 𝒞 and is O_L-linear on pipeline 𝒜-members.
  Outcome map_a_to_c() {
    using namespace helpers;
    const Context& ctx = c3();
    const Ring& R = ctx.ring();
    const RingElement alpha = ctx.tower().pi_L;
    const KWPair kw = build_k_w(ctx);
    const MembershipOptions opt{8, 3, true};
    std::vector<Series> members;
    for (const Series& h : kernel_samples(ctx, 4)) {
      const RhoInverseResult g = rho_inverse(h, alpha, kw, ctx.N());
      members.push_back(log_transport_iso(g.g, TransportDirection::EtoA, alpha, ctx, opt).out);
    }
    const Series s = twist_candidate(Series::from(R, {ctx.tower().pi_K, R.one(), R.one()}, 2), ctx);
    members.push_back(lift_to_A(s, alpha, ctx, 10, 6).r);
    bool ok = members.size() == 5;
    const int upto = 3;
    int worst = INT_MAX;
    std::vector<Series> images;
    const MembershipOptions inA{8, upto, false, 6};
    for (const Series& r : members) {
      images.push_back(map_A_to_C(r, alpha, ctx, inA));
      const MembershipReport c = check_membership(ModuleKind::C, images.back(), R.zero(), ctx, {8, upto, false});
      ok &= c.verdict == Verdict::Pass;
    }
    const Series two = ctx.GL().endomorphism(R.from_int(2), ctx.D());
    for (size_t i = 0; i < members.size(); ++i) {
      const Series scaled = map_A_to_C(compose(two, members[i]), alpha, ctx, inA);
      const Series sum = map_A_to_C(ctx.GL().add(members[i], members[(i + 1) % members.size()]), alpha, ctx, inA);
      for (const Series& d : {scaled - R.from_int(2) * images[i], sum - images[i] - images[(i + 1) % members.size()]}) {
        const ValuationProfile v = valuation_profile(d, upto);
        ok &= v.floor() >= 8;
        worst = std::min(worst, v.floor());
      }
    }
    return {ok, "5 A-members (4 transported eigenvectors, 1 lift): C-membership pass; additivity and [2]-linearity mod pi^" +
                    std::to_string(std::min(worst, R.cap())) + " through degree " + std::to_string(upto)};
  }

 private:
  Options opt_;
  std::shared_ptr<Context> c1_, c3_;
};

}  // namespace ltc::acceptance
