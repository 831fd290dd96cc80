#pragma once

// Lubin-Tate formal groups: the group law attached to a series f with
// f ≡ πx mod x² and f ≡ x^q mod π, its endomorphisms, formal inverse,
// formal sums, and the logarithm/exponential pair.

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "ltc/series.hpp"

namespace ltc {

/// Logarithm and exponential over the fraction field. The coefficient of x^n
/// in log is bounded below by -v(π)·floor(log_q n), in exp by
/// -floor(v(π)(n-1)/(q-1)); both bounds are asserted at construction.
struct LogExp {
  FracSeries log;
  FracSeries exp;
};

namespace detail {

inline int floor_log(long n, const Int& q) {
  int k = 0;
  Int t = q;
  while (t <= n) {
    t *= q;
    ++k;
  }
  return k;
}

inline std::string element_key(const RingElement& a) {
  std::string k;
  for (const auto& c : a.coords()) k += c.get_str(16) + ",";
  return k + "@" + std::to_string(a.prec());
}

// Homogeneous parts [P]_0..[P]_T of a bivariate series, one vector per degree
// (index j = exponent of y).
using Homogeneous = std::vector<std::vector<RingElement>>;

}  // namespace detail

class FormalGroup {
 public:
  /// Build the group law of `f` to total degree T. `pi` is the element with
  /// f ≡ πx mod x², `q` the residue cardinality with f ≡ x^q mod π. If
  /// `scalars` is given (a subring of f's ring), endomorphism scalars must lie
  /// in it.
  static FormalGroup build(const Series& f, const RingElement& pi, const Int& q, int T,
                           const Ring* scalars = nullptr);

  const Ring& ring() const { return *f_.ring_ptr(); }
  const Series& f() const { return f_; }
  const BiSeries& law() const { return F_; }
  const RingElement& pi() const { return pi_; }
  const Int& q() const { return q_; }
  int cap() const { return F_.cap(); }
  const Ring* scalar_ring() const { return scalars_; }

  /// x ⊕ y evaluated at series arguments.
  Series add(const Series& g, const Series& h) const { return bi_substitute(F_, g, h); }
  /// x ⊖ y = x ⊕ ι(y).
  Series sub(const Series& g, const Series& h) const { return add(g, compose(inverse(h.cap()), h)); }

  /// [a](x) to degree D; cached per (a, D).
  Series endomorphism(const RingElement& a, int D) const;
  /// ι(x) with F(x, ι(x)) = 0, to degree D.
  Series inverse(int D) const;
  /// Left fold of ⊕ over the terms (zero for an empty list).
  Series fold(const std::vector<Series>& terms, int D) const;

  /// Logarithm and exponential to degree cap(); computed once.
  const LogExp& log_exp() const;
  /// log(h(x)) or exp(h(x)) for h in π·O[[x]] (π = this group's π).
  Series transport_log(const Series& h) const { return transport(h, true); }
  Series transport_exp(const Series& h) const { return transport(h, false); }

 private:
  struct Cache {
    std::mutex mu;
    std::map<std::string, Series> endo;
    std::map<int, Series> inverse;
    std::vector<Series> f_powers;  // f^k at degree cap f_powers_cap
    int f_powers_cap = -1;
    std::once_flag log_once;
    std::unique_ptr<LogExp> log_exp;
  };

  Series transport(const Series& h, bool log) const;
  std::vector<Series> f_powers(int D) const;
  RingElement divide_by_defect_unit(const RingElement& e, int n) const;

  Series f_;
  BiSeries F_;
  RingElement pi_;
  Int q_;
  const Ring* scalars_ = nullptr;
  std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

// ---------------------------------------------------------------------------

/// Check f ≡ πx mod x² and f ≡ x^q mod π; throws PreconditionError.
inline void validate_lubin_tate_series(const Series& f, const RingElement& pi, const Int& q) {
  const Ring& R = f.ring();
  if (pi.ring_ptr() != &R) throw PreconditionError("Lubin-Tate series: pi is not in the series ring");
  const int vpi = pi.val();
  if (pi.is_zero() || vpi < 1) throw PreconditionError("Lubin-Tate series: pi must be a nonzero non-unit");
  if (!f[0].is_zero()) throw PreconditionError("Lubin-Tate series: constant term must vanish");
  if (f.cap() < 1 || !f[1].congruent(pi, std::min(f[1].prec(), pi.prec())))
    throw PreconditionError("Lubin-Tate series: linear coefficient must equal pi");
  if (q > f.cap()) throw PreconditionError("Lubin-Tate series: degree cap below q");
  const long qq = q.get_si();
  for (int n = 2; n <= f.cap(); ++n) {
    RingElement c = n == qq ? f[n] - R.one() : f[n];
    if (c.val() < vpi)
      throw PreconditionError("Lubin-Tate series: coefficient of x^" + std::to_string(n) +
                              " violates f ≡ x^q mod pi");
  }
}

inline RingElement FormalGroup::divide_by_defect_unit(const RingElement& e, int n) const {
  // e / (π^n − π)
  const RingElement d = pi_.pow(static_cast<unsigned long>(n)) - pi_;
  try {
    return divide_exact(e, d);
  } catch (const DivisibilityError&) {
    throw DivisibilityError("defect at degree " + std::to_string(n) + " is not divisible by pi^n - pi", n);
  }
}

inline std::vector<Series> FormalGroup::f_powers(int D) const {
  std::lock_guard<std::mutex> lock(cache_->mu);
  if (cache_->f_powers_cap < D) {
    const Ring& R = ring();
    Series fD(R, D, f_.tail());
    for (int n = 0; n <= std::min(D, f_.cap()); ++n) fD[n] = f_[n];
    if (f_.cap() < D && !f_.exact_tail())
      for (int n = f_.cap() + 1; n <= D; ++n) fD[n] = R.zero().with_prec(0);
    std::vector<Series> pw{Series::constant(R, D, R.one())};
    for (int k = 1; k <= D; ++k) pw.push_back(pw.back() * fD);
    cache_->f_powers = std::move(pw);
    cache_->f_powers_cap = D;
  }
  if (cache_->f_powers_cap == D) return cache_->f_powers;
  std::vector<Series> out;
  for (int k = 0; k <= D; ++k) out.push_back(cache_->f_powers[static_cast<size_t>(k)].truncated(D));
  return out;
}

inline FormalGroup FormalGroup::build(const Series& f, const RingElement& pi, const Int& q, int T,
                                      const Ring* scalars) {
  validate_lubin_tate_series(f, pi, q);
  if (T < 1) throw PreconditionError("group law degree cap must be at least 1");
  FormalGroup G;
  G.f_ = f;
  G.pi_ = pi;
  G.q_ = q;
  G.scalars_ = scalars;
  const Ring& R = f.ring();
  const std::vector<Series> P = G.f_powers(T);
  const int degf = f.exact_tail() ? f.degree() : T;

  // Homogeneous parts of Φ^k, k = 1..degf (only the degrees already fixed).
  std::vector<detail::Homogeneous> pw(static_cast<size_t>(degf + 1));
  for (auto& h : pw) h.assign(static_cast<size_t>(T + 1), {});
  auto& phi = pw[1];
  phi[0] = {R.zero()};
  phi[1] = {R.one(), R.one()};
  for (int k = 2; k <= degf; ++k) {
    pw[static_cast<size_t>(k)][0] = {R.zero()};
    pw[static_cast<size_t>(k)][1] = {R.zero(), R.zero()};
  }
  // Rj[j] = Σ_i c_ij f(x)^i over the coefficients fixed so far.
  std::vector<Series> Rj(static_cast<size_t>(T + 1), Series(R, T));
  Rj[0] += P[1];
  Rj[1] += P[0];
  detail::Accumulator acc(R);

  for (int n = 2; n <= T; ++n) {
    // [Φ^k]_n for k >= 2 from Φ_1..Φ_{n-1}.
    for (int k = 2; k <= degf; ++k) {
      auto& out = pw[static_cast<size_t>(k)][static_cast<size_t>(n)];
      out.assign(static_cast<size_t>(n + 1), R.zero());
      if (n < k) continue;
      const auto& lower = pw[static_cast<size_t>(k - 1)];
      for (int j = 0; j <= n; ++j) {
        for (int m = 1; m <= n - (k - 1); ++m) {
          const auto& a = phi[static_cast<size_t>(m)];
          const auto& b = lower[static_cast<size_t>(n - m)];
          for (int ja = std::max(0, j - (n - m)); ja <= std::min(j, m); ++ja)
            acc.add_product(a[static_cast<size_t>(ja)], b[static_cast<size_t>(j - ja)]);
        }
        out[static_cast<size_t>(j)] = acc.finish();
      }
    }
    std::vector<RingElement> phin(static_cast<size_t>(n + 1));
    for (int j = 0; j <= n; ++j) {
      const int i = n - j;
      // (f∘Φ)_n: Σ_{k>=2} a_k [Φ^k]_n at x^i y^j
      for (int k = 2; k <= degf; ++k)
        if (!f[k].is_zero()) acc.add_product(f[k], pw[static_cast<size_t>(k)][static_cast<size_t>(n)][static_cast<size_t>(j)]);
      RingElement e = acc.finish();
      // (Φ∘(f,f))_n at x^i y^j: Σ_{jj <= j} R_jj[i] · (f^jj)[j]
      for (int jj = 0; jj <= j; ++jj) acc.add_product(Rj[static_cast<size_t>(jj)][i], P[static_cast<size_t>(jj)][j]);
      e -= acc.finish();
      phin[static_cast<size_t>(j)] = G.divide_by_defect_unit(e, n);
    }
    phi[static_cast<size_t>(n)] = phin;
    for (int j = 0; j <= n; ++j) {
      const RingElement& c = phin[static_cast<size_t>(j)];
      if (c.is_zero() && c.prec() >= R.cap()) continue;
      Rj[static_cast<size_t>(j)] += c * P[static_cast<size_t>(n - j)];
    }
  }
  G.F_ = BiSeries(R, T, Tail::Unknown);
  for (int n = 0; n <= T; ++n)
    for (int j = 0; j <= n; ++j) G.F_.at(n - j, j) = phi[static_cast<size_t>(n)][static_cast<size_t>(j)];
  return G;
}

inline Series FormalGroup::endomorphism(const RingElement& a_in, int D) const {
  const Ring& R = ring();
  RingElement a = R.embed(a_in);
  if (scalars_ && scalars_ != &R) {
    try {
      (void)R.restrict_to(a, *scalars_);
    } catch (const ConsistencyError&) {
      throw PreconditionError("endomorphism: scalar is not in the base ring of the group's level");
    }
  }
  const std::string key = detail::element_key(a) + "#" + std::to_string(D);
  {
    std::lock_guard<std::mutex> lock(cache_->mu);
    auto it = cache_->endo.find(key);
    if (it != cache_->endo.end()) return it->second;
  }
  if ((a - pi_).is_zero() && a.prec() >= R.cap() && f_.exact_tail()) {
    Series c = resized(f_, D);
    std::lock_guard<std::mutex> lock(cache_->mu);
    cache_->endo.emplace(key, c);
    return c;
  }
  const std::vector<Series> P = f_powers(D);
  const int degf = f_.exact_tail() ? f_.degree() : D;
  Series c(R, D, Tail::Unknown);
  if (D >= 1) c[1] = a;
  // pw[k][n] = [c_{<n}^k]_n
  std::vector<std::vector<RingElement>> pw(static_cast<size_t>(degf + 1),
                                           std::vector<RingElement>(static_cast<size_t>(D + 1), R.zero()));
  if (D >= 1) pw[1][1] = a;
  for (int k = 2; k <= degf && k <= D; ++k) pw[static_cast<size_t>(k)][static_cast<size_t>(k)] = a.pow(static_cast<unsigned long>(k));
  detail::Accumulator acc(R);
  for (int n = 2; n <= D; ++n) {
    for (int k = 2; k <= degf; ++k) {
      if (n <= k) continue;
      for (int m = 1; m <= n - (k - 1); ++m)
        acc.add_product(c[m], pw[static_cast<size_t>(k - 1)][static_cast<size_t>(n - m)]);
      pw[static_cast<size_t>(k)][static_cast<size_t>(n)] = acc.finish();
    }
    for (int k = 2; k <= degf; ++k)
      if (!f_[k].is_zero()) acc.add_product(f_[k], pw[static_cast<size_t>(k)][static_cast<size_t>(n)]);
    RingElement e = acc.finish();
    for (int k = 1; k < n; ++k) acc.add_product(c[k], P[static_cast<size_t>(k)][n]);
    e -= acc.finish();
    c[n] = divide_by_defect_unit(e, n);
    pw[1][static_cast<size_t>(n)] = c[n];
  }
  std::lock_guard<std::mutex> lock(cache_->mu);
  cache_->endo.emplace(key, c);
  return c;
}

inline Series FormalGroup::inverse(int D) const {
  {
    std::lock_guard<std::mutex> lock(cache_->mu);
    auto it = cache_->inverse.find(D);
    if (it != cache_->inverse.end()) return it->second;
  }
  const Ring& R = ring();
  if (D > cap()) throw BudgetError("formal inverse to degree " + std::to_string(D) + " needs the group law to that degree");
  Series iota(R, D, Tail::Unknown);
  if (D >= 1) iota[1] = -R.one();
  Series x = Series::x(R, D);
  for (int n = 2; n <= D; ++n) {
    Series partial = bi_substitute(F_, x.truncated(n), iota.truncated(n));
    iota[n] = -partial[n];
  }
  std::lock_guard<std::mutex> lock(cache_->mu);
  cache_->inverse.emplace(D, iota);
  return iota;
}

inline Series FormalGroup::fold(const std::vector<Series>& terms, int D) const {
  Series acc(ring(), D);
  bool first = true;
  for (const auto& t : terms) {
    if (t[0].val() < 1 && !(F_.tail() == Tail::Exact))
      throw PreconditionError("formal sum: term with a unit constant coefficient (divergent)");
    acc = first ? t.truncated(D) : add(acc, t);
    first = false;
  }
  return acc;
}

inline const LogExp& FormalGroup::log_exp() const {
  std::call_once(cache_->log_once, [this] {
    const Ring& R = ring();
    const int T = cap();
    const int vpi = pi_.val();
    // log'(x) = 1 / F_y(x, 0)
    Series Fy(R, T - 1, Tail::Unknown);
    for (int i = 0; i <= T - 1; ++i) Fy[i] = F_.at(i, 1);
    FracSeries lg = antiderivative(series_inverse(Fy));
    for (int n = 1; n <= lg.cap(); ++n) {
      const int bound = -vpi * detail::floor_log(n, q_);
      const FracElement& c = lg.c[static_cast<size_t>(n)];
      if (!c.is_zero() && c.val() < bound)
        throw ConsistencyError("log coefficient of x^" + std::to_string(n) + " exceeds the denominator bound");
    }
    // Reversion: e_n = -Σ_{k=2}^{n} l_k [E^k]_n, with [E^k]_n from e_{<n}.
    const int D = lg.cap();
    const FracElement zero{R.zero(), 0};
    FracSeries ex;
    ex.c.assign(static_cast<size_t>(D + 1), zero);
    ex.tail = Tail::Unknown;
    std::vector<std::vector<FracElement>> pw(static_cast<size_t>(D + 1),
                                             std::vector<FracElement>(static_cast<size_t>(D + 1), zero));
    if (D >= 1) {
      ex.c[1] = FracElement{R.one(), 0};
      for (int k = 1; k <= D; ++k) pw[static_cast<size_t>(k)][static_cast<size_t>(k)] = FracElement{R.one(), 0};
    }
    for (int n = 2; n <= D; ++n) {
      FracElement en = zero;
      for (int k = 2; k <= n; ++k) {
        if (k < n) {
          FracElement s = zero;
          for (int m = 1; m <= n - (k - 1); ++m) {
            const FracElement& a = ex.c[static_cast<size_t>(m)];
            const FracElement& b = pw[static_cast<size_t>(k - 1)][static_cast<size_t>(n - m)];
            if (a.is_zero() || b.is_zero()) continue;
            s = s + a * b;
          }
          pw[static_cast<size_t>(k)][static_cast<size_t>(n)] = s;
        }
        const FracElement& l = lg.c[static_cast<size_t>(k)];
        const FracElement& p = pw[static_cast<size_t>(k)][static_cast<size_t>(n)];
        if (!l.is_zero() && !p.is_zero()) en = en + l * p;
      }
      en = -en;
      const long bound = -static_cast<long>(vpi) * (n - 1) / (q_.get_si() - 1);
      if (!en.is_zero() && en.val() < bound)
        throw ConsistencyError("exp coefficient of x^" + std::to_string(n) + " exceeds the denominator bound");
      ex.c[static_cast<size_t>(n)] = en;
      pw[1][static_cast<size_t>(n)] = en;
    }
    cache_->log_exp = std::make_unique<LogExp>(LogExp{std::move(lg), std::move(ex)});
  });
  return *cache_->log_exp;
}

inline Series FormalGroup::transport(const Series& h, bool log) const {
  const Ring& R = ring();
  if (h.ring_ptr() != &R) throw PreconditionError("transport: series from another ring");
  const int vpi = pi_.val();
  for (int n = 0; n <= h.cap(); ++n)
    if (h[n].val() < vpi)
      throw PreconditionError(std::string(log ? "log" : "exp") + " transport: coefficient of x^" + std::to_string(n) +
                              " is not divisible by pi (domain is pi*O[[x]])");
  const LogExp& le = log_exp();
  const FracSeries& s = log ? le.log : le.exp;
  const int D = h.cap();
  const int T = s.cap();
  int vh = kUnbounded;
  for (int n = 0; n <= D; ++n) vh = std::min(vh, h[n].is_zero() ? h[n].prec() : h[n].val());
  vh = std::max(vh, vpi);
  // h = ϖ^vh · h1 with h1 integral; the n-th term is (c_n ϖ^{n·vh}) · h1^n,
  // whose scalar factor is integral by the denominator bound.
  Series h1(R, D, h.tail());
  for (int n = 0; n <= D; ++n) h1[n] = R.div_pi(h[n], vh);
  Series out(R, D, Tail::Unknown);
  Series hp = Series::constant(R, D, R.one());
  for (int n = 1; n <= T; ++n) {
    hp = hp * h1;
    const FracElement& c = s.c[static_cast<size_t>(n)];
    if (c.is_zero() && c.prec() >= R.cap()) continue;
    const RingElement scalar = FracElement{c.num, c.shift - n * vh}.to_integral();
    for (int m = 0; m <= D; ++m) out[m] += scalar * hp[m];
  }
  // Omitted terms n > T have valuation >= n·v(h) minus the denominator bound.
  const long n1 = T + 1;
  const long den = log ? static_cast<long>(vpi) * detail::floor_log(n1, q_)
                       : static_cast<long>(vpi) * (n1 - 1) / (q_.get_si() - 1);
  const long tail = n1 * vh - den;
  for (int m = 0; m <= D; ++m)
    if (tail < out[m].prec()) out[m] = out[m].with_prec(static_cast<int>(std::max(0L, tail)));
  return out;
}

}  // namespace ltc
