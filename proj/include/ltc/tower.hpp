#pragma once

// Two-level towers O_K / O_L / Z_p and their validation.

#include <string>
#include <vector>

#include "ltc/local_ring.hpp"

namespace ltc {

enum class Level { L, K };

/// Polynomial over O_L given by coordinates: each coefficient is the
/// coordinate list of an O_L element (low to high, including the monic
/// leading 1).
using NestedPoly = std::vector<std::vector<Int>>;

struct TowerSpec {
  int p = 0;
  std::vector<Int> g_L;  // empty: L = Q_p
  NestedPoly g_K;        // empty: K = L
  RingPtr Zp, OL, OK;
  RingElement pi_L, pi_K;  // both embedded in O_K
  Int q_L, q_K;
  int e_L = 1;   // e(L/Q_p)
  int e_KL = 1;  // e(K/L)
  int f_KL = 1;  // f(K/L)
  int prec = 0;  // requested precision (pi_K units); rings carry at least this

  int e_K() const { return e_L * e_KL; }
  const Ring& ring(Level lv) const { return lv == Level::L ? *OL : *OK; }
  /// Embed an element of O_L (or Z_p) into O_K.
  RingElement to_K(const RingElement& x) const { return OK->embed(x); }
  RingElement K(long v) const { return OK->from_int(v); }
};

namespace detail {

// Polynomials over the residue field of a ring, represented by elements at
// precision 1 (i.e. modulo the uniformizer).
using ResPoly = std::vector<RingElement>;

inline void res_trim(ResPoly& a) {
  while (!a.empty() && a.back().is_zero()) a.pop_back();
}

inline ResPoly res_mod(ResPoly a, const ResPoly& m) {
  res_trim(a);
  const RingElement lead_inv = m.back().ring().unit_inverse(m.back());
  while (a.size() >= m.size()) {
    RingElement c = a.back() * lead_inv;
    const size_t sh = a.size() - m.size();
    for (size_t i = 0; i < m.size(); ++i) a[sh + i] -= c * m[i];
    res_trim(a);
  }
  return a;
}

inline ResPoly res_mulmod(const ResPoly& a, const ResPoly& b, const ResPoly& m) {
  if (a.empty() || b.empty()) return {};
  const Ring& R = a[0].ring();
  ResPoly out(a.size() + b.size() - 1, R.zero().with_prec(1));
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return res_mod(std::move(out), m);
}

inline ResPoly res_gcd(ResPoly a, ResPoly b) {
  res_trim(a);
  res_trim(b);
  while (!b.empty()) {
    ResPoly r = res_mod(a, b);
    a = std::move(b);
    b = std::move(r);
  }
  return a;
}

/// Ben-Or irreducibility test over the residue field of `R`.
inline bool residually_irreducible(const Ring& R, ResPoly g) {
  res_trim(g);
  const int n = static_cast<int>(g.size()) - 1;
  if (n < 1) return false;
  const Int q = R.residue_size();
  const RingElement z = R.zero().with_prec(1);
  const RingElement o = R.one().with_prec(1);
  ResPoly x{z, o};
  ResPoly xp = x;  // x^{q^i} mod g
  for (int i = 1; i <= n / 2; ++i) {
    ResPoly r{o};
    ResPoly b = xp;
    Int ex = q;
    while (ex > 0) {
      if (mpz_odd_p(ex.get_mpz_t())) r = res_mulmod(r, b, g);
      b = res_mulmod(b, b, g);
      ex >>= 1;
    }
    xp = r;
    ResPoly d = xp;
    d.resize(std::max<size_t>(d.size(), 2), z);
    d[1] -= o;
    res_trim(d);
    ResPoly h = res_gcd(g, d);
    if (h.size() > 1) return false;
  }
  return true;
}

/// Decide the kind of the extension defined by a monic polynomial over R.
/// Returns an error description (empty on success).
inline std::string classify(const Ring& R, const std::vector<RingElement>& coeffs,
                            ExtensionKind& kind) {
  const int n = static_cast<int>(coeffs.size()) - 1;
  if (n < 2) return "defining polynomial must have degree at least 2";
  if (coeffs.back() != R.one()) return "defining polynomial is not monic";
  bool eis = coeffs[0].val() == 1;
  for (int i = 0; i < n && eis; ++i) eis = coeffs[i].val() >= 1;
  if (eis) {
    kind = ExtensionKind::Eisenstein;
    return {};
  }
  ResPoly g;
  for (const auto& c : coeffs) g.push_back(c.with_prec(1));
  if (residually_irreducible(R, g)) {
    kind = ExtensionKind::Unramified;
    return {};
  }
  return "polynomial is neither Eisenstein (constant term of valuation exactly 1, other "
         "coefficients divisible by the uniformizer) nor irreducible modulo the uniformizer";
}

inline RingPtr build_level(const RingPtr& base, const std::vector<std::vector<Int>>& coeffs,
                           const char* name, int& degree, ExtensionKind& kind) {
  std::vector<RingElement> c;
  for (const auto& v : coeffs) {
    std::vector<Int> x(static_cast<size_t>(base->dim()));
    if (static_cast<int>(v.size()) > base->dim())
      throw PreconditionError(std::string(name) + ": coefficient has too many coordinates");
    std::copy(v.begin(), v.end(), x.begin());
    c.push_back(base->from_coords(std::move(x)));
  }
  std::string err = classify(*base, c, kind);
  if (!err.empty()) throw PreconditionError(std::string(name) + ": " + err);
  degree = static_cast<int>(c.size()) - 1;
  c.pop_back();
  return Ring::extend(base, c, kind);
}

}  // namespace detail

/// Build and validate a tower. `g_L` is an integer coefficient list (low to
/// high, monic) or empty for L = Q_p; `g_K` is a list of O_L coordinate lists
/// or empty for K = L. `prec` is the absolute precision (in pi_K units) that
/// every element of O_K will be able to carry.
inline TowerSpec tower_build(int p, const std::vector<Int>& g_L, const NestedPoly& g_K, int prec) {
  if (!detail::is_prime(p)) throw PreconditionError("p = " + std::to_string(p) + " is not prime");
  if (prec < 1) throw PreconditionError("precision must be positive");

  auto construct = [&](int cap_exp, TowerSpec& t) {
    t.p = p;
    t.g_L = g_L;
    t.g_K = g_K;
    t.Zp = Ring::integers(p, cap_exp);
    ExtensionKind kL = ExtensionKind::Eisenstein, kK = ExtensionKind::Eisenstein;
    int nL = 1, nK = 1;
    if (g_L.empty()) {
      t.OL = t.Zp;
    } else {
      std::vector<std::vector<Int>> c;
      for (const auto& v : g_L) c.push_back({v});
      t.OL = detail::build_level(t.Zp, c, "g_L", nL, kL);
    }
    if (g_K.empty()) {
      t.OK = t.OL;
    } else {
      t.OK = detail::build_level(t.OL, g_K, "g_K", nK, kK);
    }
    t.e_L = t.OL->ramification();
    t.e_KL = t.OK->ramification() / t.e_L;
    t.f_KL = t.OK->residue_degree() / t.OL->residue_degree();
    t.q_L = t.OL->residue_size();
    t.q_K = t.OK->residue_size();
    t.pi_L = t.OK->embed(t.OL->uniformizer());
    t.pi_K = t.OK->uniformizer();
    t.prec = prec;
  };

  TowerSpec probe;
  construct(2, probe);
  TowerSpec t;
  construct(detail::ceil_div(prec, probe.e_K()) + 1, t);
  return t;
}

/// Residue representatives of O_L or O_K, embedded in O_K.
inline std::vector<RingElement> residue_representatives(const TowerSpec& t, Level lv) {
  std::vector<RingElement> out;
  for (const auto& r : t.ring(lv).residue_representatives()) out.push_back(t.to_K(r));
  return out;
}

}  // namespace ltc
