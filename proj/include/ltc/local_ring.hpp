#pragma once

// Exact arithmetic in rings of integers of towers of local fields over Z_p.
//
// A ring is a stack of simple extensions Z_p = R_0 ⊂ R_1 ⊂ ... ⊂ R_d, each
// level either Eisenstein or unramified over the previous one. Elements are
// stored as flat integer coordinate vectors over the monomial basis
// a_1^{i_1} ... a_d^{i_d}. Because every level is Eisenstein or unramified, the
// normalized valuation of an element is
//
//     v(x) = min over monomials of  e * v_p(c) + weight(monomial)
//
// where e is the total ramification index and weight() is the valuation of the
// monomial itself (always < e). The ideal pi^P is therefore coordinatewise,
// which gives a unique canonical representative for "x mod pi^P": reduce each
// coordinate modulo p^ceil((P - weight) / e).

#include <gmpxx.h>

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "ltc/errors.hpp"

namespace ltc {

using Int = mpz_class;

enum class ExtensionKind { Eisenstein, Unramified };

class Ring;
class RingElement;
using RingPtr = std::shared_ptr<const Ring>;

/// Result of a valuation query. When `is_zero` is set the element vanishes at
/// its full precision and `value` equals that precision (a lower bound only).
struct Valuation {
  int value = 0;
  bool is_zero = false;
};

/// An element of a Ring known modulo pi^prec, in canonical form.
///
/// Elements keep a non-owning pointer to their ring; rings are owned by the
/// TowerSpec / TorsionAlgebra that created them and must outlive the elements.
class RingElement {
 public:
  RingElement() = default;
  RingElement(const Ring* ring, std::vector<Int> coords, int prec);

  const Ring& ring() const { return *ring_; }
  const Ring* ring_ptr() const { return ring_; }
  bool valid() const { return ring_ != nullptr; }
  const std::vector<Int>& coords() const { return c_; }
  int prec() const { return prec_; }

  bool is_zero() const;
  Valuation valuation() const;
  /// min(valuation, prec): the valuation that is guaranteed.
  int val() const { return valuation().value; }
  bool is_unit() const { return !is_zero() && val() == 0; }

  /// Drop precision to min(prec, p).
  RingElement with_prec(int p) const;

  RingElement operator-() const;
  RingElement& operator+=(const RingElement& o);
  RingElement& operator-=(const RingElement& o);
  RingElement& operator*=(const RingElement& o);
  friend RingElement operator+(RingElement a, const RingElement& b) { return a += b; }
  friend RingElement operator-(RingElement a, const RingElement& b) { return a -= b; }
  friend RingElement operator*(const RingElement& a, const RingElement& b) {
    RingElement r = a;
    r *= b;
    return r;
  }
  RingElement pow(unsigned long n) const;

  /// Identical canonical form and identical precision.
  friend bool operator==(const RingElement& a, const RingElement& b) {
    return a.ring_ == b.ring_ && a.prec_ == b.prec_ && a.c_ == b.c_;
  }
  /// a ≡ b mod pi^m. Throws BudgetError if either side is known to less
  /// than m.
  bool congruent(const RingElement& o, int m) const;

  std::string to_string() const;

 private:
  friend class Ring;
  const Ring* ring_ = nullptr;
  std::vector<Int> c_;
  int prec_ = 0;
};

namespace detail {

inline int padic_val(const Int& c, unsigned long p) {
  if (c == 0) return std::numeric_limits<int>::max();
  if (mpz_divisible_ui_p(c.get_mpz_t(), p) == 0) return 0;
  Int t;
  return static_cast<int>(mpz_remove(t.get_mpz_t(), c.get_mpz_t(), Int(p).get_mpz_t()));
}

inline int ceil_div(int a, int b) { return a >= 0 ? (a + b - 1) / b : -((-a) / b); }

inline bool is_prime(long p) {
  if (p < 2) return false;
  for (long d = 2; d * d <= p; ++d)
    if (p % d == 0) return false;
  return true;
}

}  // namespace detail

class Ring {
 public:
  struct Level {
    ExtensionKind kind;
    int degree;
    int stride;  // dimension of the ring below this level
    // g = x^degree + sum_m poly[m] x^m, coefficients as flat coordinates
    // over the ring below.
    std::vector<std::vector<Int>> poly;
  };

  /// Z_p with elements known modulo p^cap_exponent.
  static RingPtr integers(int p, int cap_exponent) {
    if (!detail::is_prime(p)) throw PreconditionError("p = " + std::to_string(p) + " is not prime");
    if (cap_exponent < 1) throw PreconditionError("precision cap must be positive");
    auto r = std::shared_ptr<Ring>(new Ring());
    r->p_ = p;
    r->dim_ = 1;
    r->e_ = 1;
    r->f_ = 1;
    r->cap_ = cap_exponent;
    r->weights_ = {0};
    r->init_powers();
    r->uniformizer_ = r->from_int(p);
    r->generator_ = r->uniformizer_;
    return r;
  }

  /// Adjoin a root of the monic polynomial x^n + sum lower[m] x^m, where the
  /// lower coefficients are elements of `base`. The kind is asserted, not
  /// detected; use classify() to detect it.
  static RingPtr extend(const RingPtr& base, const std::vector<RingElement>& lower,
                        ExtensionKind kind) {
    const int n = static_cast<int>(lower.size());
    if (n < 2) throw PreconditionError("extension degree must be at least 2");
    auto r = std::shared_ptr<Ring>(new Ring());
    r->base_ = base;
    r->p_ = base->p_;
    r->levels_ = base->levels_;
    Level lvl{kind, n, base->dim_, {}};
    for (const auto& c : lower) lvl.poly.push_back(c.coords());
    r->levels_.push_back(std::move(lvl));
    r->dim_ = base->dim_ * n;
    r->e_ = base->e_ * (kind == ExtensionKind::Eisenstein ? n : 1);
    r->f_ = base->f_ * (kind == ExtensionKind::Unramified ? n : 1);
    r->cap_ = base->cap_ * (kind == ExtensionKind::Eisenstein ? n : 1);
    r->weights_.resize(r->dim_);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < base->dim_; ++i)
        r->weights_[j * base->dim_ + i] =
            (kind == ExtensionKind::Eisenstein ? base->weights_[i] * n + j : base->weights_[i]);
    r->init_powers();

    std::vector<Int> g(r->dim_);
    g[base->dim_] = 1;
    r->generator_ = RingElement(r.get(), g, r->cap_);
    if (kind == ExtensionKind::Eisenstein) {
      r->uniformizer_ = r->generator_;
      // lambda = pi_base / b = -(b^{n-1} + g_{n-1} b^{n-2} + ... + g_1) * (pi_base / g_0)
      RingElement g0_unit = base->div_pi(lower[0], 1);
      RingElement inv = base->unit_inverse(g0_unit);
      RingElement acc = r->zero();
      RingElement bp = r->one();
      for (int j = 1; j < n; ++j) {
        acc += r->embed(lower[j]) * bp;
        bp *= r->generator_;
      }
      acc += bp;
      r->lambda_ = -(acc * r->embed(inv));
    } else {
      r->uniformizer_ = r->embed(base->uniformizer_);
    }
    return r;
  }

  int p() const { return p_; }
  int dim() const { return dim_; }
  int ramification() const { return e_; }
  int residue_degree() const { return f_; }
  Int residue_size() const {
    Int q;
    mpz_ui_pow_ui(q.get_mpz_t(), static_cast<unsigned long>(p_), static_cast<unsigned long>(f_));
    return q;
  }
  int cap() const { return cap_; }
  int depth() const { return static_cast<int>(levels_.size()); }
  const RingPtr& base() const { return base_; }
  const std::vector<Level>& levels() const { return levels_; }
  int weight(int idx) const { return weights_[idx]; }
  const RingElement& uniformizer() const { return uniformizer_; }
  /// Generator of the top level (p for Z_p).
  const RingElement& generator() const { return generator_; }

  RingElement zero() const { return RingElement(this, std::vector<Int>(dim_), cap_); }
  RingElement one() const { return from_int(1); }
  RingElement from_int(const Int& v, int prec = -1) const {
    std::vector<Int> c(dim_);
    c[0] = v;
    return RingElement(this, std::move(c), prec < 0 ? cap_ : prec);
  }
  RingElement from_int(long v, int prec = -1) const { return from_int(Int(v), prec); }
  RingElement from_coords(std::vector<Int> c, int prec = -1) const {
    if (static_cast<int>(c.size()) != dim_) throw PreconditionError("coordinate vector has wrong length");
    return RingElement(this, std::move(c), prec < 0 ? cap_ : prec);
  }

  /// True if `r` is this ring or one of the rings below it.
  bool has_ancestor(const Ring* r) const {
    for (const Ring* s = this; s; s = s->base_.get())
      if (s == r) return true;
    return false;
  }
  /// Valuation scale from an ancestor's normalization to this ring's.
  int scale_from(const Ring& anc) const { return e_ / anc.e_; }

  /// Image of an element of an ancestor ring.
  RingElement embed(const RingElement& x) const {
    if (x.ring_ptr() == this) return x;
    if (!has_ancestor(x.ring_ptr())) throw PreconditionError("embed: element is not from a subring");
    std::vector<Int> c(dim_);
    std::copy(x.coords().begin(), x.coords().end(), c.begin());
    const int s = scale_from(x.ring());
    const long pr = static_cast<long>(x.prec()) * s;
    return RingElement(this, std::move(c), static_cast<int>(std::min<long>(pr, cap_)));
  }

  /// Inverse of embed(): requires the coordinates outside `anc` to vanish.
  RingElement restrict_to(const RingElement& x, const Ring& anc) const {
    if (!has_ancestor(&anc)) throw PreconditionError("restrict_to: not a subring");
    for (int i = anc.dim_; i < dim_; ++i)
      if (x.coords()[i] != 0)
        throw ConsistencyError("restrict_to: element has a nonzero component outside the subring");
    std::vector<Int> c(x.coords().begin(), x.coords().begin() + anc.dim_);
    const int s = scale_from(anc);
    return RingElement(&anc, std::move(c), std::min(anc.cap_, detail::ceil_div(x.prec(), s)));
  }

  /// Exact division by pi^m. Throws DivisibilityError if the element is known
  /// to have valuation < m. If the element is zero at a precision below m the
  /// result is zero with precision 0.
  RingElement div_pi(const RingElement& x, int m) const {
    if (m < 0) throw PreconditionError("div_pi: negative exponent");
    if (m == 0) return x;
    Valuation v = x.valuation();
    if (v.is_zero) return RingElement(this, std::vector<Int>(dim_), std::max(0, x.prec() - m));
    if (v.value < m)
      throw DivisibilityError("exact division by pi^" + std::to_string(m) + " failed: valuation is " +
                              std::to_string(v.value));
    const int k = m / e_;
    RingElement y = x;
    if (k > 0) {
      for (auto& c : y.c_) mpz_divexact(c.get_mpz_t(), c.get_mpz_t(), p_pow(k).get_mpz_t());
      y.prec_ -= k * e_;
      canonicalize(y.c_, y.prec_);
    }
    for (int i = 0; i < m - k * e_; ++i) y = div_pi_once(y);
    return y;
  }

  /// Inverse of a unit, by residue inversion (a^{q-2}) and Newton lifting.
  RingElement unit_inverse(const RingElement& a) const {
    if (a.ring_ptr() != this) throw PreconditionError("unit_inverse: foreign element");
    if (!a.is_unit()) throw PreconditionError("unit_inverse: argument is not a unit");
    const int target = a.prec();
    Int q = residue_size();
    RingElement b = a.with_prec(1);
    Int ex = q - 2;
    RingElement r = one().with_prec(1);
    RingElement base = b;
    while (ex > 0) {
      if (mpz_odd_p(ex.get_mpz_t())) r *= base;
      base *= base;
      ex >>= 1;
    }
    int have = 1;
    RingElement two = from_int(2);
    while (have < target) {
      have = std::min(target, 2 * have);
      RingElement rr = r.with_prec(have);
      RingElement aa = a.with_prec(have);
      rr.prec_ = have;
      canonicalize(rr.c_, rr.prec_);
      r = rr * (two - aa * rr);
      r = r.with_prec(have);
    }
    r.prec_ = target;
    canonicalize(r.c_, r.prec_);
    return r;
  }

  /// Canonical residue representatives: integer digits in [0, p) on the
  /// weight-zero (unramified) monomials, enumerated in counting order.
  std::vector<RingElement> residue_representatives() const {
    std::vector<int> slots;
    for (int i = 0; i < dim_; ++i)
      if (weights_[i] == 0) slots.push_back(i);
    const long q = residue_size().get_si();
    std::vector<RingElement> out;
    out.reserve(static_cast<size_t>(q));
    for (long t = 0; t < q; ++t) {
      std::vector<Int> c(dim_);
      long r = t;
      for (int s : slots) {
        c[s] = r % p_;
        r /= p_;
      }
      out.emplace_back(this, std::move(c), cap_);
    }
    return out;
  }

  const Int& p_pow(int k) const {
    if (k < 0) k = 0;
    if (k >= static_cast<int>(ppow_.size())) {
      while (static_cast<int>(ppow_.size()) <= k) ppow_.push_back(ppow_.back() * p_);
    }
    return ppow_[k];
  }

  void canonicalize(std::vector<Int>& c, int prec) const {
    for (int i = 0; i < dim_; ++i) {
      const int ex = detail::ceil_div(prec - weights_[i], e_);
      if (ex <= 0) {
        c[i] = 0;
      } else {
        mpz_fdiv_r(c[i].get_mpz_t(), c[i].get_mpz_t(), p_pow(ex).get_mpz_t());
      }
    }
  }

  /// out = a * b on raw coordinates (no reduction modulo p^k).
  void mul_coords(const std::vector<Int>& a, const std::vector<Int>& b, std::vector<Int>& out) const {
    out.assign(dim_, Int(0));
    mul_rec(depth() - 1, a.data(), b.data(), out.data());
  }

 private:
  Ring() = default;

  void init_powers() { ppow_ = {Int(1)}; }

  static bool block_zero(const Int* a, int s) {
    for (int i = 0; i < s; ++i)
      if (a[i] != 0) return false;
    return true;
  }

  void mul_rec(int lvl, const Int* a, const Int* b, Int* out) const {
    if (lvl < 0) {
      mpz_mul(out[0].get_mpz_t(), a[0].get_mpz_t(), b[0].get_mpz_t());
      return;
    }
    const Level& L = levels_[lvl];
    const int n = L.degree, s = L.stride;
    std::vector<Int> prod(static_cast<size_t>((2 * n - 1) * s));
    std::vector<Int> tmp(static_cast<size_t>(s));
    for (int i = 0; i < n; ++i) {
      if (block_zero(a + i * s, s)) continue;
      for (int j = 0; j < n; ++j) {
        if (block_zero(b + j * s, s)) continue;
        mul_rec(lvl - 1, a + i * s, b + j * s, tmp.data());
        for (int t = 0; t < s; ++t) prod[(i + j) * s + t] += tmp[t];
      }
    }
    for (int k = 2 * n - 2; k >= n; --k) {
      const Int* ck = prod.data() + k * s;
      if (block_zero(ck, s)) continue;
      std::vector<Int> cc(ck, ck + s);
      for (int m = 0; m < n; ++m) {
        if (block_zero(L.poly[m].data(), s)) continue;
        mul_rec(lvl - 1, cc.data(), L.poly[m].data(), tmp.data());
        for (int t = 0; t < s; ++t) prod[(k - n + m) * s + t] -= tmp[t];
      }
    }
    for (int t = 0; t < n * s; ++t) out[t] = prod[t];
  }

  // Division by the uniformizer, assuming valuation >= 1.
  RingElement div_pi_once(const RingElement& x) const {
    if (depth() == 0) {
      std::vector<Int> c = x.coords();
      mpz_divexact_ui(c[0].get_mpz_t(), c[0].get_mpz_t(), static_cast<unsigned long>(p_));
      return RingElement(this, std::move(c), x.prec() - 1);
    }
    const Level& L = levels_.back();
    const int n = L.degree, s = L.stride;
    const Ring& B = *base_;
    auto block = [&](int j) {
      std::vector<Int> c(x.coords().begin() + j * s, x.coords().begin() + (j + 1) * s);
      return RingElement(&B, std::move(c), std::min(B.cap_, L.kind == ExtensionKind::Eisenstein
                                                                ? detail::ceil_div(x.prec() - j, n)
                                                                : x.prec()));
    };
    if (L.kind == ExtensionKind::Unramified) {
      std::vector<Int> c(dim_);
      int pr = cap_;
      for (int j = 0; j < n; ++j) {
        RingElement q = B.div_pi(block(j), 1);
        pr = std::min(pr, q.prec());
        std::copy(q.coords().begin(), q.coords().end(), c.begin() + j * s);
      }
      return RingElement(this, std::move(c), std::min(pr, x.prec() - 1));
    }
    std::vector<Int> c(dim_);
    for (int j = 1; j < n; ++j)
      std::copy(x.coords().begin() + j * s, x.coords().begin() + (j + 1) * s, c.begin() + (j - 1) * s);
    RingElement shifted(this, std::move(c), x.prec() - 1);
    RingElement c0 = B.div_pi(block(0), 1);
    RingElement y = shifted + embed(c0) * lambda_;
    return y.with_prec(x.prec() - 1);
  }

  RingPtr base_;
  int p_ = 0;
  int dim_ = 1;
  int e_ = 1;
  int f_ = 1;
  int cap_ = 0;
  std::vector<Level> levels_;
  std::vector<int> weights_;
  mutable std::vector<Int> ppow_;
  RingElement uniformizer_;
  RingElement generator_;
  RingElement lambda_;
};

// ---------------------------------------------------------------------------
// RingElement

inline RingElement::RingElement(const Ring* ring, std::vector<Int> coords, int prec)
    : ring_(ring), c_(std::move(coords)), prec_(std::max(0, std::min(prec, ring->cap()))) {
  ring_->canonicalize(c_, prec_);
}

inline bool RingElement::is_zero() const {
  for (const auto& c : c_)
    if (c != 0) return false;
  return true;
}

inline Valuation RingElement::valuation() const {
  int best = prec_;
  bool any = false;
  const int e = ring_->ramification();
  const auto p = static_cast<unsigned long>(ring_->p());
  for (size_t i = 0; i < c_.size(); ++i) {
    if (c_[i] == 0) continue;
    any = true;
    const int w = ring_->weight(static_cast<int>(i));
    if (w >= best) continue;
    const int v = e * detail::padic_val(c_[i], p) + w;
    best = std::min(best, v);
  }
  return {best, !any};
}

inline RingElement RingElement::with_prec(int p) const {
  if (p >= prec_) return *this;
  return RingElement(ring_, c_, p);
}

inline RingElement RingElement::operator-() const {
  std::vector<Int> c = c_;
  for (auto& x : c) x = -x;
  return RingElement(ring_, std::move(c), prec_);
}

inline RingElement& RingElement::operator+=(const RingElement& o) {
  if (ring_ != o.ring_) throw PreconditionError("ring mismatch in addition");
  for (size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  prec_ = std::min(prec_, o.prec_);
  ring_->canonicalize(c_, prec_);
  return *this;
}

inline RingElement& RingElement::operator-=(const RingElement& o) {
  if (ring_ != o.ring_) throw PreconditionError("ring mismatch in subtraction");
  for (size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  prec_ = std::min(prec_, o.prec_);
  ring_->canonicalize(c_, prec_);
  return *this;
}

inline RingElement& RingElement::operator*=(const RingElement& o) {
  if (ring_ != o.ring_) throw PreconditionError("ring mismatch in multiplication");
  const long pa = static_cast<long>(prec_) + o.val();
  const long pb = static_cast<long>(o.prec_) + val();
  const int pr = static_cast<int>(std::min<long>({pa, pb, ring_->cap()}));
  if (is_zero() || o.is_zero()) {
    std::fill(c_.begin(), c_.end(), Int(0));
    prec_ = pr;
    return *this;
  }
  std::vector<Int> out;
  ring_->mul_coords(c_, o.c_, out);
  c_ = std::move(out);
  prec_ = pr;
  ring_->canonicalize(c_, prec_);
  return *this;
}

inline RingElement RingElement::pow(unsigned long n) const {
  RingElement r = ring_->one();
  RingElement b = *this;
  while (n) {
    if (n & 1UL) r *= b;
    n >>= 1;
    if (n) b *= b;
  }
  return r;
}

inline bool RingElement::congruent(const RingElement& o, int m) const {
  if (ring_ != o.ring_) throw PreconditionError("ring mismatch in congruence test");
  if (m > prec_ || m > o.prec_)
    throw BudgetError("congruence mod pi^" + std::to_string(m) + " requested but only " +
                      std::to_string(std::min(prec_, o.prec_)) + " digits are known");
  RingElement d = (*this - o).with_prec(m);
  return d.is_zero();
}

inline std::string RingElement::to_string() const {
  std::string s = "[";
  for (size_t i = 0; i < c_.size(); ++i) {
    if (i) s += ",";
    s += c_[i].get_str();
  }
  return s + "]@" + std::to_string(prec_);
}

// ---------------------------------------------------------------------------
// Free-function forms of the element operations.

inline Valuation valuation(const RingElement& a) { return a.valuation(); }
inline RingElement exact_div_pi(const RingElement& a, int m) { return a.ring().div_pi(a, m); }
inline RingElement unit_inverse(const RingElement& a) { return a.ring().unit_inverse(a); }

/// x / d for nonzero d; throws DivisibilityError if the quotient is not
/// integral.
inline RingElement divide_exact(const RingElement& x, const RingElement& d) {
  if (d.is_zero()) throw PreconditionError("divide_exact: divisor is zero to its known precision");
  const Ring& R = d.ring();
  const int v = d.val();
  return R.div_pi(x, v) * R.unit_inverse(R.div_pi(d, v));
}

inline std::ostream& operator<<(std::ostream& os, const RingElement& x) {
  return os << x.to_string() << " (prec " << x.prec() << ")";
}

}  // namespace ltc
