#pragma once

// Truncated power series over a Ring.
//
// A Series holds the coefficients of x^0..x^D. Each coefficient carries its
// own absolute precision. The tail flag records what is known about the
// coefficients beyond D: Exact means they are zero (the series is a
// polynomial), Unknown means they are arbitrary integral elements. Unknown
// tails only matter when a series is evaluated at a non-nilpotent argument
// (composition with a nonzero constant term, evaluation at torsion points);
// those operations convert the tail into a per-coefficient precision cap.

#include <algorithm>
#include <atomic>
#include <iostream>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "ltc/local_ring.hpp"

namespace ltc {

enum class Tail { Exact, Unknown };

inline constexpr int kUnbounded = std::numeric_limits<int>::max() / 4;

namespace detail {
inline std::atomic<bool>& warnings_enabled() {
  static std::atomic<bool> on{false};
  return on;
}
inline void warn(const std::string& msg) {
  if (warnings_enabled().load(std::memory_order_relaxed)) std::clog << "warning: " << msg << '\n';
}
}  // namespace detail

namespace detail {
// Sum of products accumulated on raw coordinates; the precision follows the
// product rule min(x.prec + v(y), y.prec + v(x)) over all terms.
class Accumulator {
 public:
  explicit Accumulator(const Ring& R) : R_(&R), c_(static_cast<size_t>(R.dim())), prec_(R.cap()) {}
  void add_product(const RingElement& x, int vx, const RingElement& y, int vy) {
    prec_ = std::min({prec_, static_cast<long>(x.prec()) + vy, static_cast<long>(y.prec()) + vx});
    if (x.is_zero() || y.is_zero()) return;
    R_->mul_coords(x.coords(), y.coords(), tmp_);
    for (size_t t = 0; t < c_.size(); ++t) c_[t] += tmp_[t];
  }
  void add_product(const RingElement& x, const RingElement& y) { add_product(x, x.val(), y, y.val()); }
  void add(const RingElement& x) {
    prec_ = std::min(prec_, static_cast<long>(x.prec()));
    for (size_t t = 0; t < c_.size(); ++t) c_[t] += x.coords()[t];
  }
  RingElement finish() {
    RingElement r(R_, std::move(c_), static_cast<int>(prec_));
    c_.assign(static_cast<size_t>(R_->dim()), Int(0));
    prec_ = R_->cap();
    return r;
  }

 private:
  const Ring* R_;
  std::vector<Int> c_;
  long prec_;
  std::vector<Int> tmp_;
};
}  // namespace detail

/// Enable warnings (degree truncation notices) on std::clog.
inline void set_warnings(bool on) { detail::warnings_enabled() = on; }

class Series {
 public:
  Series() = default;
  Series(const Ring& R, int D, Tail tail = Tail::Exact)
      : ring_(&R), c_(static_cast<size_t>(D + 1), R.zero()), tail_(tail) {
    if (D < 0) throw PreconditionError("degree cap must be nonnegative");
  }

  /// Build from coefficients; shorter input is zero-padded, longer input is
  /// truncated (which turns the tail Unknown if something nonzero is cut).
  static Series from(const Ring& R, std::vector<RingElement> c, int D, Tail tail = Tail::Exact) {
    Series s(R, D, tail);
    for (size_t i = 0; i < c.size(); ++i) {
      if (c[i].ring_ptr() != &R) throw PreconditionError("Series::from: coefficient from another ring");
      if (static_cast<int>(i) <= D) {
        s.c_[i] = std::move(c[i]);
      } else if (!c[i].is_zero()) {
        s.tail_ = Tail::Unknown;
      }
    }
    return s;
  }
  static Series x(const Ring& R, int D) { return monomial(R, 1, D, R.one()); }
  static Series constant(const Ring& R, int D, const RingElement& c) { return monomial(R, 0, D, c); }
  static Series monomial(const Ring& R, int n, int D, const RingElement& c) {
    Series s(R, D);
    if (n <= D) {
      s.c_[static_cast<size_t>(n)] = c;
    } else if (!c.is_zero()) {
      s.tail_ = Tail::Unknown;
    }
    return s;
  }

  const Ring& ring() const { return *ring_; }
  const Ring* ring_ptr() const { return ring_; }
  bool valid() const { return ring_ != nullptr; }
  int cap() const { return static_cast<int>(c_.size()) - 1; }
  Tail tail() const { return tail_; }
  bool exact_tail() const { return tail_ == Tail::Exact; }
  void set_tail(Tail t) { tail_ = t; }

  const RingElement& operator[](int n) const { return c_[static_cast<size_t>(n)]; }
  RingElement& operator[](int n) { return c_[static_cast<size_t>(n)]; }
  const std::vector<RingElement>& coeffs() const { return c_; }

  /// Index of the highest nonzero coefficient, -1 for the zero series.
  int degree() const {
    for (int n = cap(); n >= 0; --n)
      if (!c_[static_cast<size_t>(n)].is_zero()) return n;
    return -1;
  }
  /// True for the zero polynomial known to full ring precision.
  bool is_exact_zero() const {
    if (!exact_tail()) return false;
    for (const auto& c : c_)
      if (!c.is_zero() || c.prec() < ring_->cap()) return false;
    return true;
  }
  bool is_zero() const {
    for (const auto& c : c_)
      if (!c.is_zero()) return false;
    return true;
  }
  /// Guaranteed valuation of the series (min over coefficients).
  int val() const {
    int v = kUnbounded;
    for (const auto& c : c_) v = std::min(v, c.val());
    return v;
  }
  /// Minimum coefficient precision over degrees 0..upto.
  int min_prec(int upto = -1) const {
    if (upto < 0 || upto > cap()) upto = cap();
    int p = kUnbounded;
    for (int n = 0; n <= upto; ++n) p = std::min(p, c_[static_cast<size_t>(n)].prec());
    return p;
  }
  /// Largest D' such that every coefficient of degree <= D' is known to at
  /// least `prec`; -1 if even the constant term is not.
  int degree_at_prec(int prec) const {
    int d = -1;
    for (int n = 0; n <= cap(); ++n) {
      if (c_[static_cast<size_t>(n)].prec() < prec) break;
      d = n;
    }
    return d;
  }

  Series truncated(int D) const {
    if (D >= cap()) return *this;
    Series s = *this;
    bool lost = false;
    for (int n = D + 1; n <= cap(); ++n) lost |= !c_[static_cast<size_t>(n)].is_zero();
    s.c_.resize(static_cast<size_t>(D + 1));
    if (lost) s.tail_ = Tail::Unknown;
    return s;
  }
  /// Embed the coefficients into an extension ring.
  Series mapped(const Ring& target) const {
    Series s(target, cap(), tail_);
    for (int n = 0; n <= cap(); ++n) s.c_[static_cast<size_t>(n)] = target.embed(c_[static_cast<size_t>(n)]);
    return s;
  }
  Series with_prec(int p) const {
    Series s = *this;
    for (auto& c : s.c_) c = c.with_prec(p);
    return s;
  }

  Series operator-() const {
    Series s = *this;
    for (auto& c : s.c_) c = -c;
    return s;
  }
  Series& operator+=(const Series& o) { return addsub(o, false); }
  Series& operator-=(const Series& o) { return addsub(o, true); }
  friend Series operator+(Series a, const Series& b) { return a += b; }
  friend Series operator-(Series a, const Series& b) { return a -= b; }
  friend Series operator*(const Series& a, const Series& b);
  friend Series operator*(const RingElement& a, Series s) {
    for (auto& c : s.c_) c = a * c;
    return s;
  }

  friend bool operator==(const Series& a, const Series& b) {
    return a.ring_ == b.ring_ && a.tail_ == b.tail_ && a.c_ == b.c_;
  }

  std::string to_string() const {
    std::string s;
    for (int n = 0; n <= cap(); ++n) {
      if (c_[static_cast<size_t>(n)].is_zero()) continue;
      if (!s.empty()) s += " + ";
      s += c_[static_cast<size_t>(n)].to_string() + "*x^" + std::to_string(n);
    }
    return s.empty() ? "0" : s;
  }

 private:
  Series& addsub(const Series& o, bool sub) {
    if (ring_ != o.ring_) throw PreconditionError("series ring mismatch");
    if (o.cap() < cap()) {
      detail::warn("mixed degree caps: truncating to " + std::to_string(o.cap()));
      *this = truncated(o.cap());
    }
    for (int n = 0; n <= cap(); ++n) {
      if (sub)
        c_[static_cast<size_t>(n)] -= o.c_[static_cast<size_t>(n)];
      else
        c_[static_cast<size_t>(n)] += o.c_[static_cast<size_t>(n)];
    }
    if (!o.exact_tail()) tail_ = Tail::Unknown;
    return *this;
  }

  const Ring* ring_ = nullptr;
  std::vector<RingElement> c_;
  Tail tail_ = Tail::Exact;
};

inline Series operator*(const Series& a, const Series& b) {
  if (a.ring_ != b.ring_) throw PreconditionError("series ring mismatch");
  const int D = std::min(a.cap(), b.cap());
  if (a.cap() != b.cap()) detail::warn("mixed degree caps: truncating to " + std::to_string(D));
  const Ring& R = *a.ring_;
  Series r(R, D);
  const int da = a.degree(), db = b.degree();
  std::vector<Int> tmp;
  for (int n = 0; n <= D; ++n) {
    // Accumulate raw coordinates, then fix the precision once.
    std::vector<Int> acc(static_cast<size_t>(R.dim()));
    long pr = R.cap();
    for (int i = 0; i <= n; ++i) {
      const RingElement& x = a.c_[static_cast<size_t>(i)];
      const RingElement& y = b.c_[static_cast<size_t>(n - i)];
      const long pa = static_cast<long>(x.prec()) + y.val();
      const long pb = static_cast<long>(y.prec()) + x.val();
      pr = std::min({pr, pa, pb});
      if (x.is_zero() || y.is_zero()) continue;
      R.mul_coords(x.coords(), y.coords(), tmp);
      for (size_t t = 0; t < acc.size(); ++t) acc[t] += tmp[t];
    }
    r.c_[static_cast<size_t>(n)] = RingElement(&R, std::move(acc), static_cast<int>(pr));
  }
  const bool az = a.exact_tail() && da < 0, bz = b.exact_tail() && db < 0;
  if (az || bz)
    r.tail_ = Tail::Exact;
  else if (a.exact_tail() && b.exact_tail() && da + db <= D)
    r.tail_ = Tail::Exact;
  else
    r.tail_ = Tail::Unknown;
  return r;
}

inline Series series_pow(const Series& s, int n) {
  Series r = Series::constant(s.ring(), s.cap(), s.ring().one());
  for (int i = 0; i < n; ++i) r = r * s;
  return r;
}

/// Multiplicative inverse of a series with unit constant term.
/// s at degree cap D: truncated, or padded with zeros (exact for a
/// polynomial, unknown otherwise).
inline Series resized(const Series& s, int D) {
  if (D <= s.cap()) return s.truncated(D);
  Series out(s.ring(), D, s.tail());
  for (int n = 0; n <= s.cap(); ++n) out[n] = s[n];
  if (!s.exact_tail())
    for (int n = s.cap() + 1; n <= D; ++n) out[n] = s.ring().zero().with_prec(0);
  return out;
}

inline Series series_inverse(const Series& a) {
  const Ring& R = a.ring();
  if (!a[0].is_unit()) throw PreconditionError("series_inverse: constant term is not a unit");
  const int D = a.cap();
  Series r(R, D, Tail::Unknown);
  RingElement inv0 = R.unit_inverse(a[0]);
  r[0] = inv0;
  for (int n = 1; n <= D; ++n) {
    RingElement acc = R.zero();
    for (int k = 1; k <= n; ++k) acc += a[k] * r[n - k];
    r[n] = -(acc * inv0);
  }
  if (a.exact_tail() && a.degree() == 0) r.set_tail(Tail::Exact);
  return r;
}

/// Apply a per-coefficient precision cap: coefficient m is known to at most
/// `base + (slope * (D + 1 - m))` digits (used for tails of truncated
/// arguments). `slope` is the guaranteed valuation gained per omitted degree.
inline void cap_precision_by_tail(Series& s, long slope) {
  const int D = s.cap();
  for (int m = 0; m <= D; ++m) {
    const long bound = slope * (D + 1 - m);
    if (bound < s[m].prec()) s[m] = s[m].with_prec(static_cast<int>(bound));
  }
}

/// f(g(x)) truncated at the common degree cap.
///
/// Admissible when g(0) has positive valuation, or f has an exact tail (is a
/// polynomial). With g(0) != 0 and an Unknown tail on f, the omitted terms
/// f_n g^n (n > D) are bounded by (n - m) * v(g(0)) at degree m and the
/// output precision is capped accordingly.
inline Series compose(const Series& f, const Series& g) {
  if (f.ring_ptr() != g.ring_ptr()) throw PreconditionError("compose: ring mismatch");
  const Ring& R = f.ring();
  const int D = std::min(f.cap(), g.cap());
  const RingElement& g0 = g[0];
  const bool g0_exact_zero = g0.is_zero() && g0.prec() >= R.cap();
  const int v0 = g0.val();
  if (v0 == 0 && !f.exact_tail())
    throw PreconditionError("compose: inner series has a unit constant term and the outer series is not a polynomial (divergent)");
  int top = f.exact_tail() ? std::max(f.degree(), 0) : f.cap();
  if (g0_exact_zero) top = std::min(top, D);
  Series gg = g.truncated(D);
  Series r = Series::constant(R, D, f[top]);
  for (int n = top - 1; n >= 0; --n) {
    r = r * gg;
    r[0] += f[n];
  }
  if (!f.exact_tail() && !g0_exact_zero) cap_precision_by_tail(r, v0);
  // Result tail: exact only for polynomial compositions that fit.
  const int df = f.degree(), dg = g.degree();
  if (f.exact_tail() && g.exact_tail() && (df <= 0 || static_cast<long>(df) * std::max(dg, 0) <= D))
    r.set_tail(Tail::Exact);
  else
    r.set_tail(Tail::Unknown);
  return r;
}

// ---------------------------------------------------------------------------
// Bivariate series with total-degree truncation.

class BiSeries {
 public:
  BiSeries() = default;
  BiSeries(const Ring& R, int T, Tail tail = Tail::Exact)
      : ring_(&R), T_(T), c_(static_cast<size_t>((T + 1) * (T + 2) / 2), R.zero()), tail_(tail) {}

  static int index(int i, int j) {
    const int n = i + j;
    return n * (n + 1) / 2 + j;
  }
  const Ring& ring() const { return *ring_; }
  const Ring* ring_ptr() const { return ring_; }
  int cap() const { return T_; }
  Tail tail() const { return tail_; }
  void set_tail(Tail t) { tail_ = t; }
  /// Coefficient of x^i y^j.
  const RingElement& at(int i, int j) const { return c_[static_cast<size_t>(index(i, j))]; }
  RingElement& at(int i, int j) { return c_[static_cast<size_t>(index(i, j))]; }

  static BiSeries x(const Ring& R, int T) {
    BiSeries b(R, T);
    if (T >= 1) b.at(1, 0) = R.one();
    return b;
  }
  static BiSeries y(const Ring& R, int T) {
    BiSeries b(R, T);
    if (T >= 1) b.at(0, 1) = R.one();
    return b;
  }
  /// Embed a univariate series in x (or in y).
  static BiSeries from_x(const Series& s, int T, bool in_y = false) {
    BiSeries b(s.ring(), T, s.exact_tail() && s.degree() <= T ? Tail::Exact : Tail::Unknown);
    for (int n = 0; n <= std::min(T, s.cap()); ++n) (in_y ? b.at(0, n) : b.at(n, 0)) = s[n];
    if (s.cap() < T) b.tail_ = s.exact_tail() ? b.tail_ : Tail::Unknown;
    return b;
  }

  BiSeries& operator+=(const BiSeries& o) {
    check(o);
    for (size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
    if (o.tail_ == Tail::Unknown) tail_ = Tail::Unknown;
    return *this;
  }
  BiSeries& operator-=(const BiSeries& o) {
    check(o);
    for (size_t k = 0; k < c_.size(); ++k) c_[k] -= o.c_[k];
    if (o.tail_ == Tail::Unknown) tail_ = Tail::Unknown;
    return *this;
  }
  friend BiSeries operator+(BiSeries a, const BiSeries& b) { return a += b; }
  friend BiSeries operator-(BiSeries a, const BiSeries& b) { return a -= b; }
  friend BiSeries operator*(const BiSeries& a, const BiSeries& b) {
    a.check(b);
    const Ring& R = *a.ring_;
    BiSeries r(R, a.T_, Tail::Unknown);
    for (int n = 0; n <= a.T_; ++n)
      for (int j = 0; j <= n; ++j) {
        RingElement acc = R.zero();
        for (int m = 0; m <= n; ++m)
          for (int jb = std::max(0, j - (n - m)); jb <= std::min(j, m); ++jb) {
            // a contributes degree m with y-degree jb; b contributes n-m with y-degree j-jb
            const RingElement& x = a.at(m - jb, jb);
            if (x.is_zero()) continue;
            const RingElement& y = b.at(n - m - (j - jb), j - jb);
            if (y.is_zero()) continue;
            acc += x * y;
          }
        r.at(n - j, j) = acc;
      }
    const bool az = a.is_exact_zero(), bz = b.is_exact_zero();
    if (az || bz || (a.tail_ == Tail::Exact && b.tail_ == Tail::Exact && a.total_degree() + b.total_degree() <= a.T_))
      r.tail_ = Tail::Exact;
    return r;
  }
  int total_degree() const {
    for (int n = T_; n >= 0; --n)
      for (int j = 0; j <= n; ++j)
        if (!at(n - j, j).is_zero()) return n;
    return -1;
  }
  bool is_exact_zero() const { return tail_ == Tail::Exact && total_degree() < 0; }
  BiSeries mapped(const Ring& target) const {
    BiSeries b(target, T_, tail_);
    for (size_t k = 0; k < c_.size(); ++k) b.c_[k] = target.embed(c_[k]);
    return b;
  }
  /// Swap the roles of x and y.
  BiSeries swapped() const {
    BiSeries r(*ring_, T_, tail_);
    for (int n = 0; n <= T_; ++n)
      for (int j = 0; j <= n; ++j) r.at(j, n - j) = at(n - j, j);
    return r;
  }
  /// Coefficient series of y^j (as a series in x, degree cap T - j).
  Series y_slice(int j) const {
    Series s(*ring_, T_ - j, tail_);
    for (int i = 0; i + j <= T_; ++i) s[i] = at(i, j);
    return s;
  }

  friend bool operator==(const BiSeries& a, const BiSeries& b) {
    return a.ring_ == b.ring_ && a.T_ == b.T_ && a.tail_ == b.tail_ && a.c_ == b.c_;
  }

 private:
  void check(const BiSeries& o) const {
    if (ring_ != o.ring_) throw PreconditionError("bivariate series ring mismatch");
    if (T_ != o.T_) throw PreconditionError("bivariate series degree-cap mismatch");
  }
  const Ring* ring_ = nullptr;
  int T_ = 0;
  std::vector<RingElement> c_;
  Tail tail_ = Tail::Exact;
};

/// F(g(x), h(x)) truncated at min(deg caps of g, h).
///
/// Admissible when g(0), h(0) have positive valuation or F is a polynomial.
/// Terms of F beyond its total-degree cap T contribute valuation at least
/// (T + 1 - m) * min(v(g0), v(h0)) at degree m; the output precision is capped
/// by that bound when F's tail is unknown.
inline Series bi_substitute(const BiSeries& F, const Series& g, const Series& h) {
  if (F.ring_ptr() != g.ring_ptr() || g.ring_ptr() != h.ring_ptr())
    throw PreconditionError("bi_substitute: ring mismatch");
  const Ring& R = g.ring();
  const int D = std::min(g.cap(), h.cap());
  const int T = F.cap();
  auto exact_zero = [&](const RingElement& c) { return c.is_zero() && c.prec() >= R.cap(); };
  const bool gz = exact_zero(g[0]), hz = exact_zero(h[0]);
  const int v0 = std::min(gz ? kUnbounded : g[0].val(), hz ? kUnbounded : h[0].val());
  if (v0 == 0 && F.tail() == Tail::Unknown)
    throw PreconditionError("bi_substitute: unit constant term with a non-polynomial law (divergent)");
  Series gg = g.truncated(D), hh = h.truncated(D);
  const int imax = gz ? std::min(T, D) : T;
  std::vector<Series> gp;
  gp.reserve(static_cast<size_t>(imax + 1));
  gp.push_back(Series::constant(R, D, R.one()));
  for (int i = 1; i <= imax; ++i) gp.push_back(gp.back() * gg);
  const int jmax = hz ? std::min(T, D) : T;
  Series acc(R, D);
  std::vector<Int> tmp;
  for (int j = jmax; j >= 0; --j) {
    acc = acc * hh;
    // acc += sum_i c_ij g^i
    for (int n = 0; n <= D; ++n) {
      std::vector<Int> sum(static_cast<size_t>(R.dim()));
      long pr = R.cap();
      bool any = false;
      for (int i = 0; i <= std::min(imax, T - j); ++i) {
        const RingElement& c = F.at(i, j);
        const RingElement& x = gp[static_cast<size_t>(i)][n];
        pr = std::min({pr, static_cast<long>(c.prec()) + x.val(), static_cast<long>(x.prec()) + c.val()});
        if (c.is_zero() || x.is_zero()) continue;
        R.mul_coords(c.coords(), x.coords(), tmp);
        for (size_t t = 0; t < sum.size(); ++t) sum[t] += tmp[t];
        any = true;
      }
      if (any || pr < R.cap()) acc[n] += RingElement(&R, std::move(sum), static_cast<int>(pr));
    }
  }
  if (F.tail() == Tail::Unknown && v0 < kUnbounded) {
    for (int m = 0; m <= D; ++m) {
      const long bound = static_cast<long>(v0) * std::max(0, T + 1 - m);
      if (bound < acc[m].prec()) acc[m] = acc[m].with_prec(static_cast<int>(bound));
    }
  }
  acc.set_tail(Tail::Unknown);
  if (F.tail() == Tail::Exact && g.exact_tail() && h.exact_tail()) {
    const long deg = static_cast<long>(F.total_degree()) * std::max({g.degree(), h.degree(), 0});
    if (deg <= D) acc.set_tail(Tail::Exact);
  }
  return acc;
}

// ---------------------------------------------------------------------------
// De-substitution: recover g from h = g(sigma(x)).

struct DesubstitutionResult {
  Series g;
  Series residual;         // h - g(sigma(x)); zero when h is in the image
  int failed_degree = -1;  // first degree where the division was impossible
};

/// Solve g(sigma(x)) = h by triangular elimination. sigma must have zero
/// constant term and linear coefficient of positive valuation. Coefficient
/// g_n loses n * v(sigma_1) digits of precision. Never throws on non-images:
/// the failing coefficient is set to zero and reported with the residual.
inline DesubstitutionResult desubstitute_checked(const Series& h, const Series& sigma) {
  const Ring& R = h.ring();
  if (sigma.ring_ptr() != &R) throw PreconditionError("desubstitute: ring mismatch");
  if (!(sigma[0].is_zero() && sigma[0].prec() >= R.cap()))
    throw PreconditionError("desubstitute: sigma must have zero constant term");
  const int v1 = sigma[1].val();
  if (v1 < 1 || sigma[1].is_zero()) throw PreconditionError("desubstitute: sigma_1 must be a nonzero non-unit");
  const int D = std::min(h.cap(), sigma.cap());
  const RingElement unit = R.div_pi(sigma[1], v1);
  const RingElement unit_inv = R.unit_inverse(unit);
  Series s = sigma.truncated(D);
  std::vector<Series> powers;  // sigma^j
  powers.push_back(Series::constant(R, D, R.one()));
  for (int j = 1; j <= D; ++j) powers.push_back(powers.back() * s);
  DesubstitutionResult out{Series(R, D, h.tail()), Series(R, D), -1};
  RingElement inv_pow = R.one();
  for (int n = 0; n <= D; ++n) {
    RingElement num = h[n];
    for (int j = 0; j < n; ++j) num -= out.g[j] * powers[static_cast<size_t>(j)][n];
    try {
      out.g[n] = R.div_pi(num, n * v1) * inv_pow;
    } catch (const DivisibilityError&) {
      if (out.failed_degree < 0) out.failed_degree = n;
      out.g[n] = R.zero();
    }
    inv_pow *= unit_inv;
  }
  Series back = compose(out.g.truncated(D), s);
  back.set_tail(h.tail());
  out.residual = h.truncated(D) - back;
  return out;
}

/// As desubstitute_checked, but a non-image raises DivisibilityError carrying
/// the failing degree.
inline Series desubstitute(const Series& h, const Series& sigma) {
  DesubstitutionResult r = desubstitute_checked(h, sigma);
  if (r.failed_degree >= 0)
    throw DivisibilityError("desubstitute: not in the image (division failed at degree " +
                                std::to_string(r.failed_degree) + ")",
                            r.failed_degree);
  return r.g;
}

// ---------------------------------------------------------------------------
// Elements and series over the fraction field: value = num / pi^shift.

struct FracElement {
  RingElement num;
  int shift = 0;

  static FracElement of(const RingElement& x) { return {x, 0}; }
  int val() const { return num.val() - shift; }
  int prec() const { return num.prec() - shift; }
  bool is_zero() const { return num.is_zero(); }

  /// Remove powers of pi common to numerator and denominator.
  FracElement normalized() const {
    if (shift <= 0 || num.is_zero()) return *this;
    const int k = std::min(shift, num.val());
    if (k <= 0) return *this;
    return {num.ring().div_pi(num, k), shift - k};
  }
  /// Integral value; throws DivisibilityError when the value is known to have
  /// negative valuation.
  RingElement to_integral() const {
    if (shift <= 0) return num * num.ring().uniformizer().pow(static_cast<unsigned long>(-shift));
    return num.ring().div_pi(num, shift);
  }
  friend FracElement operator*(const FracElement& a, const FracElement& b) {
    return FracElement{a.num * b.num, a.shift + b.shift}.normalized();
  }
  friend FracElement operator+(const FracElement& a, const FracElement& b) {
    const int s = std::max(a.shift, b.shift);
    const RingElement& pi = a.num.ring().uniformizer();
    RingElement x = a.num * pi.pow(static_cast<unsigned long>(s - a.shift));
    RingElement y = b.num * pi.pow(static_cast<unsigned long>(s - b.shift));
    return FracElement{x + y, s}.normalized();
  }
  FracElement operator-() const { return {-num, shift}; }
  friend FracElement operator-(const FracElement& a, const FracElement& b) { return a + (-b); }
  /// Equal as fraction-field elements at the common precision.
  bool congruent(const FracElement& o, int m) const {
    const int s = std::max(shift, o.shift);
    const RingElement& pi = num.ring().uniformizer();
    RingElement x = num * pi.pow(static_cast<unsigned long>(s - shift));
    RingElement y = o.num * pi.pow(static_cast<unsigned long>(s - o.shift));
    return x.congruent(y, m + s);
  }
};

struct FracSeries {
  std::vector<FracElement> c;
  Tail tail = Tail::Unknown;

  int cap() const { return static_cast<int>(c.size()) - 1; }
  const Ring& ring() const { return c.front().num.ring(); }
  /// Largest denominator exponent among coefficients 0..upto.
  int max_shift(int upto = -1) const {
    if (upto < 0 || upto > cap()) upto = cap();
    int s = 0;
    for (int n = 0; n <= upto; ++n) s = std::max(s, c[static_cast<size_t>(n)].shift);
    return s;
  }
  /// pi^S * this as an integral series (S >= max_shift()).
  Series scaled(int S) const {
    const Ring& R = ring();
    Series out(R, cap(), tail);
    for (int n = 0; n <= cap(); ++n) {
      const FracElement& e = c[static_cast<size_t>(n)];
      out[n] = FracElement{e.num, e.shift - S}.to_integral();
    }
    return out;
  }
  static FracSeries of(const Series& s) {
    FracSeries f;
    for (const auto& x : s.coeffs()) f.c.push_back(FracElement::of(x));
    f.tail = s.tail();
    return f;
  }
};

inline FracSeries frac_mul(const FracSeries& a, const FracSeries& b) {
  const int D = std::min(a.cap(), b.cap());
  FracSeries r;
  const Ring& R = a.ring();
  for (int n = 0; n <= D; ++n) {
    FracElement acc{R.zero(), 0};
    for (int i = 0; i <= n; ++i) {
      const auto& x = a.c[static_cast<size_t>(i)];
      const auto& y = b.c[static_cast<size_t>(n - i)];
      if (x.is_zero() && y.is_zero()) continue;
      acc = acc + x * y;
    }
    r.c.push_back(acc);
  }
  return r;
}

inline FracSeries frac_add(const FracSeries& a, const FracSeries& b, bool sub = false) {
  const int D = std::min(a.cap(), b.cap());
  FracSeries r;
  for (int n = 0; n <= D; ++n)
    r.c.push_back(sub ? a.c[static_cast<size_t>(n)] - b.c[static_cast<size_t>(n)]
                      : a.c[static_cast<size_t>(n)] + b.c[static_cast<size_t>(n)]);
  r.tail = (a.tail == Tail::Exact && b.tail == Tail::Exact) ? Tail::Exact : Tail::Unknown;
  return r;
}

/// f(g) for fractional f and fractional g with g(0) = 0 exactly.
inline FracSeries frac_compose_nilpotent(const FracSeries& f, const FracSeries& g) {
  const int D = std::min(f.cap(), g.cap());
  const Ring& R = f.ring();
  FracSeries r;
  r.c.assign(static_cast<size_t>(D + 1), FracElement{R.zero(), 0});
  r.c[0] = f.c[static_cast<size_t>(D)];
  for (int n = D - 1; n >= 0; --n) {
    r = frac_mul(r, g);
    r.c[0] = r.c[0] + f.c[static_cast<size_t>(n)];
  }
  return r;
}

// ---------------------------------------------------------------------------
// Calculus.

/// Termwise derivative. With an unknown tail the top coefficient (D+1)f_{D+1}
/// is only known to the valuation of D+1.
inline Series derivative(const Series& f) {
  const Ring& R = f.ring();
  const int D = f.cap();
  Series r(R, D, f.tail());
  for (int n = 0; n < D; ++n) r[n] = R.from_int(n + 1) * f[n + 1];
  if (!f.exact_tail()) {
    const int v = R.ramification() * detail::padic_val(Int(D + 1), static_cast<unsigned long>(R.p()));
    r[D] = R.zero().with_prec(v);
  }
  return r;
}

/// Termwise antiderivative with zero constant term; coefficient n+1 is
/// f_n/(n+1) and carries the denominator pi^{v(n+1)}. The result has degree
/// cap D+1 (its top coefficient is determined by f_D).
inline FracSeries antiderivative(const Series& f) {
  const Ring& R = f.ring();
  const int D = f.cap();
  FracSeries r;
  r.c.push_back(FracElement{R.zero(), 0});
  for (int n = 0; n <= D; ++n) {
    RingElement np1 = R.from_int(n + 1);
    const int v = np1.val();
    RingElement u = R.unit_inverse(R.div_pi(np1, v));
    r.c.push_back(FracElement{f[n] * u, v}.normalized());
  }
  r.tail = f.tail();
  return r;
}

// ---------------------------------------------------------------------------
// Congruences.

/// Sentinel for congruent_mod: require equality at every coefficient's full
/// precision (no precision requirement is imposed).
inline constexpr int kFullPrecision = -1;

struct Congruence {
  bool holds = true;
  int first_failure = -1;  // degree of the first differing coefficient
};

/// Is f ≡ g mod (pi^m, x^{deg+1})? Throws BudgetError if some compared
/// coefficient is known to fewer than m digits. m = kFullPrecision compares
/// at whatever precision each coefficient difference carries.
inline Congruence congruent_mod(const Series& f, const Series& g, int m, int deg) {
  if (f.ring_ptr() != g.ring_ptr()) throw PreconditionError("congruent_mod: ring mismatch");
  deg = std::min({deg, f.cap(), g.cap()});
  for (int n = 0; n <= deg; ++n) {
    RingElement d = f[n] - g[n];
    if (m == kFullPrecision) {
      if (!d.is_zero()) return {false, n};
      continue;
    }
    if (d.prec() < m)
      throw BudgetError("congruent_mod: degree " + std::to_string(n) + " known to " + std::to_string(d.prec()) +
                        " digits, " + std::to_string(m) + " requested");
    if (!d.with_prec(m).is_zero()) return {false, n};
  }
  return {true, -1};
}

/// Bivariate congruence on total degrees 0..deg.
inline Congruence congruent_mod(const BiSeries& f, const BiSeries& g, int m, int deg) {
  if (f.ring_ptr() != g.ring_ptr()) throw PreconditionError("congruent_mod: ring mismatch");
  deg = std::min({deg, f.cap(), g.cap()});
  for (int n = 0; n <= deg; ++n)
    for (int j = 0; j <= n; ++j) {
      RingElement d = f.at(n - j, j) - g.at(n - j, j);
      if (m == kFullPrecision) {
        if (!d.is_zero()) return {false, n};
        continue;
      }
      if (d.prec() < m)
        throw BudgetError("congruent_mod: total degree " + std::to_string(n) + " known to " +
                          std::to_string(d.prec()) + " digits, " + std::to_string(m) + " requested");
      if (!d.with_prec(m).is_zero()) return {false, n};
    }
  return {true, -1};
}

}  // namespace ltc
