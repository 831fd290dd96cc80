#pragma once

// The torsion algebra O_K[u]/(f_K(u)/u), the roots of f_K, the trace
// operator ℒ, the Lubin-Tate root sum, and linear algebra on the matrix of ℒ
// (preimages and truncated kernels).

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ltc/lubin_tate.hpp"
#include "ltc/tower.hpp"

namespace ltc {

class TorsionAlgebra {
 public:
  /// Build A = O_K[u]/(f(u)/u) for the K-level group GK (f must be a
  /// polynomial of degree q with f(x)/x Eisenstein) and its q roots
  /// [a](u0), a running over `reps` (first entry 0).
  static TorsionAlgebra build(const FormalGroup& GK, const RingPtr& OK_ptr, const std::vector<RingElement>& reps) {
    const Series& f = GK.f();
    const Ring& OK = GK.ring();
    if (OK_ptr.get() != &OK) throw PreconditionError("torsion algebra: ring pointer does not match the group");
    const long q = GK.q().get_si();
    if (!f.exact_tail() || f.degree() != q)
      throw PreconditionError("torsion algebra: f_K must be a polynomial of degree q_K");
    if (static_cast<long>(reps.size()) != q) throw PreconditionError("torsion algebra: need q_K residue representatives");
    TorsionAlgebra T;
    T.GK_ = &GK;
    T.base_ = &OK;
    std::vector<RingElement> lower;
    for (int n = 1; n < q; ++n) lower.push_back(f[n]);
    T.d_ = static_cast<int>(q - 1);
    if (T.d_ == 1) {
      T.A_ = OK_ptr;
      T.u0_ = -f[1];
    } else {
      T.A_ = Ring::extend(OK_ptr, lower, ExtensionKind::Eisenstein);
      T.u0_ = T.A_->generator();
    }
    const Ring& A = *T.A_;
    // g(y) = f(y)/y; the other roots are [a](u0), first approximated by a
    // low-degree endomorphism and then refined by Newton's method.
    std::vector<RingElement> g, dg;
    for (int n = 1; n <= q; ++n) g.push_back(A.embed(f[n]));
    for (size_t n = 1; n < g.size(); ++n) dg.push_back(A.from_int(static_cast<long>(n)) * g[n]);
    auto horner = [](const std::vector<RingElement>& c, const RingElement& y) {
      RingElement acc = c.back();
      for (size_t i = c.size() - 1; i-- > 0;) acc = acc * y + c[i];
      return acc;
    };
    const int D0 = std::min(A.cap(), static_cast<int>(4 * q + 4));
    for (const auto& a : reps) {
      if (a.is_zero()) {
        T.roots_.push_back(A.zero());
        continue;
      }
      RingElement y = A.from_coords(T.evaluate(GK.endomorphism(a, D0), T.u0_).coords());
      RingElement gy = horner(g, y);
      for (int it = 0; it < 64 && !gy.is_zero(); ++it) {
        y = A.from_coords((y - divide_exact(gy, horner(dg, y))).coords());
        gy = horner(g, y);
      }
      // g(y) = (y - y*) · Π (y - z'), so y is within v(g(y)) - v(g'(y)) of the root y*.
      const int vd = horner(dg, y).val();
      const int prec = std::min(gy.is_zero() ? gy.prec() : gy.val(), A.cap()) - vd;
      if (prec <= vd + 1) throw ConsistencyError("torsion algebra: Newton refinement of a root did not converge");
      y = y.with_prec(prec);
      T.roots_.push_back(y);
    }
    if (!T.roots_.front().is_zero()) throw PreconditionError("torsion algebra: first representative must be 0");
    T.cache_ = std::make_shared<Cache>();
    return T;
  }

  const Ring& ring() const { return *A_; }
  const RingPtr& ring_ptr() const { return A_; }
  const Ring& base() const { return *base_; }
  const FormalGroup& group() const { return *GK_; }
  /// Degree of A over O_K (= q_K - 1); v_A = d · v_K on O_K.
  int d() const { return d_; }
  const RingElement& u0() const { return u0_; }
  const std::vector<RingElement>& roots() const { return roots_; }

  /// s(z) for s over O_K and z in A with v(z) >= 1. An unknown tail of s
  /// bounds the precision by (D+1)·v(z).
  RingElement evaluate(const Series& s, const RingElement& z) const {
    const Ring& A = *A_;
    const int D = s.cap();
    RingElement acc = A.embed(s[D]);
    for (int n = D - 1; n >= 0; --n) acc = acc * z + A.embed(s[n]);
    if (!s.exact_tail()) {
      const long bound = static_cast<long>(D + 1) * z.val();
      if (bound < acc.prec()) acc = acc.with_prec(static_cast<int>(bound));
    }
    return acc;
  }

  /// Image of an element of A that must lie in O_K (Galois-symmetric sums).
  RingElement descend(const RingElement& a) const {
    try {
      return A_->restrict_to(a, *base_);
    } catch (const ConsistencyError&) {
      throw ConsistencyError("descent failure: symmetric sum has a nonzero component outside O_K (" + a.to_string() + ")");
    }
  }
  Series descend(const Series& s) const {
    Series out(*base_, s.cap(), s.tail());
    for (int n = 0; n <= s.cap(); ++n) out[n] = descend(s[n]);
    return out;
  }

  /// G_i(x) = x ⊕_K z_i over A, to degree D; solved from f(G) = f(x), G(0) = z_i.
  const Series& translate(size_t i, int D) const {
    std::lock_guard<std::mutex> lock(cache_->mu);
    auto key = std::make_pair(i, D);
    auto it = cache_->translates.find(key);
    if (it != cache_->translates.end()) return it->second;
    return cache_->translates.emplace(key, solve_translate(roots_[i], D)).first->second;
  }

  /// The group law of `GL` with coefficients mapped into A (cached).
  const BiSeries& law_in_algebra(const FormalGroup& GL) const {
    std::lock_guard<std::mutex> lock(cache_->mu);
    auto it = cache_->laws.find(&GL);
    if (it != cache_->laws.end()) return it->second;
    return cache_->laws.emplace(&GL, GL.law().mapped(*A_)).first->second;
  }

 private:
  struct Cache {
    std::mutex mu;
    std::map<std::pair<size_t, int>, Series> translates;
    std::map<const FormalGroup*, BiSeries> laws;
  };

  Series solve_translate(const RingElement& z, int D) const {
    const Ring& A = *A_;
    const Series& f = GK_->f();
    const int q = f.degree();
    Series G(A, D, Tail::Unknown);
    G[0] = z;
    if (z.is_zero() && z.prec() >= A.cap()) {
      if (D >= 1) G[1] = A.one();
      G.set_tail(Tail::Exact);
      return G;
    }
    std::vector<RingElement> fa;
    for (int k = 0; k <= q; ++k) fa.push_back(A.embed(f[k]));
    // fprime = f'(z); zpow[k] = z^k
    std::vector<RingElement> zpow{A.one()};
    for (int k = 1; k <= q; ++k) zpow.push_back(zpow.back() * z);
    RingElement fprime = A.zero();
    for (int k = 1; k <= q; ++k) fprime += A.from_int(k) * fa[static_cast<size_t>(k)] * zpow[static_cast<size_t>(k - 1)];
    // pw[k][n] = [G^k]_n (final values)
    std::vector<std::vector<RingElement>> pw(static_cast<size_t>(q + 1),
                                             std::vector<RingElement>(static_cast<size_t>(D + 1), A.zero()));
    for (int k = 0; k <= q; ++k) pw[static_cast<size_t>(k)][0] = zpow[static_cast<size_t>(k)];
    detail::Accumulator acc(A);
    std::vector<RingElement> partial(static_cast<size_t>(q + 1), A.zero());
    for (int n = 1; n <= D; ++n) {
      // partial[k] = [G^k]_n computed with G_n = 0
      partial[1] = A.zero();
      for (int k = 2; k <= q; ++k) {
        acc.add_product(z, partial[static_cast<size_t>(k - 1)]);
        for (int m = 1; m <= n - 1; ++m) acc.add_product(G[m], pw[static_cast<size_t>(k - 1)][static_cast<size_t>(n - m)]);
        partial[static_cast<size_t>(k)] = acc.finish();
      }
      RingElement rhs = n <= f.cap() ? fa.size() > static_cast<size_t>(n) ? fa[static_cast<size_t>(n)] : A.zero() : A.zero();
      for (int k = 1; k <= q; ++k) acc.add_product(fa[static_cast<size_t>(k)], partial[static_cast<size_t>(k)]);
      rhs -= acc.finish();
      G[n] = divide_exact(rhs, fprime);
      for (int k = 1; k <= q; ++k)
        pw[static_cast<size_t>(k)][static_cast<size_t>(n)] =
            partial[static_cast<size_t>(k)] + A.from_int(k) * zpow[static_cast<size_t>(k - 1)] * G[n];
    }
    return G;
  }

  const FormalGroup* GK_ = nullptr;
  const Ring* base_ = nullptr;
  RingPtr A_;
  int d_ = 1;
  RingElement u0_;
  std::vector<RingElement> roots_;
  std::shared_ptr<Cache> cache_;
};

// ---------------------------------------------------------------------------

/// Precomputed powers of σ for repeated de-substitution through the same σ.
class Desubstituter {
 public:
  Desubstituter(const Series& sigma, int D) {
    const Ring& R = sigma.ring();
    if (!(sigma[0].is_zero() && sigma[0].prec() >= R.cap()))
      throw PreconditionError("desubstitute: sigma must have zero constant term");
    v1_ = sigma[1].val();
    if (sigma[1].is_zero() || v1_ < 1) throw PreconditionError("desubstitute: sigma_1 must be a nonzero non-unit");
    unit_inv_ = R.unit_inverse(R.div_pi(sigma[1], v1_));
    Series s(R, D, sigma.tail());
    for (int n = 0; n <= std::min(D, sigma.cap()); ++n) s[n] = sigma[n];
    powers_.push_back(Series::constant(R, D, R.one()));
    for (int j = 1; j <= D; ++j) powers_.push_back(powers_.back() * s);
  }
  int cap() const { return static_cast<int>(powers_.size()) - 1; }

  /// g with g(σ) = h; throws DivisibilityError at the first failing degree.
  Series solve(const Series& h) const {
    const Ring& R = h.ring();
    const int D = std::min(h.cap(), cap());
    Series g(R, D, Tail::Unknown);
    RingElement inv_pow = R.one();
    detail::Accumulator acc(R);
    for (int n = 0; n <= D; ++n) {
      for (int j = 0; j < n; ++j) acc.add_product(g[j], powers_[static_cast<size_t>(j)][n]);
      RingElement num = h[n] - acc.finish();
      try {
        g[n] = R.div_pi(num, n * v1_) * inv_pow;
      } catch (const DivisibilityError&) {
        throw DivisibilityError("not in the image of substitution (division failed at degree " + std::to_string(n) + ")", n);
      }
      inv_pow *= unit_inv_;
    }
    return g;
  }

 private:
  int v1_ = 1;
  RingElement unit_inv_;
  std::vector<Series> powers_;
};

/// ℒ(f) through the torsion algebra: h = Σ_z f(x ⊕ z) is formed in A,
/// descended to O_K, and de-substituted through [π_K](x) = f_K(x).
inline Series trace_operator(const TorsionAlgebra& T, const Series& f) {
  if (f.ring_ptr() != &T.base()) throw PreconditionError("trace operator: series must be over O_K");
  const int D = f.cap();
  const Ring& A = T.ring();
  Series fA = f.mapped(A);
  Series h(A, D, Tail::Unknown);
  for (size_t i = 0; i < T.roots().size(); ++i) h += compose(fA, T.translate(i, D));
  Series hK = T.descend(h);
  Series sigma(T.base(), D);
  for (int n = 0; n <= std::min(D, T.group().f().cap()); ++n) sigma[n] = T.group().f()[n];
  try {
    return desubstitute(hK, sigma);
  } catch (const DivisibilityError& e) {
    throw ConsistencyError(std::string("trace operator: ") + e.what());
  }
}

/// ⊕_L-sum over the roots z of f(x ⊕_K z), descended to O_K (not
/// de-substituted). Requires v(f(0)) >= 1.
inline Series lt_root_sum(const FormalGroup& GL, const TorsionAlgebra& T, const Series& f) {
  if (f.ring_ptr() != &T.base()) throw PreconditionError("root sum: series must be over O_K");
  if (f[0].val() < 1) throw PreconditionError("root sum: constant term must have positive valuation (divergent otherwise)");
  const int D = f.cap();
  const Ring& A = T.ring();
  const BiSeries& FL = T.law_in_algebra(GL);
  Series fA = f.mapped(A);
  Series acc(A, D);
  for (size_t i = 0; i < T.roots().size(); ++i) {
    Series term = compose(fA, T.translate(i, D));
    acc = i == 0 ? term : bi_substitute(FL, acc, term);
  }
  return T.descend(acc);
}

// ---------------------------------------------------------------------------
// The matrix of ℒ on monomials.

/// Columns ℒ(x^j), j = 0..J, as series of degree cap D, together with the
/// descended symmetric sums H_j = Σ_z (x ⊕ z)^j they come from.
class TraceMatrix {
 public:
  TraceMatrix(const TorsionAlgebra& T, int D, int J) : T_(&T), D_(D), J_(J) {
    const Ring& A = T.ring();
    std::vector<Series> sums(static_cast<size_t>(J + 1), Series(A, D, Tail::Unknown));
    for (size_t i = 0; i < T.roots().size(); ++i) {
      const Series& G = T.translate(i, D);
      Series p = Series::constant(A, D, A.one());
      for (int j = 0; j <= J; ++j) {
        sums[static_cast<size_t>(j)] += p;
        if (j < J) p = p * G;
      }
    }
    Series sigma(T.base(), D);
    for (int n = 0; n <= std::min(D, T.group().f().cap()); ++n) sigma[n] = T.group().f()[n];
    desub_ = std::make_shared<Desubstituter>(sigma, D);
    for (int j = 0; j <= J; ++j) {
      H_.push_back(T.descend(sums[static_cast<size_t>(j)]));
      try {
        cols_.push_back(desub_->solve(H_.back()));
      } catch (const DivisibilityError& e) {
        throw ConsistencyError(std::string("trace matrix column ") + std::to_string(j) + ": " + e.what());
      }
    }
  }

  int rows() const { return D_; }
  int cols() const { return J_; }
  const Series& column(int j) const { return cols_[static_cast<size_t>(j)]; }
  const RingElement& entry(int r, int j) const { return cols_[static_cast<size_t>(j)][r]; }
  const TorsionAlgebra& algebra() const { return *T_; }

  /// ℒ(f) for f of degree cap <= J (output degree cap min(D, f.cap())); an
  /// unknown tail of f bounds the symmetric sum at degree m by
  /// ceil((cap+1-m)/d) digits before de-substitution.
  Series apply(const Series& f) const {
    const Ring& R = T_->base();
    if (f.cap() > J_) throw BudgetError("trace matrix: input degree exceeds the column bound");
    const int D = std::min(D_, f.cap());
    Series h(R, D, Tail::Unknown);
    detail::Accumulator acc(R);
    for (int m = 0; m <= D; ++m) {
      for (int j = 0; j <= f.cap(); ++j) acc.add_product(f[j], H_[static_cast<size_t>(j)][m]);
      h[m] = acc.finish();
    }
    if (!f.exact_tail()) {
      const int d = T_->d();
      for (int m = 0; m <= D; ++m) {
        const int bound = detail::ceil_div(f.cap() + 1 - m, d);
        if (bound < h[m].prec()) h[m] = h[m].with_prec(std::max(0, bound));
      }
    }
    return desub_->solve(h);
  }

 private:
  const TorsionAlgebra* T_;
  int D_, J_;
  std::vector<Series> H_, cols_;
  std::shared_ptr<Desubstituter> desub_;
};

// ---------------------------------------------------------------------------
// Linear algebra over O_K / π^N.

/// Column echelon form E = M·U of a matrix over O_K, computed modulo π^N with
/// valuation-minimal pivots. U is unimodular with exact integral entries.
class ColumnEchelon {
 public:
  /// `M[r][c]` for r = 0..R-1, c = 0..C-1.
  ColumnEchelon(std::vector<std::vector<RingElement>> M, const Ring& R, int N) : R_(&R), N_(N) {
    rows_ = static_cast<int>(M.size());
    cols_ = rows_ ? static_cast<int>(M[0].size()) : 0;
    U_.assign(static_cast<size_t>(cols_), std::vector<RingElement>(static_cast<size_t>(cols_), R.zero()));
    for (int c = 0; c < cols_; ++c) U_[static_cast<size_t>(c)][static_cast<size_t>(c)] = R.one();
    for (auto& row : M)
      for (auto& e : row) e = e.with_prec(N);
    E_ = std::move(M);
    std::vector<bool> used(static_cast<size_t>(cols_), false);
    pivot_of_row_.assign(static_cast<size_t>(rows_), -1);
    for (int r = 0; r < rows_; ++r) {
      int best = -1, bestv = N;
      for (int c = 0; c < cols_; ++c) {
        if (used[static_cast<size_t>(c)]) continue;
        const RingElement& e = E_[static_cast<size_t>(r)][static_cast<size_t>(c)];
        if (e.is_zero()) continue;
        const int v = e.val();
        if (v < bestv) {
          bestv = v;
          best = c;
        }
      }
      if (best < 0) continue;
      used[static_cast<size_t>(best)] = true;
      pivot_of_row_[static_cast<size_t>(r)] = best;
      const RingElement piv = E_[static_cast<size_t>(r)][static_cast<size_t>(best)];
      for (int c = 0; c < cols_; ++c) {
        if (used[static_cast<size_t>(c)]) continue;
        const RingElement& e = E_[static_cast<size_t>(r)][static_cast<size_t>(c)];
        if (e.is_zero()) continue;
        // exact multiplier as an integral element (taken at full precision)
        RingElement m = divide_exact(e, piv);
        m = R.from_coords(m.coords());
        for (int rr = 0; rr < rows_; ++rr)
          E_[static_cast<size_t>(rr)][static_cast<size_t>(c)] -= m * E_[static_cast<size_t>(rr)][static_cast<size_t>(best)];
        for (int k = 0; k < cols_; ++k)
          U_[static_cast<size_t>(k)][static_cast<size_t>(c)] -= m * U_[static_cast<size_t>(k)][static_cast<size_t>(best)];
      }
    }
    for (int c = 0; c < cols_; ++c)
      if (!used[static_cast<size_t>(c)]) free_.push_back(c);
  }

  /// Columns of U whose image vanishes modulo π^N at the precision reached.
  std::vector<std::vector<RingElement>> kernel() const {
    std::vector<std::vector<RingElement>> out;
    for (int c : free_) {
      std::vector<RingElement> v;
      for (int k = 0; k < cols_; ++k) v.push_back(U_[static_cast<size_t>(k)][static_cast<size_t>(c)]);
      out.push_back(std::move(v));
    }
    return out;
  }

  /// Solve M t ≡ s (mod π^N) by forward substitution, free variables 0.
  std::vector<RingElement> solve(const std::vector<RingElement>& s) const {
    const Ring& R = *R_;
    std::vector<RingElement> y(static_cast<size_t>(cols_), R.zero());
    for (int r = 0; r < rows_; ++r) {
      RingElement res = s[static_cast<size_t>(r)].with_prec(N_);
      for (int r2 = 0; r2 < r; ++r2) {
        const int p = pivot_of_row_[static_cast<size_t>(r2)];
        if (p >= 0) res -= E_[static_cast<size_t>(r)][static_cast<size_t>(p)] * y[static_cast<size_t>(p)];
      }
      const int p = pivot_of_row_[static_cast<size_t>(r)];
      if (p < 0) {
        if (!res.is_zero())
          throw BudgetError("preimage: system inconsistent at degree " + std::to_string(r) +
                            " of the working truncation; increase the degree cap or precision");
        continue;
      }
      RingElement yp;
      try {
        yp = divide_exact(res, E_[static_cast<size_t>(r)][static_cast<size_t>(p)]);
      } catch (const DivisibilityError&) {
        throw BudgetError("preimage: pivot at degree " + std::to_string(r) +
                          " does not divide the residual; increase the degree cap or precision");
      }
      y[static_cast<size_t>(p)] = R.from_coords(yp.coords());
    }
    std::vector<RingElement> t(static_cast<size_t>(cols_), R.zero());
    for (int k = 0; k < cols_; ++k)
      for (int c = 0; c < cols_; ++c)
        if (!y[static_cast<size_t>(c)].is_zero()) t[static_cast<size_t>(k)] += U_[static_cast<size_t>(k)][static_cast<size_t>(c)] * y[static_cast<size_t>(c)];
    return t;
  }

  int rank() const { return cols_ - static_cast<int>(free_.size()); }

 private:
  const Ring* R_;
  int N_;
  int rows_ = 0, cols_ = 0;
  std::vector<std::vector<RingElement>> E_, U_;
  std::vector<int> pivot_of_row_;
  std::vector<int> free_;
};

/// Where a truncated computation was verified.
struct Achieved {
  int degree = -1;     // D'
  int precision = 0;   // N'
};

/// Largest m <= cap with s ≡ 0 mod π^m in degrees 0..D (bounded by the
/// known precision).
inline int verified_zero_precision(const Series& s, int D, int cap) {
  int m = cap;
  for (int n = 0; n <= std::min(D, s.cap()); ++n) {
    const RingElement& c = s[n];
    m = std::min(m, c.is_zero() ? c.prec() : c.val());
  }
  return std::max(m, 0);
}

/// Rows of the ℒ-matrix known to at least N digits in every column. Row r
/// first meets the columns near x^{q r}, so rows past J/q are not reached.
inline int reliable_rows(const TraceMatrix& M, int N) {
  int D = -1;
  const int q = M.algebra().d() + 1;
  for (int r = 0; r <= std::min(M.rows(), M.cols() / q); ++r) {
    bool ok = true;
    for (int j = 0; j <= M.cols() && ok; ++j) ok = M.entry(r, j).prec() >= N;
    if (!ok) break;
    D = r;
  }
  return D;
}

struct PreimageResult {
  Series t;
  Achieved achieved;
};

/// Some t with ℒ(t) ≡ s, from the echelon solve of the ℒ-matrix (free
/// variables zero). Verified by re-applying ℒ; (D', N') report where.
inline PreimageResult trace_preimage(const TraceMatrix& M, const Series& s, int N) {
  const Ring& R = M.algebra().base();
  for (int n = 0; n <= s.cap(); ++n)
    if (s[n].val() < 1) throw PreconditionError("preimage: s must be divisible by pi_K (coefficient of x^" + std::to_string(n) + ")");
  const int Dr = std::min(reliable_rows(M, N), s.cap());
  if (Dr < 0) throw BudgetError("preimage: the trace matrix has no row known to the requested precision");
  std::vector<std::vector<RingElement>> rows;
  std::vector<RingElement> rhs;
  for (int r = 0; r <= Dr; ++r) {
    std::vector<RingElement> row;
    for (int j = 0; j <= M.cols(); ++j) row.push_back(M.entry(r, j));
    rows.push_back(std::move(row));
    rhs.push_back(s[r]);
  }
  ColumnEchelon ech(std::move(rows), R, N);
  std::vector<RingElement> t = ech.solve(rhs);
  PreimageResult out{Series::from(R, t, M.cols(), Tail::Exact), {}};
  Series check = M.apply(out.t);
  Series diff = check.truncated(Dr) - s.truncated(Dr);
  out.achieved.degree = Dr;
  out.achieved.precision = verified_zero_precision(diff, Dr, N);
  return out;
}

struct KernelResult {
  std::vector<Series> basis;
  Achieved achieved;  // every basis element verified to (D', N')
};

/// Truncated basis of the nullspace of ℒ - α (α = 0 for 𝒞) on polynomials of
/// degree <= J, modulo π^N in degrees 0..D'. For α != 0 the truncation is
/// square (J = D'), the meaningful truncation of an operator with identity
/// part. Zero vectors are never returned.
inline KernelResult kernel_basis(const TraceMatrix& M, int N, const std::optional<RingElement>& alpha = std::nullopt) {
  const Ring& R = M.algebra().base();
  int Dr = reliable_rows(M, N);
  if (Dr < 0) return {{}, {-1, 0}};
  const int J = alpha ? Dr : M.cols();
  std::vector<std::vector<RingElement>> rows;
  for (int r = 0; r <= Dr; ++r) {
    std::vector<RingElement> row;
    for (int j = 0; j <= J; ++j) {
      RingElement e = M.entry(r, j);
      if (alpha && r == j) e -= *alpha;
      row.push_back(e);
    }
    rows.push_back(std::move(row));
  }
  ColumnEchelon ech(std::move(rows), R, N);
  KernelResult out;
  out.achieved = {Dr, N};
  for (auto& v : ech.kernel()) {
    Series h = Series::from(R, v, J, Tail::Exact);
    if (h.is_zero()) continue;
    Series img = M.apply(h.cap() <= M.cols() ? h : h.truncated(M.cols()));
    if (alpha) img -= (*alpha) * h;
    out.achieved.precision = std::min(out.achieved.precision, verified_zero_precision(img, Dr, N));
    out.basis.push_back(std::move(h));
  }
  return out;
}

}  // namespace ltc
