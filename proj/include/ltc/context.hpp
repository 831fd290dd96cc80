#pragma once

// A working context: tower, the two Lubin-Tate groups F_L and F_K over O_K,
// the torsion algebra of F_K, and the degree/precision budget.

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ltc/coleman_trace.hpp"
#include "ltc/lubin_tate.hpp"
#include "ltc/tower.hpp"

namespace ltc {

/// Coefficients of a Lubin-Tate polynomial, low degree first; each
/// coefficient is a coordinate list in O_K (an integer is a one-entry list).
using CoefficientList = std::vector<std::vector<Int>>;

struct ContextSpec {
  int p = 3;
  std::vector<Int> g_L;
  NestedPoly g_K;
  int D = 32;
  int N = 16;
  int prec = 0;  // 0: derived from D and N
  std::optional<CoefficientList> f_L, f_K;  // default: π x + x^q
};

/// Working precision (π_K digits) for a (D, N) budget: de-substitution
/// through [π_K] costs about q/(q-1) digits per degree and group-law
/// coefficients lose about T·v(π)/(q-1); a margin of 8 digits is added.
inline int budget_precision(int D, int N, int e_KL, int q) {
  const int desub = detail::ceil_div(q * D, q - 1);
  const int law = detail::ceil_div(D * e_KL, q - 1);
  return N + std::max(desub, law) + 8;
}

class Context {
 public:
  static std::shared_ptr<Context> build(const ContextSpec& spec) {
    if (spec.D < 1 || spec.N < 1) throw PreconditionError("budgets D and N must be positive");
    auto ctx = std::shared_ptr<Context>(new Context());
    Context& c = *ctx;
    c.spec_ = spec;
    // A first tower at low precision fixes e_KL and q before sizing the budget.
    TowerSpec probe = tower_build(spec.p, spec.g_L, spec.g_K, 4);
    const int q = static_cast<int>(std::min(probe.q_L, probe.q_K).get_si());
    const int prec = spec.prec > 0 ? spec.prec : budget_precision(spec.D, spec.N, probe.e_KL, std::max(q, 2));
    c.tower_ = tower_build(spec.p, spec.g_L, spec.g_K, prec);
    const TowerSpec& t = c.tower_;
    const Ring& R = *t.OK;
    c.fL_ = spec.f_L ? series_from_list(R, *spec.f_L) : standard(R, t.pi_L, t.q_L);
    c.fK_ = spec.f_K ? series_from_list(R, *spec.f_K) : standard(R, t.pi_K, t.q_K);
    c.GL_ = std::make_unique<FormalGroup>(FormalGroup::build(c.fL_, t.pi_L, t.q_L, spec.D, t.OL.get()));
    c.GK_ = std::make_unique<FormalGroup>(FormalGroup::build(c.fK_, t.pi_K, t.q_K, spec.D));
    return ctx;
  }

  const ContextSpec& spec() const { return spec_; }
  const TowerSpec& tower() const { return tower_; }
  const Ring& ring() const { return *tower_.OK; }
  const Ring& ring_L() const { return *tower_.OL; }
  const FormalGroup& GL() const { return *GL_; }
  const FormalGroup& GK() const { return *GK_; }
  int D() const { return spec_.D; }
  int N() const { return spec_.N; }
  int q_K() const { return static_cast<int>(tower_.q_K.get_si()); }
  int q_L() const { return static_cast<int>(tower_.q_L.get_si()); }

  /// The torsion algebra of F_K (built on first use).
  const TorsionAlgebra& algebra() const {
    std::call_once(alg_once_, [this] {
      alg_ = std::make_unique<TorsionAlgebra>(
          TorsionAlgebra::build(*GK_, tower_.OK, residue_representatives(tower_, Level::K)));
    });
    return *alg_;
  }

  /// [π_K](x) = f_K as a series of degree cap D.
  Series sigma(int D) const { return resized(fK_, D); }

  /// ℒ-matrix with rows 0..D and columns 0..J (cached).
  const TraceMatrix& trace_matrix(int D, int J) const {
    const TorsionAlgebra& A = algebra();
    std::lock_guard<std::mutex> lock(mu_);
    auto key = std::make_pair(D, J);
    auto it = matrices_.find(key);
    if (it == matrices_.end()) it = matrices_.emplace(key, std::make_unique<TraceMatrix>(A, D, J)).first;
    return *it->second;
  }

  /// Whether f_L, f_K are the standard polynomials π x + x^q.
  bool standard_L() const { return is_standard(fL_, tower_.pi_L, q_L()); }
  bool standard_K() const { return is_standard(fK_, tower_.pi_K, q_K()); }

 private:
  Context() = default;

  static Series standard(const Ring& R, const RingElement& pi, const Int& q) {
    const int qq = static_cast<int>(q.get_si());
    Series f(R, qq);
    f[1] = pi;
    f[qq] = R.one();
    return f;
  }
  static Series series_from_list(const Ring& R, const CoefficientList& c) {
    if (c.size() < 2) throw PreconditionError("Lubin-Tate polynomial needs at least two coefficients");
    std::vector<RingElement> v;
    for (const auto& coords : c) {
      if (static_cast<int>(coords.size()) > R.dim()) throw PreconditionError("coefficient has too many coordinates for O_K");
      std::vector<Int> full(static_cast<size_t>(R.dim()));
      std::copy(coords.begin(), coords.end(), full.begin());
      v.push_back(R.from_coords(full));
    }
    return Series::from(R, v, static_cast<int>(c.size()) - 1);
  }
  static bool is_standard(const Series& f, const RingElement& pi, int q) {
    if (!f.exact_tail() || f.degree() != q) return false;
    for (int n = 0; n <= q; ++n) {
      const RingElement want = n == 1 ? pi : n == q ? f.ring().one() : f.ring().zero();
      if (!(f[n] - want).is_zero()) return false;
    }
    return true;
  }

  ContextSpec spec_;
  TowerSpec tower_;
  Series fL_, fK_;
  std::unique_ptr<FormalGroup> GL_, GK_;
  mutable std::once_flag alg_once_;
  mutable std::unique_ptr<TorsionAlgebra> alg_;
  mutable std::mutex mu_;
  mutable std::map<std::pair<int, int>, std::unique_ptr<TraceMatrix>> matrices_;
};

}  // namespace ltc
