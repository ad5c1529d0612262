#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mltower/fp_module.hpp"
#include "mltower/hom.hpp"
#include "mltower/matrix.hpp"
#include "mltower/ring.hpp"

namespace mlt {

// ---------------------------------------------------------------------------
// Torsion and divisibility structure.

template <euclidean_ring R>
struct TorsionData {
  Submodule<R> sub;
  typename R::Elem annihilator;  // kills the torsion part; 1 when torsion-free
};

template <euclidean_ring R>
TorsionData<R> torsion_submodule(const R& ring, const FPModule<R>& G) {
  const auto& s = G.rel_solver->decomposition();
  std::vector<std::size_t> tors;
  for (std::size_t i = 0; i < s.rank; ++i)
    if (!ring.is_unit(s.factors[i])) tors.push_back(i);
  Mat<R> cols(G.gens, tors.size(), ring.zero());
  for (std::size_t j = 0; j < tors.size(); ++j)
    for (std::size_t i = 0; i < G.gens; ++i) cols.at(i, j) = s.Uinv.at(i, tors[j]);
  typename R::Elem ann = tors.empty() ? ring.one() : s.factors[tors.back()];
  return {Submodule<R>{G, std::move(cols)}, std::move(ann)};
}

template <euclidean_ring R>
struct DivisiblePart {
  Submodule<R> structural;  // intersection over all nonzero ring elements
  Submodule<R> sampled;     // intersection over the probe set only
};

/// The structural intersection of rG over all nonzero r vanishes for every
/// finitely generated module over these rings (every cyclic summand R/d is
/// killed by d, a free summand by the non-unit elements), so `structural` is
/// the zero submodule; `sampled` is the honest finite-probe intersection,
/// which in general only over-approximates it.
template <euclidean_ring R>
DivisiblePart<R> divisible_part(const R& ring, const FPModule<R>& G,
                                const std::vector<typename R::Elem>& probes) {
  if (probes.empty()) throw std::invalid_argument("divisible_part: empty probe set");
  if constexpr (R::is_field)
    throw std::invalid_argument("divisible_part: not defined over a field");
  for (const auto& r : probes)
    if (ring.is_zero(r)) throw std::invalid_argument("divisible_part: zero probe");
  Submodule<R> acc = sub_multiple(ring, G, probes[0]);
  for (std::size_t i = 1; i < probes.size(); ++i)
    acc = sub_intersect(ring, acc, sub_multiple(ring, G, probes[i]));
  return {sub_zero(ring, G), std::move(acc)};
}

template <euclidean_ring R>
struct MuCheck {
  bool injective = false;
  Submodule<R> kernel_sub;                                  // the sampled intersection
  std::optional<std::vector<typename R::Elem>> kernel_elem;  // nonzero witness when not injective
};

/// Injectivity of G -> prod_{r in S} G/rG; the kernel is the sampled
/// intersection of the rG.
template <euclidean_ring R>
MuCheck<R> finite_mu_check(const R& ring, const std::vector<typename R::Elem>& S,
                           const FPModule<R>& G) {
  if (S.empty()) throw std::invalid_argument("finite_mu_check: empty sample");
  auto div = divisible_part(ring, G, S);
  MuCheck<R> out{true, div.sampled, std::nullopt};
  for (std::size_t j = 0; j < div.sampled.gens.cols; ++j) {
    auto col = mat_col(div.sampled.gens, j);
    if (!elem_is_zero(ring, G, col)) {
      out.injective = false;
      out.kernel_elem = col;
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Purity. Over these rings a finitely generated pure submodule is a direct
// summand, so the decision is the existence of a retraction, found by exact
// linear solving; failure is certified by some r with rM cap N != rN.

template <euclidean_ring R>
struct PurityResult {
  bool pure = false;
  std::optional<ModuleMap<R>> retraction;  // p with p o inclusion = id
  std::optional<std::pair<typename R::Elem, std::vector<typename R::Elem>>> witness;
};

namespace detail {

// Stacked linear system for a retraction p: M -> N of inc: N -> M.
// Unknowns are vec(P), plus slack coefficients expressing that (1) P is
// well-defined and (2) P*inc = id holds modulo the relations of N.
template <euclidean_ring R>
std::optional<Mat<R>> find_retraction(const R& ring, const ModuleMap<R>& inc) {
  const auto& N = inc.source;
  const auto& M = inc.target;
  const std::size_t n = N.gens, q = M.gens;
  const Mat<R>& relM = M.relations;  // q x kM
  const Mat<R>& relN = N.relations;  // n x lN
  const std::size_t kM = relM.cols;

  Mat<R> In = Mat<R>::identity(ring, n);
  Mat<R> blk11 = mat_kron(ring, mat_transpose(ring, relM), In);               // n*kM x n*q
  Mat<R> blk12 = mat_neg(ring, mat_kron(ring, Mat<R>::identity(ring, kM), relN));
  Mat<R> blk21 = mat_kron(ring, mat_transpose(ring, inc.matrix), In);         // n*n x n*q
  Mat<R> blk23 = mat_neg(ring, mat_kron(ring, In, relN));

  Mat<R> top = mat_hstack(ring, blk11, mat_hstack(ring, blk12, Mat<R>::zero(ring, n * kM, blk23.cols)));
  Mat<R> bot = mat_hstack(ring, blk21, mat_hstack(ring, Mat<R>::zero(ring, n * n, blk12.cols), blk23));
  Mat<R> sys = mat_vstack(ring, top, bot);

  std::vector<typename R::Elem> rhs(sys.rows, ring.zero());
  auto id_vec = vec_of(In);
  for (std::size_t i = 0; i < id_vec.size(); ++i) rhs[n * kM + i] = id_vec[i];

  auto sol = solve_linear(ring, sys, rhs);
  if (!sol) return std::nullopt;
  std::vector<typename R::Elem> pv(sol->begin(), sol->begin() + static_cast<std::ptrdiff_t>(n * q));
  return unvec(ring, pv, n, q);
}

}  // namespace detail

template <euclidean_ring R>
PurityResult<R> is_pure_submodule(const R& ring, const ModuleMap<R>& inclusion) {
  if (!is_injective(ring, inclusion))
    throw std::invalid_argument("is_pure_submodule: inclusion is not injective");

  if (auto P = detail::find_retraction(ring, inclusion)) {
    ModuleMap<R> retr = make_map(ring, inclusion.target, inclusion.source, *P);
    if (!map_eq(ring, compose(ring, retr, inclusion), identity_map(ring, inclusion.source)))
      throw std::logic_error("is_pure_submodule: retraction check failed");
    return {true, std::move(retr), std::nullopt};
  }

  // Witness sweep: the obstruction is a torsion phenomenon, so candidate
  // multipliers are divisors of the torsion annihilators in sight.
  const auto& M = inclusion.target;
  auto cok = cokernel(ring, inclusion);
  typename R::Elem a = ring.one();
  const FPModule<R>* mods[] = {&cok.module, &M, &inclusion.source};
  for (const FPModule<R>* G : mods) {
    auto t = torsion_submodule(ring, *G);
    if (!ring.is_unit(t.annihilator)) a = ring.mul(a, t.annihilator);
  }
  Submodule<R> n_img = image(ring, inclusion);
  for (const auto& r : ring.divisors(a)) {
    if (ring.is_unit(r)) continue;
    Submodule<R> lhs = sub_intersect(ring, sub_multiple(ring, M, r), n_img);
    Submodule<R> rn{M, mat_scale(ring, r, inclusion.matrix)};
    auto rn_solver = sub_solver(ring, rn);
    for (std::size_t j = 0; j < lhs.gens.cols; ++j) {
      auto w = mat_col(lhs.gens, j);
      if (!rn_solver.solvable(w))
        return {false, std::nullopt, std::make_pair(r, std::move(w))};
    }
  }
  throw std::logic_error("is_pure_submodule: no retraction and no witness found");
}

// ---------------------------------------------------------------------------
// Homotopy transfer across a two-row diagram with exact rows:
//
//        C --f--> C' --pi--> C'' --> 0
//        |h       |k         |ell
//        v        v          v
//   0 -> N --eps-> M --g--> L

template <euclidean_ring R>
struct HomotopyDiagram {
  ModuleMap<R> f, pi, eps, g, h, k, ell;
};

enum class TransferDirection { given_q_find_p, given_p_find_q };

namespace detail {

template <euclidean_ring R>
void check_homotopy_diagram(const R& ring, const HomotopyDiagram<R>& d) {
  auto fail = [](const std::string& what) {
    throw std::invalid_argument("homotopy_transfer: " + what);
  };
  if (!same_presentation(ring, d.f.target, d.pi.source)) fail("f and pi do not compose");
  if (!same_presentation(ring, d.eps.target, d.g.source)) fail("eps and g do not compose");
  if (!is_surjective(ring, d.pi)) fail("pi is not surjective");
  if (!is_zero_map(ring, compose(ring, d.pi, d.f))) fail("pi o f != 0");
  {
    auto kd = kernel(ring, d.pi);
    Submodule<R> ker_sub{d.pi.source, kd.inclusion.matrix};
    if (!sub_contains(ring, image(ring, d.f), ker_sub)) fail("ker pi not contained in im f");
  }
  if (!is_injective(ring, d.eps)) fail("eps is not injective");
  if (!is_zero_map(ring, compose(ring, d.g, d.eps))) fail("g o eps != 0");
  {
    auto kg = kernel(ring, d.g);
    Submodule<R> ker_sub{d.g.source, kg.inclusion.matrix};
    if (!sub_contains(ring, image(ring, d.eps), ker_sub)) fail("ker g not contained in im eps");
  }
  if (!map_eq(ring, compose(ring, d.k, d.f), compose(ring, d.eps, d.h))) fail("k o f != eps o h");
  if (!map_eq(ring, compose(ring, d.ell, d.pi), compose(ring, d.g, d.k))) fail("ell o pi != g o k");
}

// Factor t: X -> M through the injection eps: N -> M.
template <euclidean_ring R>
ModuleMap<R> factor_through_injection(const R& ring, const ModuleMap<R>& eps, const ModuleMap<R>& t) {
  LinearSolver<R> solver(ring, mat_hstack(ring, eps.matrix, eps.target.relations));
  Mat<R> p(eps.source.gens, t.source.gens, ring.zero());
  for (std::size_t j = 0; j < t.source.gens; ++j) {
    auto y = solver.solve(mat_col(t.matrix, j));
    if (!y) throw std::invalid_argument("homotopy_transfer: map does not factor through the injection");
    std::vector<typename R::Elem> head(y->begin(), y->begin() + static_cast<std::ptrdiff_t>(eps.source.gens));
    mat_set_col(p, j, head);
  }
  return make_map(ring, t.source, eps.source, p);
}

// Factor t: C' -> M through the surjection pi: C' -> C'' (t kills ker pi).
template <euclidean_ring R>
ModuleMap<R> factor_through_surjection(const R& ring, const ModuleMap<R>& pi, const ModuleMap<R>& t) {
  LinearSolver<R> solver(ring, mat_hstack(ring, pi.matrix, pi.target.relations));
  Mat<R> q(t.target.gens, pi.target.gens, ring.zero());
  for (std::size_t j = 0; j < pi.target.gens; ++j) {
    std::vector<typename R::Elem> e(pi.target.gens, ring.zero());
    e[j] = ring.one();
    auto y = solver.solve(e);
    if (!y) throw std::logic_error("factor_through_surjection: surjection has no preimage");
    std::vector<typename R::Elem> x(y->begin(), y->begin() + static_cast<std::ptrdiff_t>(pi.source.gens));
    mat_set_col(q, j, mat_apply(ring, t.matrix, x));
  }
  return make_map(ring, pi.target, t.target, q);
}

}  // namespace detail

/// Lemma-style transfer: given q: C'' -> M with g o q = ell produce p: C' -> N
/// with p o f = h, and conversely. The returned map is verified by
/// composition before being handed back.
template <euclidean_ring R>
ModuleMap<R> homotopy_transfer(const R& ring, const HomotopyDiagram<R>& d, TransferDirection dir,
                               const ModuleMap<R>& given) {
  detail::check_homotopy_diagram(ring, d);
  if (dir == TransferDirection::given_q_find_p) {
    if (!map_eq(ring, compose(ring, d.g, given), d.ell))
      throw std::invalid_argument("homotopy_transfer: given q does not satisfy g o q = ell");
    ModuleMap<R> t = make_map(ring, d.k.source, d.k.target,
                              mat_sub(ring, d.k.matrix, compose(ring, given, d.pi).matrix));
    ModuleMap<R> p = detail::factor_through_injection(ring, d.eps, t);
    if (!map_eq(ring, compose(ring, p, d.f), d.h))
      throw std::logic_error("homotopy_transfer: constructed p fails p o f = h");
    return p;
  }
  if (!map_eq(ring, compose(ring, given, d.f), d.h))
    throw std::invalid_argument("homotopy_transfer: given p does not satisfy p o f = h");
  ModuleMap<R> t = make_map(ring, d.k.source, d.k.target,
                            mat_sub(ring, d.k.matrix, compose(ring, d.eps, given).matrix));
  ModuleMap<R> q = detail::factor_through_surjection(ring, d.pi, t);
  if (!map_eq(ring, compose(ring, d.g, q), d.ell))
    throw std::logic_error("homotopy_transfer: constructed q fails g o q = ell");
  return q;
}

// ---------------------------------------------------------------------------
// The intersection identity Hom(C',M)f cap Hom(C,N) = Hom(C',N)f inside
// Hom(C,M), which holds whenever N is pure in M.

template <euclidean_ring R>
struct IntersectionCheck {
  bool equal = false;
  std::optional<ModuleMap<R>> witness;  // a map in the left side but not the right
};

template <euclidean_ring R>
IntersectionCheck<R> pure_intersection_check(const R& ring, const ModuleMap<R>& f,
                                             const FPModule<R>& M, const Submodule<R>& N,
                                             std::size_t gen_cap = default_hom_gen_cap) {
  if (!same_presentation(ring, N.ambient, M))
    throw std::invalid_argument("pure_intersection_check: N is not a submodule of M");
  auto [Nmod, eps] = submodule_as_module(ring, N);

  auto h_cm = hom_module(ring, f.source, M, gen_cap);
  auto h_cpm = hom_module(ring, f.target, M, gen_cap);
  auto h_cn = hom_module(ring, f.source, Nmod, gen_cap);
  auto h_cpn = hom_module(ring, f.target, Nmod, gen_cap);

  ModuleMap<R> a1 = apply_hom_contra(ring, f, h_cpm, h_cm);      // Hom(C',M) -> Hom(C,M)
  ModuleMap<R> a2 = apply_hom_cov(ring, eps, h_cn, h_cm);        // Hom(C,N) -> Hom(C,M)
  ModuleMap<R> a3 = apply_hom_cov(ring, eps, h_cpn, h_cpm);      // Hom(C',N) -> Hom(C',M)
  ModuleMap<R> c3 = compose(ring, a1, a3);                       // Hom(C',N) -> Hom(C,M)

  Submodule<R> s1 = image(ring, a1);
  Submodule<R> s2 = image(ring, a2);
  Submodule<R> s3 = image(ring, c3);

  Submodule<R> inter = sub_intersect(ring, s1, s2);
  auto s3_solver = sub_solver(ring, s3);
  for (std::size_t j = 0; j < inter.gens.cols; ++j) {
    auto col = mat_col(inter.gens, j);
    if (!s3_solver.solvable(col))
      return {false, hom_decode(ring, h_cm, col)};
  }
  return {true, std::nullopt};
}

}  // namespace mlt
