#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mltower/matrix.hpp"
#include "mltower/ring.hpp"
#include "mltower/snf.hpp"

namespace mlt {

/// Finitely presented module R^gens / im(relations). Immutable after
/// construction; the Smith decomposition of the relation matrix is computed
/// once and shared, since every membership test routes through it.
template <euclidean_ring R>
struct FPModule {
  using E = typename R::Elem;

  std::size_t gens = 0;
  Mat<R> relations;  // gens rows; columns are relators

  std::size_t free_rank = 0;
  std::vector<E> invariants;  // non-unit invariant factors, d_1 | d_2 | ...

  std::shared_ptr<const LinearSolver<R>> rel_solver;

  bool is_zero() const { return free_rank == 0 && invariants.empty(); }
  bool is_torsion() const { return free_rank == 0; }  // finite length over these rings
};

template <euclidean_ring R>
FPModule<R> make_module(const R& ring, std::size_t gens, Mat<R> relations) {
  if (relations.rows != gens) throw std::invalid_argument("make_module: relation rows != generators");
  FPModule<R> m;
  m.gens = gens;
  m.relations = std::move(relations);
  m.rel_solver = std::make_shared<const LinearSolver<R>>(ring, m.relations);
  const auto& s = m.rel_solver->decomposition();
  for (const auto& d : s.factors)
    if (!ring.is_unit(d)) m.invariants.push_back(d);
  m.free_rank = gens - s.rank;
  return m;
}

template <euclidean_ring R>
FPModule<R> free_module(const R& ring, std::size_t n) {
  return make_module(ring, n, Mat<R>::zero(ring, n, 0));
}

template <euclidean_ring R>
FPModule<R> zero_module(const R& ring) {
  return free_module(ring, 0);
}

/// R/rR presented on one generator.
template <euclidean_ring R>
FPModule<R> cyclic_module(const R& ring, const typename R::Elem& r) {
  Mat<R> rel(1, 1, ring.zero());
  rel.at(0, 0) = r;
  return make_module(ring, 1, rel);
}

/// Module with relation matrix diag(d_1, ..., d_k) padded by `extra_free`
/// free generators.
template <euclidean_ring R>
FPModule<R> diagonal_module(const R& ring, const std::vector<typename R::Elem>& ds,
                            std::size_t extra_free = 0) {
  std::size_t n = ds.size() + extra_free;
  Mat<R> rel = Mat<R>::zero(ring, n, ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) rel.at(i, i) = ds[i];
  return make_module(ring, n, rel);
}

template <euclidean_ring R>
FPModule<R> direct_sum(const R& ring, const std::vector<FPModule<R>>& parts) {
  std::size_t gens = 0, relcols = 0;
  for (const auto& p : parts) {
    gens += p.gens;
    relcols += p.relations.cols;
  }
  Mat<R> rel = Mat<R>::zero(ring, gens, relcols);
  std::size_t ro = 0, co = 0;
  for (const auto& p : parts) {
    for (std::size_t i = 0; i < p.gens; ++i)
      for (std::size_t j = 0; j < p.relations.cols; ++j) rel.at(ro + i, co + j) = p.relations.at(i, j);
    ro += p.gens;
    co += p.relations.cols;
  }
  return make_module(ring, gens, rel);
}

/// M^n with generator blocks in copy-major order.
template <euclidean_ring R>
FPModule<R> power_module(const R& ring, const FPModule<R>& m, std::size_t n) {
  return direct_sum(ring, std::vector<FPModule<R>>(n, m));
}

/// Same abstract module up to isomorphism: equal normal forms.
template <euclidean_ring R>
bool isomorphic(const R& ring, const FPModule<R>& a, const FPModule<R>& b) {
  if (a.free_rank != b.free_rank || a.invariants.size() != b.invariants.size()) return false;
  for (std::size_t i = 0; i < a.invariants.size(); ++i)
    if (!ring.eq(a.invariants[i], b.invariants[i])) return false;
  return true;
}

template <euclidean_ring R>
bool same_presentation(const R& ring, const FPModule<R>& a, const FPModule<R>& b) {
  return a.gens == b.gens && mat_eq(ring, a.relations, b.relations);
}

template <euclidean_ring R>
std::string normal_form_string(const R& ring, const FPModule<R>& m) {
  if (m.is_zero()) return "0";
  std::string out;
  std::string t = ring.tag();
  bool plain = (t == "Z");
  if (m.free_rank > 0) {
    out = t;
    if (m.free_rank > 1) out += "^" + std::to_string(m.free_rank);
  }
  for (const auto& d : m.invariants) {
    if (!out.empty()) out += " + ";
    out += plain ? (t + "/" + ring.to_string(d)) : (t + "/(" + ring.to_string(d) + ")");
  }
  return out;
}

template <euclidean_ring R>
bool elem_is_zero(const R&, const FPModule<R>& m, const std::vector<typename R::Elem>& x) {
  if (x.size() != m.gens) throw std::invalid_argument("elem_is_zero: wrong length");
  return m.rel_solver->solvable(x);
}

template <euclidean_ring R>
bool elem_eq(const R& ring, const FPModule<R>& m, const std::vector<typename R::Elem>& x,
             const std::vector<typename R::Elem>& y) {
  std::vector<typename R::Elem> d(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) d[i] = ring.sub(x[i], y[i]);
  return elem_is_zero(ring, m, d);
}

// ---------------------------------------------------------------------------
// Homomorphisms.

/// Map between finitely presented modules, given on generators. Construction
/// verifies well-definedness: matrix * (source relations) must lie in the
/// column span of the target relations.
template <euclidean_ring R>
struct ModuleMap {
  FPModule<R> source;
  FPModule<R> target;
  Mat<R> matrix;  // target.gens x source.gens
};

template <euclidean_ring R>
ModuleMap<R> make_map(const R& ring, FPModule<R> source, FPModule<R> target, Mat<R> matrix) {
  if (matrix.rows != target.gens || matrix.cols != source.gens)
    throw std::invalid_argument("make_map: matrix shape mismatch");
  auto moved = mat_mul(ring, matrix, source.relations);
  if (!target.rel_solver->solve_mat(moved))
    throw std::invalid_argument("make_map: not well-defined on source relations");
  return ModuleMap<R>{std::move(source), std::move(target), std::move(matrix)};
}

template <euclidean_ring R>
ModuleMap<R> identity_map(const R& ring, const FPModule<R>& m) {
  return make_map(ring, m, m, Mat<R>::identity(ring, m.gens));
}

template <euclidean_ring R>
ModuleMap<R> zero_map(const R& ring, const FPModule<R>& source, const FPModule<R>& target) {
  return make_map(ring, source, target, Mat<R>::zero(ring, target.gens, source.gens));
}

/// g after f.
template <euclidean_ring R>
ModuleMap<R> compose(const R& ring, const ModuleMap<R>& g, const ModuleMap<R>& f) {
  if (!same_presentation(ring, f.target, g.source))
    throw std::invalid_argument("compose: middle modules differ");
  return make_map(ring, f.source, g.target, mat_mul(ring, g.matrix, f.matrix));
}

template <euclidean_ring R>
bool map_eq(const R& ring, const ModuleMap<R>& f, const ModuleMap<R>& g) {
  if (!same_presentation(ring, f.source, g.source) || !same_presentation(ring, f.target, g.target))
    return false;
  auto d = mat_sub(ring, f.matrix, g.matrix);
  return f.target.rel_solver->solve_mat(d).has_value();
}

template <euclidean_ring R>
bool is_zero_map(const R& ring, const ModuleMap<R>& f) {
  return f.target.rel_solver->solve_mat(f.matrix).has_value();
}

// ---------------------------------------------------------------------------
// Submodules, given by generator columns in ambient coordinates.

template <euclidean_ring R>
struct Submodule {
  FPModule<R> ambient;
  Mat<R> gens;  // ambient.gens rows
};

template <euclidean_ring R>
Submodule<R> sub_from_cols(const R&, FPModule<R> ambient, Mat<R> cols) {
  if (cols.rows != ambient.gens) throw std::invalid_argument("sub_from_cols: row count mismatch");
  return Submodule<R>{std::move(ambient), std::move(cols)};
}

template <euclidean_ring R>
Submodule<R> sub_zero(const R& ring, const FPModule<R>& ambient) {
  return Submodule<R>{ambient, Mat<R>::zero(ring, ambient.gens, 0)};
}

template <euclidean_ring R>
Submodule<R> sub_full(const R& ring, const FPModule<R>& ambient) {
  return Submodule<R>{ambient, Mat<R>::identity(ring, ambient.gens)};
}

/// r*M as a submodule of M.
template <euclidean_ring R>
Submodule<R> sub_multiple(const R& ring, const FPModule<R>& m, const typename R::Elem& r) {
  return Submodule<R>{m, mat_scale(ring, r, Mat<R>::identity(ring, m.gens))};
}

template <euclidean_ring R>
Submodule<R> image(const R&, const ModuleMap<R>& f) {
  return Submodule<R>{f.target, f.matrix};
}

/// Solver for membership in (generators + ambient relations).
template <euclidean_ring R>
LinearSolver<R> sub_solver(const R& ring, const Submodule<R>& s) {
  return LinearSolver<R>(ring, mat_hstack(ring, s.gens, s.ambient.relations));
}

template <euclidean_ring R>
bool sub_membership(const R& ring, const Submodule<R>& s, const std::vector<typename R::Elem>& x) {
  return sub_solver(ring, s).solvable(x);
}

template <euclidean_ring R>
bool sub_contains(const R& ring, const Submodule<R>& big, const Submodule<R>& small) {
  if (big.ambient.gens != small.ambient.gens)
    throw std::invalid_argument("sub_contains: different ambient modules");
  return sub_solver(ring, big).solve_mat(small.gens).has_value();
}

template <euclidean_ring R>
bool sub_eq(const R& ring, const Submodule<R>& a, const Submodule<R>& b) {
  return sub_contains(ring, a, b) && sub_contains(ring, b, a);
}

template <euclidean_ring R>
bool sub_is_zero(const R& ring, const Submodule<R>& s) {
  return s.ambient.rel_solver->solve_mat(s.gens).has_value();
}

template <euclidean_ring R>
Submodule<R> sub_sum(const R& ring, const Submodule<R>& a, const Submodule<R>& b) {
  if (a.ambient.gens != b.ambient.gens) throw std::invalid_argument("sub_sum: ambient mismatch");
  return Submodule<R>{a.ambient, mat_hstack(ring, a.gens, b.gens)};
}

/// Intersection inside the ambient module, via the kernel of [La | -Lb]
/// where La, Lb are the generator lattices lifted with the relations.
template <euclidean_ring R>
Submodule<R> sub_intersect(const R& ring, const Submodule<R>& a, const Submodule<R>& b) {
  if (a.ambient.gens != b.ambient.gens) throw std::invalid_argument("sub_intersect: ambient mismatch");
  Mat<R> la = mat_hstack(ring, a.gens, a.ambient.relations);
  Mat<R> lb = mat_hstack(ring, b.gens, b.ambient.relations);
  Mat<R> k = kernel_basis(ring, mat_hstack(ring, la, mat_neg(ring, lb)));
  // top block of the kernel gives coefficients for La
  Mat<R> top(la.cols, k.cols, ring.zero());
  for (std::size_t i = 0; i < la.cols; ++i)
    for (std::size_t j = 0; j < k.cols; ++j) top.at(i, j) = k.at(i, j);
  return Submodule<R>{a.ambient, mat_mul(ring, la, top)};
}

// ---------------------------------------------------------------------------
// Kernels, cokernels, subquotients.

template <euclidean_ring R>
struct KernelData {
  FPModule<R> module;
  ModuleMap<R> inclusion;  // into the source of the original map
};

/// Kernel of a map between finitely presented modules, presented abstractly
/// together with its inclusion.
template <euclidean_ring R>
KernelData<R> kernel(const R& ring, const ModuleMap<R>& f) {
  const auto& src = f.source;
  const auto& tgt = f.target;
  // preimage lattice L = { x : f(x) in im(target relations) }
  Mat<R> big = mat_hstack(ring, f.matrix, mat_neg(ring, tgt.relations));
  Mat<R> k = kernel_basis(ring, big);
  Mat<R> lgen(src.gens, k.cols, ring.zero());
  for (std::size_t i = 0; i < src.gens; ++i)
    for (std::size_t j = 0; j < k.cols; ++j) lgen.at(i, j) = k.at(i, j);

  LinearSolver<R> lsolve(ring, lgen);
  auto coords = lsolve.solve_mat(src.relations);
  if (!coords) throw std::logic_error("kernel: source relations escape the preimage lattice");
  Mat<R> syz = kernel_basis(ring, lgen);
  FPModule<R> ker = make_module(ring, lgen.cols, mat_hstack(ring, *coords, syz));
  ModuleMap<R> inc = make_map(ring, ker, src, lgen);
  return {std::move(ker), std::move(inc)};
}

template <euclidean_ring R>
struct CokernelData {
  FPModule<R> module;
  ModuleMap<R> projection;  // from the target of the original map
};

template <euclidean_ring R>
CokernelData<R> cokernel(const R& ring, const ModuleMap<R>& f) {
  FPModule<R> cok = make_module(ring, f.target.gens, mat_hstack(ring, f.matrix, f.target.relations));
  ModuleMap<R> proj = make_map(ring, f.target, cok, Mat<R>::identity(ring, f.target.gens));
  return {std::move(cok), std::move(proj)};
}

template <euclidean_ring R>
bool is_injective(const R& ring, const ModuleMap<R>& f) {
  return kernel(ring, f).module.is_zero();
}

template <euclidean_ring R>
bool is_surjective(const R& ring, const ModuleMap<R>& f) {
  return cokernel(ring, f).module.is_zero();
}

/// Abstract presentation of a submodule with its (automatically injective)
/// inclusion into the ambient module.
template <euclidean_ring R>
KernelData<R> submodule_as_module(const R& ring, const Submodule<R>& s) {
  Mat<R> big = mat_hstack(ring, s.gens, s.ambient.relations);
  Mat<R> k = kernel_basis(ring, big);
  Mat<R> rel(s.gens.cols, k.cols, ring.zero());
  for (std::size_t i = 0; i < s.gens.cols; ++i)
    for (std::size_t j = 0; j < k.cols; ++j) rel.at(i, j) = k.at(i, j);
  FPModule<R> mod = make_module(ring, s.gens.cols, rel);
  ModuleMap<R> inc = make_map(ring, mod, s.ambient, s.gens);
  return {std::move(mod), std::move(inc)};
}

template <euclidean_ring R>
CokernelData<R> quotient_module(const R& ring, const Submodule<R>& s) {
  FPModule<R> q = make_module(ring, s.ambient.gens, mat_hstack(ring, s.ambient.relations, s.gens));
  ModuleMap<R> proj = make_map(ring, s.ambient, q, Mat<R>::identity(ring, s.ambient.gens));
  return {std::move(q), std::move(proj)};
}

// ---------------------------------------------------------------------------
// Torsion-free quotient, used by the stabilization analysis.

/// Projection q and section s with q*s = Id onto M / t(M), identified with
/// R^rank via the Smith coordinates of the relation matrix.
template <euclidean_ring R>
struct FreeQuotient {
  std::size_t rank = 0;
  Mat<R> proj;     // rank x gens
  Mat<R> section;  // gens x rank
};

template <euclidean_ring R>
FreeQuotient<R> free_quotient(const R& ring, const FPModule<R>& m) {
  const auto& s = m.rel_solver->decomposition();
  FreeQuotient<R> out;
  out.rank = m.free_rank;
  out.proj = Mat<R>::zero(ring, out.rank, m.gens);
  out.section = Mat<R>::zero(ring, m.gens, out.rank);
  std::size_t nz = s.rank;  // nonzero diagonal positions come first
  for (std::size_t j = 0; j < out.rank; ++j) {
    for (std::size_t i = 0; i < m.gens; ++i) {
      out.proj.at(j, i) = s.U.at(nz + j, i);
      out.section.at(i, j) = s.Uinv.at(i, nz + j);
    }
  }
  return out;
}

/// Sum of length bounds of the invariant factors; an upper bound for the
/// composition length of the torsion part.
template <euclidean_ring R>
std::size_t torsion_length_bound(const R& ring, const FPModule<R>& m) {
  std::size_t b = 0;
  for (const auto& d : m.invariants) b += ring.length_bound(d);
  return b;
}

}  // namespace mlt
