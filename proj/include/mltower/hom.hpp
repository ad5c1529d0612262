#pragma once

#include <memory>
#include <stdexcept>
#include <vector>

#include "mltower/fp_module.hpp"
#include "mltower/matrix.hpp"
#include "mltower/ring.hpp"
#include "mltower/snf.hpp"

namespace mlt {

inline constexpr std::size_t default_hom_gen_cap = 4096;

/// Hom(M, N) presented as a finitely presented module together with the
/// dictionary between its elements and actual homomorphisms. A map M -> N is
/// an n x m matrix Phi with Phi * relM landing in the span of relN; such
/// matrices, vectorized column-major, form the lattice spanned by
/// `gens_as_maps`, and two matrices give the same map iff they differ by a
/// column span of relN in every column.
template <euclidean_ring R>
struct HomModule {
  FPModule<R> module;  // the abstract Hom module
  FPModule<R> source;  // M
  FPModule<R> target;  // N
  Mat<R> gens_as_maps;  // (N.gens * M.gens) x module.gens
  std::shared_ptr<const LinearSolver<R>> coord_solver;  // for encoding
};

template <euclidean_ring R>
Mat<R> unvec(const R&, const std::vector<typename R::Elem>& v, std::size_t rows, std::size_t cols) {
  if (v.size() != rows * cols) throw std::invalid_argument("unvec: size mismatch");
  Mat<R> m(rows, cols, typename R::Elem{});
  for (std::size_t j = 0; j < cols; ++j)
    for (std::size_t i = 0; i < rows; ++i) m.at(i, j) = v[j * rows + i];
  return m;
}

template <euclidean_ring R>
std::vector<typename R::Elem> vec_of(const Mat<R>& m) {
  std::vector<typename R::Elem> v(m.rows * m.cols);
  for (std::size_t j = 0; j < m.cols; ++j)
    for (std::size_t i = 0; i < m.rows; ++i) v[j * m.rows + i] = m.at(i, j);
  return v;
}

template <euclidean_ring R>
HomModule<R> hom_module(const R& ring, const FPModule<R>& M, const FPModule<R>& N,
                        std::size_t gen_cap = default_hom_gen_cap) {
  const std::size_t m = M.gens, n = N.gens;
  if (m * n > gen_cap)
    throw resource_error("hom_module: generator bound exceeded (" + std::to_string(m * n) + " > " +
                         std::to_string(gen_cap) + ")");
  const Mat<R>& A = M.relations;  // m x k
  const Mat<R>& B = N.relations;  // n x l
  const std::size_t k = A.cols, l = B.cols;

  // vec(Phi * A) = (A^T (x) I_n) vec(Phi); well-definedness asks this to be
  // (I_k (x) B) vec(Y) for some Y.
  Mat<R> cond = mat_hstack(ring, mat_kron(ring, mat_transpose(ring, A), Mat<R>::identity(ring, n)),
                           mat_neg(ring, mat_kron(ring, Mat<R>::identity(ring, k), B)));
  Mat<R> ker = kernel_basis(ring, cond);
  Mat<R> lgen(n * m, ker.cols, ring.zero());
  for (std::size_t i = 0; i < n * m; ++i)
    for (std::size_t j = 0; j < ker.cols; ++j) lgen.at(i, j) = ker.at(i, j);

  auto solver = std::make_shared<const LinearSolver<R>>(ring, lgen);
  // relations: the zero maps B*Z, in lattice coordinates, plus syzygies
  Mat<R> zero_maps = mat_kron(ring, Mat<R>::identity(ring, m), B);  // nm x ml
  auto w = solver->solve_mat(zero_maps);
  if (!w) throw std::logic_error("hom_module: zero maps escape the hom lattice");
  Mat<R> syz = kernel_basis(ring, lgen);
  FPModule<R> H = make_module(ring, lgen.cols, mat_hstack(ring, *w, syz));
  return HomModule<R>{std::move(H), M, N, std::move(lgen), std::move(solver)};
}

/// Element of the abstract hom module -> actual homomorphism.
template <euclidean_ring R>
ModuleMap<R> hom_decode(const R& ring, const HomModule<R>& h,
                        const std::vector<typename R::Elem>& coords) {
  if (coords.size() != h.module.gens) throw std::invalid_argument("hom_decode: wrong coordinate length");
  auto v = mat_apply(ring, h.gens_as_maps, coords);
  return make_map(ring, h.source, h.target, unvec(ring, v, h.target.gens, h.source.gens));
}

template <euclidean_ring R>
ModuleMap<R> hom_decode_generator(const R& ring, const HomModule<R>& h, std::size_t j) {
  std::vector<typename R::Elem> c(h.module.gens, ring.zero());
  c[j] = ring.one();
  return hom_decode(ring, h, c);
}

/// Homomorphism -> coordinates in the abstract hom module. Total on
/// well-defined maps with the right source and target.
template <euclidean_ring R>
std::vector<typename R::Elem> hom_encode_matrix(const R& ring, const HomModule<R>& h,
                                                const Mat<R>& map_matrix) {
  if (map_matrix.rows != h.target.gens || map_matrix.cols != h.source.gens)
    throw std::invalid_argument("hom_encode_matrix: shape mismatch");
  auto c = h.coord_solver->solve(vec_of(map_matrix));
  if (!c) throw std::invalid_argument("hom_encode_matrix: matrix is not a well-defined map");
  return *c;
}

template <euclidean_ring R>
std::vector<typename R::Elem> hom_encode(const R& ring, const HomModule<R>& h,
                                         const ModuleMap<R>& f) {
  return hom_encode_matrix(ring, h, f.matrix);
}

/// Hom(f, M): precomposition Hom(C', M) -> Hom(C, M) for f: C -> C'.
template <euclidean_ring R>
ModuleMap<R> apply_hom_contra(const R& ring, const ModuleMap<R>& f, const HomModule<R>& from,
                              const HomModule<R>& to) {
  if (!same_presentation(ring, from.source, f.target) || !same_presentation(ring, to.source, f.source) ||
      !same_presentation(ring, from.target, to.target))
    throw std::invalid_argument("apply_hom_contra: hom modules do not match the map");
  Mat<R> cols(to.module.gens, from.module.gens, ring.zero());
  for (std::size_t j = 0; j < from.module.gens; ++j) {
    auto v = mat_col(from.gens_as_maps, j);
    Mat<R> phi = unvec(ring, v, from.target.gens, from.source.gens);
    auto enc = hom_encode_matrix(ring, to, mat_mul(ring, phi, f.matrix));
    mat_set_col(cols, j, enc);
  }
  return make_map(ring, from.module, to.module, cols);
}

/// Hom(C, g): postcomposition Hom(C, N) -> Hom(C, N') for g: N -> N'.
template <euclidean_ring R>
ModuleMap<R> apply_hom_cov(const R& ring, const ModuleMap<R>& g, const HomModule<R>& from,
                           const HomModule<R>& to) {
  if (!same_presentation(ring, from.target, g.source) || !same_presentation(ring, to.target, g.target) ||
      !same_presentation(ring, from.source, to.source))
    throw std::invalid_argument("apply_hom_cov: hom modules do not match the map");
  Mat<R> cols(to.module.gens, from.module.gens, ring.zero());
  for (std::size_t j = 0; j < from.module.gens; ++j) {
    auto v = mat_col(from.gens_as_maps, j);
    Mat<R> phi = unvec(ring, v, from.target.gens, from.source.gens);
    auto enc = hom_encode_matrix(ring, to, mat_mul(ring, g.matrix, phi));
    mat_set_col(cols, j, enc);
  }
  return make_map(ring, from.module, to.module, cols);
}

/// Basis of the second syzygy stage: columns of the relation matrix span a
/// free submodule K with 0 -> K -> R^gens -> M -> 0; returned matrix has the
/// basis of K as columns.
template <euclidean_ring R>
Mat<R> presentation_kernel_basis(const R& ring, const FPModule<R>& M) {
  const auto& s = M.rel_solver->decomposition();
  Mat<R> kb(M.gens, s.rank, ring.zero());
  for (std::size_t j = 0; j < s.rank; ++j)
    for (std::size_t i = 0; i < M.gens; ++i) kb.at(i, j) = ring.mul(s.factors[j], s.Uinv.at(i, j));
  return kb;
}

/// Ext^1(M, N) via a free presentation 0 -> K -> F -> M -> 0: the cokernel
/// of Hom(F, N) -> Hom(K, N). Projective dimension over these rings is at
/// most one, so this is the whole story.
template <euclidean_ring R>
FPModule<R> ext1(const R& ring, const FPModule<R>& M, const FPModule<R>& N,
                 std::size_t gen_cap = default_hom_gen_cap) {
  Mat<R> kb = presentation_kernel_basis(ring, M);
  const std::size_t n = N.gens, s = kb.cols;
  if (n * s > gen_cap)
    throw resource_error("ext1: generator bound exceeded (" + std::to_string(n * s) + " > " +
                         std::to_string(gen_cap) + ")");
  // restriction map N^gens -> N^s, vec-level matrix kron(kb^T, I_n)
  Mat<R> restr = mat_kron(ring, mat_transpose(ring, kb), Mat<R>::identity(ring, n));
  Mat<R> target_rel = mat_kron(ring, Mat<R>::identity(ring, s), N.relations);
  return make_module(ring, n * s, mat_hstack(ring, restr, target_rel));
}

}  // namespace mlt
