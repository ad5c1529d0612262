#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "mltower/matrix.hpp"
#include "mltower/ring.hpp"

namespace mlt {

/// Smith normal form U*A*V = D with unimodular U, V. The inverses are
/// accumulated alongside because most callers need them (kernel lattices,
/// saturations, torsion generators). Diagonal entries are canonical
/// associates and satisfy d_1 | d_2 | ... ; `factors` lists the nonzero
/// ones, units included.
template <euclidean_ring R>
struct SNF {
  using E = typename R::Elem;

  Mat<R> U, Uinv, V, Vinv, D;
  std::vector<E> factors;
  std::size_t rank = 0;
};

namespace detail {

template <euclidean_ring R>
struct SmithWorker {
  using E = typename R::Elem;

  const R& ring;
  SNF<R>& s;

  void row_swap(std::size_t i1, std::size_t i2) {
    if (i1 == i2) return;
    for (std::size_t j = 0; j < s.D.cols; ++j) std::swap(s.D.at(i1, j), s.D.at(i2, j));
    for (std::size_t j = 0; j < s.U.cols; ++j) std::swap(s.U.at(i1, j), s.U.at(i2, j));
    for (std::size_t i = 0; i < s.Uinv.rows; ++i) std::swap(s.Uinv.at(i, i1), s.Uinv.at(i, i2));
  }

  void col_swap(std::size_t j1, std::size_t j2) {
    if (j1 == j2) return;
    for (std::size_t i = 0; i < s.D.rows; ++i) std::swap(s.D.at(i, j1), s.D.at(i, j2));
    for (std::size_t i = 0; i < s.V.rows; ++i) std::swap(s.V.at(i, j1), s.V.at(i, j2));
    for (std::size_t j = 0; j < s.Vinv.cols; ++j) std::swap(s.Vinv.at(j1, j), s.Vinv.at(j2, j));
  }

  // row i += q * row t
  void row_add(std::size_t i, std::size_t t, const E& q) {
    for (std::size_t j = 0; j < s.D.cols; ++j)
      s.D.at(i, j) = ring.add(s.D.at(i, j), ring.mul(q, s.D.at(t, j)));
    for (std::size_t j = 0; j < s.U.cols; ++j)
      s.U.at(i, j) = ring.add(s.U.at(i, j), ring.mul(q, s.U.at(t, j)));
    for (std::size_t k = 0; k < s.Uinv.rows; ++k)
      s.Uinv.at(k, t) = ring.sub(s.Uinv.at(k, t), ring.mul(q, s.Uinv.at(k, i)));
  }

  // col j += q * col t
  void col_add(std::size_t j, std::size_t t, const E& q) {
    for (std::size_t i = 0; i < s.D.rows; ++i)
      s.D.at(i, j) = ring.add(s.D.at(i, j), ring.mul(q, s.D.at(i, t)));
    for (std::size_t i = 0; i < s.V.rows; ++i)
      s.V.at(i, j) = ring.add(s.V.at(i, j), ring.mul(q, s.V.at(i, t)));
    for (std::size_t k = 0; k < s.Vinv.cols; ++k)
      s.Vinv.at(t, k) = ring.sub(s.Vinv.at(t, k), ring.mul(q, s.Vinv.at(j, k)));
  }

  // rows (t, i) <- (x*row_t + y*row_i, -(b/g)*row_t + (a/g)*row_i), a 2x2
  // transform of determinant 1, where x*a + y*b = g.
  void row_combine(std::size_t t, std::size_t i, const E& x, const E& y, const E& ag,
                   const E& bg) {
    auto comb = [&](Mat<R>& m) {
      for (std::size_t j = 0; j < m.cols; ++j) {
        E mt = m.at(t, j), mi = m.at(i, j);
        m.at(t, j) = ring.add(ring.mul(x, mt), ring.mul(y, mi));
        m.at(i, j) = ring.add(ring.neg(ring.mul(bg, mt)), ring.mul(ag, mi));
      }
    };
    comb(s.D);
    comb(s.U);
    for (std::size_t k = 0; k < s.Uinv.rows; ++k) {
      E ct = s.Uinv.at(k, t), ci = s.Uinv.at(k, i);
      s.Uinv.at(k, t) = ring.add(ring.mul(ag, ct), ring.mul(bg, ci));
      s.Uinv.at(k, i) = ring.add(ring.neg(ring.mul(y, ct)), ring.mul(x, ci));
    }
  }

  void col_combine(std::size_t t, std::size_t j, const E& x, const E& y, const E& ag,
                   const E& bg) {
    auto comb = [&](Mat<R>& m) {
      for (std::size_t i = 0; i < m.rows; ++i) {
        E ct = m.at(i, t), cj = m.at(i, j);
        m.at(i, t) = ring.add(ring.mul(x, ct), ring.mul(y, cj));
        m.at(i, j) = ring.add(ring.neg(ring.mul(bg, ct)), ring.mul(ag, cj));
      }
    };
    comb(s.D);
    comb(s.V);
    for (std::size_t k = 0; k < s.Vinv.cols; ++k) {
      E rt = s.Vinv.at(t, k), rj = s.Vinv.at(j, k);
      s.Vinv.at(t, k) = ring.add(ring.mul(ag, rt), ring.mul(bg, rj));
      s.Vinv.at(j, k) = ring.add(ring.neg(ring.mul(y, rt)), ring.mul(x, rj));
    }
  }

  // row t *= u (unit)
  void row_scale(std::size_t t, const E& u) {
    E uinv = unit_inverse(ring, u);
    for (std::size_t j = 0; j < s.D.cols; ++j) s.D.at(t, j) = ring.mul(u, s.D.at(t, j));
    for (std::size_t j = 0; j < s.U.cols; ++j) s.U.at(t, j) = ring.mul(u, s.U.at(t, j));
    for (std::size_t k = 0; k < s.Uinv.rows; ++k) s.Uinv.at(k, t) = ring.mul(uinv, s.Uinv.at(k, t));
  }
};

}  // namespace detail

template <euclidean_ring R>
SNF<R> snf(const R& ring, const Mat<R>& A) {
  using E = typename R::Elem;
  SNF<R> s;
  s.U = Mat<R>::identity(ring, A.rows);
  s.Uinv = s.U;
  s.V = Mat<R>::identity(ring, A.cols);
  s.Vinv = s.V;
  s.D = A;
  detail::SmithWorker<R> w{ring, s};

  const std::size_t steps = std::min(A.rows, A.cols);
  for (std::size_t t = 0; t < steps; ++t) {
    // Pivot: nonzero entry of smallest Euclidean degree in the trailing
    // submatrix, ties broken row-major. Deterministic and keeps entries small.
    bool found = false;
    std::size_t pi = t, pj = t;
    for (std::size_t i = t; i < s.D.rows; ++i)
      for (std::size_t j = t; j < s.D.cols; ++j) {
        const E& v = s.D.at(i, j);
        if (ring.is_zero(v)) continue;
        if (!found || ring.degree_less(v, s.D.at(pi, pj))) {
          found = true;
          pi = i;
          pj = j;
        }
      }
    if (!found) break;
    w.row_swap(t, pi);
    w.col_swap(t, pj);

    for (;;) {
      bool dirty = false;
      for (std::size_t i = t + 1; i < s.D.rows; ++i) {
        const E& v = s.D.at(i, t);
        if (ring.is_zero(v)) continue;
        const E& piv = s.D.at(t, t);
        auto [q, r] = ring.divmod(v, piv);
        if (ring.is_zero(r)) {
          w.row_add(i, t, ring.neg(q));
        } else {
          auto [g, x, y] = ring_xgcd(ring, piv, v);
          w.row_combine(t, i, x, y, ring.exact_div(piv, g), ring.exact_div(v, g));
          dirty = true;
        }
      }
      for (std::size_t j = t + 1; j < s.D.cols; ++j) {
        const E& v = s.D.at(t, j);
        if (ring.is_zero(v)) continue;
        const E& piv = s.D.at(t, t);
        auto [q, r] = ring.divmod(v, piv);
        if (ring.is_zero(r)) {
          w.col_add(j, t, ring.neg(q));
        } else {
          auto [g, x, y] = ring_xgcd(ring, piv, v);
          w.col_combine(t, j, x, y, ring.exact_div(piv, g), ring.exact_div(v, g));
          dirty = true;
        }
      }
      if (dirty) continue;
      bool col_clear = true;
      for (std::size_t i = t + 1; i < s.D.rows && col_clear; ++i)
        if (!ring.is_zero(s.D.at(i, t))) col_clear = false;
      if (!col_clear) continue;
      // Pivot must divide the whole trailing block for the chain d_t | d_{t+1}.
      bool fixed = false;
      for (std::size_t i = t + 1; i < s.D.rows && !fixed; ++i)
        for (std::size_t j = t + 1; j < s.D.cols && !fixed; ++j)
          if (!ring.divides(s.D.at(t, t), s.D.at(i, j))) {
            w.row_add(t, i, ring.one());
            fixed = true;
          }
      if (!fixed) break;
    }
    auto [c, u] = ring.canonical(s.D.at(t, t));
    if (!ring.eq(u, ring.one())) w.row_scale(t, u);
  }

  for (std::size_t t = 0; t < steps; ++t) {
    if (ring.is_zero(s.D.at(t, t))) break;
    s.factors.push_back(s.D.at(t, t));
  }
  s.rank = s.factors.size();
  for (std::size_t i = 0; i + 1 < s.factors.size(); ++i)
    if (!ring.divides(s.factors[i], s.factors[i + 1]))
      throw std::logic_error("snf: divisibility chain violated");
  return s;
}

/// Caches one decomposition and answers A*x = b queries exactly.
template <euclidean_ring R>
class LinearSolver {
 public:
  using E = typename R::Elem;

  LinearSolver(const R& ring, Mat<R> A) : ring_(ring), A_(std::move(A)), s_(snf(ring, A_)) {}

  const SNF<R>& decomposition() const { return s_; }
  const Mat<R>& matrix() const { return A_; }

  std::optional<std::vector<E>> solve(const std::vector<E>& b) const {
    if (b.size() != A_.rows) throw std::invalid_argument("LinearSolver::solve: dimension mismatch");
    std::vector<E> c = mat_apply(ring_, s_.U, b);
    std::vector<E> y(A_.cols, ring_.zero());
    for (std::size_t i = 0; i < s_.rank; ++i) {
      auto [q, r] = ring_.divmod(c[i], s_.factors[i]);
      if (!ring_.is_zero(r)) return std::nullopt;
      y[i] = q;
    }
    for (std::size_t i = s_.rank; i < A_.rows; ++i)
      if (!ring_.is_zero(c[i])) return std::nullopt;
    return mat_apply(ring_, s_.V, y);
  }

  bool solvable(const std::vector<E>& b) const { return solve(b).has_value(); }

  /// Columnwise solve of A*X = B; nullopt if any column fails.
  std::optional<Mat<R>> solve_mat(const Mat<R>& B) const {
    if (B.rows != A_.rows) throw std::invalid_argument("LinearSolver::solve_mat: row mismatch");
    Mat<R> X(A_.cols, B.cols, ring_.zero());
    for (std::size_t j = 0; j < B.cols; ++j) {
      auto x = solve(mat_col(B, j));
      if (!x) return std::nullopt;
      mat_set_col(X, j, *x);
    }
    return X;
  }

 private:
  R ring_;
  Mat<R> A_;
  SNF<R> s_;
};

template <euclidean_ring R>
std::optional<std::vector<typename R::Elem>> solve_linear(const R& ring, const Mat<R>& A,
                                                          const std::vector<typename R::Elem>& b) {
  return LinearSolver<R>(ring, A).solve(b);
}

/// Columns generate ker(A); over a Euclidean domain they are in fact a basis
/// (the kernel of a map between free modules is free).
template <euclidean_ring R>
Mat<R> kernel_basis(const R& ring, const Mat<R>& A) {
  auto s = snf(ring, A);
  Mat<R> K(A.cols, A.cols - s.rank, ring.zero());
  for (std::size_t j = s.rank; j < A.cols; ++j)
    for (std::size_t i = 0; i < A.cols; ++i) K.at(i, j - s.rank) = s.V.at(i, j);
  return K;
}

template <euclidean_ring R>
struct CokernelInvariants {
  std::vector<typename R::Elem> invariants;  // non-unit invariant factors
  std::size_t free_rank = 0;
};

/// Invariant factors and free rank of coker(A) = R^rows / A*R^cols.
template <euclidean_ring R>
CokernelInvariants<R> cokernel_invariants(const R& ring, const Mat<R>& A) {
  auto s = snf(ring, A);
  CokernelInvariants<R> out;
  for (const auto& d : s.factors)
    if (!ring.is_unit(d)) out.invariants.push_back(d);
  out.free_rank = A.rows - s.rank;
  return out;
}

template <euclidean_ring R>
std::size_t mat_rank(const R& ring, const Mat<R>& A) {
  return snf(ring, A).rank;
}

/// Basis of the saturation of the column span of B inside R^rows: the set of
/// x with r*x in im(B) for some nonzero r.
template <euclidean_ring R>
Mat<R> saturation_basis(const R& ring, const Mat<R>& B) {
  auto s = snf(ring, B);
  Mat<R> out(B.rows, s.rank, ring.zero());
  for (std::size_t j = 0; j < s.rank; ++j)
    for (std::size_t i = 0; i < B.rows; ++i) out.at(i, j) = s.Uinv.at(i, j);
  return out;
}

}  // namespace mlt
