#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "mltower/ring.hpp"

namespace mlt {

/// Dense matrix over a Euclidean domain. Row-major storage; plain value
/// type with no ring pointer, so every operation takes the ring explicitly.
template <euclidean_ring R>
struct Mat {
  using E = typename R::Elem;

  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<E> a;

  Mat() = default;
  Mat(std::size_t r, std::size_t c, const E& fill) : rows(r), cols(c), a(r * c, fill) {}

  E& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  const E& at(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

  static Mat zero(const R& ring, std::size_t r, std::size_t c) { return Mat(r, c, ring.zero()); }

  static Mat identity(const R& ring, std::size_t n) {
    Mat m(n, n, ring.zero());
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = ring.one();
    return m;
  }
};

template <euclidean_ring R>
bool mat_eq(const R& ring, const Mat<R>& x, const Mat<R>& y) {
  if (x.rows != y.rows || x.cols != y.cols) return false;
  for (std::size_t i = 0; i < x.a.size(); ++i)
    if (!ring.eq(x.a[i], y.a[i])) return false;
  return true;
}

template <euclidean_ring R>
bool mat_is_zero(const R& ring, const Mat<R>& x) {
  for (const auto& v : x.a)
    if (!ring.is_zero(v)) return false;
  return true;
}

template <euclidean_ring R>
Mat<R> mat_mul(const R& ring, const Mat<R>& x, const Mat<R>& y) {
  if (x.cols != y.rows) throw std::invalid_argument("mat_mul: dimension mismatch");
  Mat<R> z(x.rows, y.cols, ring.zero());
  for (std::size_t i = 0; i < x.rows; ++i)
    for (std::size_t k = 0; k < x.cols; ++k) {
      const auto& xik = x.at(i, k);
      if (ring.is_zero(xik)) continue;
      for (std::size_t j = 0; j < y.cols; ++j)
        z.at(i, j) = ring.add(z.at(i, j), ring.mul(xik, y.at(k, j)));
    }
  return z;
}

template <euclidean_ring R>
Mat<R> mat_add(const R& ring, const Mat<R>& x, const Mat<R>& y) {
  if (x.rows != y.rows || x.cols != y.cols) throw std::invalid_argument("mat_add: shape mismatch");
  Mat<R> z = x;
  for (std::size_t i = 0; i < z.a.size(); ++i) z.a[i] = ring.add(z.a[i], y.a[i]);
  return z;
}

template <euclidean_ring R>
Mat<R> mat_sub(const R& ring, const Mat<R>& x, const Mat<R>& y) {
  if (x.rows != y.rows || x.cols != y.cols) throw std::invalid_argument("mat_sub: shape mismatch");
  Mat<R> z = x;
  for (std::size_t i = 0; i < z.a.size(); ++i) z.a[i] = ring.sub(z.a[i], y.a[i]);
  return z;
}

template <euclidean_ring R>
Mat<R> mat_neg(const R& ring, const Mat<R>& x) {
  Mat<R> z = x;
  for (auto& v : z.a) v = ring.neg(v);
  return z;
}

template <euclidean_ring R>
Mat<R> mat_scale(const R& ring, const typename R::Elem& c, const Mat<R>& x) {
  Mat<R> z = x;
  for (auto& v : z.a) v = ring.mul(c, v);
  return z;
}

template <euclidean_ring R>
Mat<R> mat_transpose(const R&, const Mat<R>& x) {
  Mat<R> z;
  z.rows = x.cols;
  z.cols = x.rows;
  z.a.resize(x.a.size(), typename R::Elem{});
  for (std::size_t i = 0; i < x.rows; ++i)
    for (std::size_t j = 0; j < x.cols; ++j) z.at(j, i) = x.at(i, j);
  return z;
}

/// [x | y] with matching row counts.
template <euclidean_ring R>
Mat<R> mat_hstack(const R&, const Mat<R>& x, const Mat<R>& y) {
  if (x.rows != y.rows) throw std::invalid_argument("mat_hstack: row mismatch");
  Mat<R> z;
  z.rows = x.rows;
  z.cols = x.cols + y.cols;
  z.a.resize(z.rows * z.cols, typename R::Elem{});
  for (std::size_t i = 0; i < z.rows; ++i) {
    for (std::size_t j = 0; j < x.cols; ++j) z.at(i, j) = x.at(i, j);
    for (std::size_t j = 0; j < y.cols; ++j) z.at(i, x.cols + j) = y.at(i, j);
  }
  return z;
}

template <euclidean_ring R>
Mat<R> mat_vstack(const R&, const Mat<R>& x, const Mat<R>& y) {
  if (x.cols != y.cols) throw std::invalid_argument("mat_vstack: column mismatch");
  Mat<R> z;
  z.rows = x.rows + y.rows;
  z.cols = x.cols;
  z.a = x.a;
  z.a.insert(z.a.end(), y.a.begin(), y.a.end());
  return z;
}

/// Kronecker product; kron(A, I) realizes the column-major vec identity
/// vec(X * A^T) = kron(A, I) * vec(X).
template <euclidean_ring R>
Mat<R> mat_kron(const R& ring, const Mat<R>& x, const Mat<R>& y) {
  Mat<R> z(x.rows * y.rows, x.cols * y.cols, ring.zero());
  for (std::size_t i = 0; i < x.rows; ++i)
    for (std::size_t j = 0; j < x.cols; ++j) {
      if (ring.is_zero(x.at(i, j))) continue;
      for (std::size_t k = 0; k < y.rows; ++k)
        for (std::size_t l = 0; l < y.cols; ++l)
          z.at(i * y.rows + k, j * y.cols + l) = ring.mul(x.at(i, j), y.at(k, l));
    }
  return z;
}

template <euclidean_ring R>
std::vector<typename R::Elem> mat_col(const Mat<R>& x, std::size_t j) {
  std::vector<typename R::Elem> v(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) v[i] = x.at(i, j);
  return v;
}

template <euclidean_ring R>
void mat_set_col(Mat<R>& x, std::size_t j, const std::vector<typename R::Elem>& v) {
  for (std::size_t i = 0; i < x.rows; ++i) x.at(i, j) = v[i];
}

template <euclidean_ring R>
Mat<R> mat_from_cols(const R& ring, std::size_t rows,
                     const std::vector<std::vector<typename R::Elem>>& cols) {
  Mat<R> z(rows, cols.size(), ring.zero());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (cols[j].size() != rows) throw std::invalid_argument("mat_from_cols: column length mismatch");
    for (std::size_t i = 0; i < rows; ++i) z.at(i, j) = cols[j][i];
  }
  return z;
}

template <euclidean_ring R>
std::vector<typename R::Elem> mat_apply(const R& ring, const Mat<R>& x,
                                        const std::vector<typename R::Elem>& v) {
  if (x.cols != v.size()) throw std::invalid_argument("mat_apply: dimension mismatch");
  std::vector<typename R::Elem> out(x.rows, ring.zero());
  for (std::size_t i = 0; i < x.rows; ++i)
    for (std::size_t j = 0; j < x.cols; ++j)
      if (!ring.is_zero(x.at(i, j))) out[i] = ring.add(out[i], ring.mul(x.at(i, j), v[j]));
  return out;
}

template <euclidean_ring R>
Mat<R> mat_pow(const R& ring, const Mat<R>& x, std::size_t e) {
  if (x.rows != x.cols) throw std::invalid_argument("mat_pow: square matrix required");
  Mat<R> acc = Mat<R>::identity(ring, x.rows);
  for (std::size_t i = 0; i < e; ++i) acc = mat_mul(ring, acc, x);
  return acc;
}

/// Exact determinant by fraction-free (Bareiss) elimination; valid over any
/// integral domain since every division is exact.
template <euclidean_ring R>
typename R::Elem determinant(const R& ring, const Mat<R>& x) {
  if (x.rows != x.cols) throw std::invalid_argument("determinant: square matrix required");
  const std::size_t n = x.rows;
  if (n == 0) return ring.one();
  Mat<R> m = x;
  typename R::Elem prev = ring.one();
  bool negate = false;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (ring.is_zero(m.at(k, k))) {
      std::size_t piv = k + 1;
      while (piv < n && ring.is_zero(m.at(piv, k))) ++piv;
      if (piv == n) return ring.zero();
      for (std::size_t j = 0; j < n; ++j) std::swap(m.at(k, j), m.at(piv, j));
      negate = !negate;
    }
    for (std::size_t i = k + 1; i < n; ++i)
      for (std::size_t j = k + 1; j < n; ++j) {
        auto num = ring.sub(ring.mul(m.at(i, j), m.at(k, k)), ring.mul(m.at(i, k), m.at(k, j)));
        m.at(i, j) = ring.exact_div(num, prev);
      }
    prev = m.at(k, k);
  }
  auto d = m.at(n - 1, n - 1);
  return negate ? ring.neg(d) : d;
}

}  // namespace mlt
