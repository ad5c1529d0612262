#pragma once

// Shared generators and independent oracles for the test suites. Oracles
// deliberately avoid the library's Smith-form path: determinants come from
// cofactor expansion, solvability from bounded box enumeration, hom counts
// from direct filtering of candidate generator images.

#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "mltower/mltower.hpp"

namespace test_util {

using Z = mlt::IntegerRing;
using mlt::bigint;
using ZMat = mlt::Mat<Z>;

inline Z zring() { return Z{}; }

inline long long rand_int(std::mt19937_64& rng, long long lo, long long hi) {
  return std::uniform_int_distribution<long long>(lo, hi)(rng);
}

inline ZMat random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols, long long bound) {
  Z zr;
  ZMat m(rows, cols, zr.zero());
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m.at(i, j) = bigint(rand_int(rng, -bound, bound));
  return m;
}

/// Product of elementary row operations: unimodular with entries kept small.
inline ZMat random_unimodular(std::mt19937_64& rng, std::size_t n, int ops = 6) {
  Z zr;
  ZMat u = ZMat::identity(zr, n);
  for (int k = 0; k < ops; ++k) {
    std::size_t i = static_cast<std::size_t>(rand_int(rng, 0, static_cast<long long>(n) - 1));
    std::size_t j = static_cast<std::size_t>(rand_int(rng, 0, static_cast<long long>(n) - 1));
    if (n >= 2 && i == j) j = (j + 1) % n;
    switch (rand_int(rng, 0, 2)) {
      case 0:
        if (n >= 2) {
          bigint q(rand_int(rng, -2, 2));
          for (std::size_t c = 0; c < n; ++c) u.at(i, c) += q * u.at(j, c);
        }
        break;
      case 1:
        if (n >= 2)
          for (std::size_t c = 0; c < n; ++c) std::swap(u.at(i, c), u.at(j, c));
        break;
      default:
        for (std::size_t c = 0; c < n; ++c) u.at(i, c) = -u.at(i, c);
    }
  }
  return u;
}

// ---------------------------------------------------------------------------
// Oracles.

/// Determinant by cofactor expansion; independent of the Bareiss path.
inline bigint det_cofactor(const ZMat& m) {
  if (m.rows != m.cols) throw std::invalid_argument("det_cofactor: square only");
  const std::size_t n = m.rows;
  if (n == 0) return 1;
  if (n == 1) return m.at(0, 0);
  Z zr;
  bigint acc = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (m.at(0, j) == 0) continue;
    ZMat minor(n - 1, n - 1, zr.zero());
    for (std::size_t i = 1; i < n; ++i) {
      std::size_t cc = 0;
      for (std::size_t c = 0; c < n; ++c) {
        if (c == j) continue;
        minor.at(i - 1, cc++) = m.at(i, c);
      }
    }
    bigint term = m.at(0, j) * det_cofactor(minor);
    acc += (j % 2 == 0) ? term : -term;
  }
  return acc;
}

/// k-th determinantal divisor: gcd of all k x k minors (0 when all vanish).
/// The invariant factors satisfy d_1 ... d_k = divisor_k up to sign, which is
/// the classical characterization and does not touch the reduction code.
inline bigint determinantal_divisor(const ZMat& m, std::size_t k) {
  Z zr;
  std::vector<std::size_t> rows(k), cols(k);
  bigint g = 0;
  std::vector<std::size_t> ridx(k), cidx(k);
  // enumerate k-subsets of rows and columns
  std::vector<std::size_t> rsel(k);
  for (std::size_t i = 0; i < k; ++i) rsel[i] = i;
  auto next_subset = [](std::vector<std::size_t>& s, std::size_t n) {
    std::size_t k2 = s.size();
    for (std::size_t i = k2; i-- > 0;) {
      if (s[i] + (k2 - i) < n) {
        ++s[i];
        for (std::size_t j = i + 1; j < k2; ++j) s[j] = s[j - 1] + 1;
        return true;
      }
    }
    return false;
  };
  do {
    std::vector<std::size_t> csel(k);
    for (std::size_t i = 0; i < k; ++i) csel[i] = i;
    do {
      ZMat sub(k, k, zr.zero());
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) sub.at(i, j) = m.at(rsel[i], csel[j]);
      bigint d = det_cofactor(sub);
      if (d < 0) d = -d;
      g = boost::multiprecision::gcd(g, d);
    } while (next_subset(csel, m.cols));
  } while (next_subset(rsel, m.rows));
  return g;
}

/// Exhaustive search for an integer solution of A x = b in the box
/// [-bound, bound]^cols. Only for tiny systems.
inline bool box_solvable(const ZMat& a, const std::vector<bigint>& b, long long bound) {
  const std::size_t n = a.cols;
  std::vector<long long> x(n, -bound);
  if (n == 0) {
    for (const auto& v : b)
      if (v != 0) return false;
    return true;
  }
  for (;;) {
    bool ok = true;
    for (std::size_t i = 0; i < a.rows && ok; ++i) {
      bigint s = 0;
      for (std::size_t j = 0; j < n; ++j) s += a.at(i, j) * x[j];
      if (s != b[i]) ok = false;
    }
    if (ok) return true;
    std::size_t pos = 0;
    while (pos < n && x[pos] == bound) x[pos++] = -bound;
    if (pos == n) return false;
    ++x[pos];
  }
}

/// |Hom(Z/a, Z/b)| by filtering candidate images of the generator.
inline std::size_t hom_count_cyclic(long long a, long long b) {
  std::size_t count = 0;
  for (long long c = 0; c < b; ++c)
    if ((a * c) % b == 0) ++count;
  return count;
}

// ---------------------------------------------------------------------------
// Random modules and maps.

inline mlt::FPModule<Z> random_torsion_module(std::mt19937_64& rng, std::size_t max_gens,
                                              long long max_factor) {
  Z zr;
  std::size_t n = static_cast<std::size_t>(rand_int(rng, 1, static_cast<long long>(max_gens)));
  std::vector<bigint> ds;
  for (std::size_t i = 0; i < n; ++i) ds.push_back(bigint(rand_int(rng, 2, max_factor)));
  return mlt::diagonal_module(zr, ds);
}

inline mlt::FPModule<Z> random_module(std::mt19937_64& rng, std::size_t max_gens, long long max_factor,
                                      std::size_t max_free = 2) {
  Z zr;
  std::size_t t = static_cast<std::size_t>(rand_int(rng, 0, static_cast<long long>(max_gens)));
  std::size_t f = static_cast<std::size_t>(rand_int(rng, 0, static_cast<long long>(max_free)));
  if (t + f == 0) t = 1;
  std::vector<bigint> ds;
  for (std::size_t i = 0; i < t; ++i) ds.push_back(bigint(rand_int(rng, 2, max_factor)));
  return mlt::diagonal_module(zr, ds, f);
}

/// A well-defined endomorphism of a module presented by diag(d_1..d_k) plus
/// free generators: entry (i, j) must be a multiple of d_i / gcd(d_i, d_j)
/// (with d = 0 for free generators).
inline mlt::ModuleMap<Z> random_endomorphism(std::mt19937_64& rng, const mlt::FPModule<Z>& m,
                                             long long bound) {
  Z zr;
  const auto& rel = m.relations;
  std::vector<bigint> d(m.gens, bigint(0));
  for (std::size_t j = 0; j < rel.cols; ++j)
    for (std::size_t i = 0; i < m.gens; ++i)
      if (rel.at(i, j) != 0) d[i] = boost::multiprecision::abs(rel.at(i, j));
  ZMat mm(m.gens, m.gens, zr.zero());
  for (std::size_t i = 0; i < m.gens; ++i)
    for (std::size_t j = 0; j < m.gens; ++j) {
      if (d[j] != 0 && d[i] == 0) continue;  // torsion cannot map to a free coordinate
      bigint step = 1;
      if (d[j] != 0) step = d[i] / boost::multiprecision::gcd(d[i], d[j]);
      mm.at(i, j) = step * bigint(rand_int(rng, -bound, bound));
    }
  return mlt::make_map(zr, m, m, mm);
}

}  // namespace test_util
