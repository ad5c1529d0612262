#include "catch_amalgamated.hpp"

#include <random>

#include "support/test_util.hpp"

using namespace mlt;
using test_util::bigint;
using test_util::ZMat;
using test_util::rand_int;

namespace {

ZMat from_rows(const std::vector<std::vector<long long>>& rows, std::size_t cols) {
  IntegerRing zr;
  ZMat m(rows.size(), cols, zr.zero());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols; ++j) m.at(i, j) = bigint(rows[i][j]);
  return m;
}

void check_snf_contract(const IntegerRing& zr, const ZMat& a) {
  auto s = snf(zr, a);
  REQUIRE(mat_eq(zr, mat_mul(zr, mat_mul(zr, s.U, a), s.V), s.D));
  REQUIRE(zr.is_unit(determinant(zr, s.U)));
  REQUIRE(zr.is_unit(determinant(zr, s.V)));
  REQUIRE(mat_eq(zr, mat_mul(zr, s.U, s.Uinv), ZMat::identity(zr, a.rows)));
  REQUIRE(mat_eq(zr, mat_mul(zr, s.V, s.Vinv), ZMat::identity(zr, a.cols)));
  for (std::size_t i = 0; i < s.D.rows; ++i)
    for (std::size_t j = 0; j < s.D.cols; ++j)
      if (i != j) REQUIRE(s.D.at(i, j) == 0);
  for (std::size_t i = 0; i + 1 < s.factors.size(); ++i)
    REQUIRE(s.factors[i + 1] % s.factors[i] == 0);
  for (const auto& d : s.factors) REQUIRE(d > 0);
}

}  // namespace

TEST_CASE("snf on the trivial shapes") {
  IntegerRing zr;
  auto z22 = ZMat::zero(zr, 2, 2);
  auto s = snf(zr, z22);
  REQUIRE(s.factors.empty());
  REQUIRE(mat_is_zero(zr, s.D));
  REQUIRE(mat_eq(zr, s.U, ZMat::identity(zr, 2)));
  REQUIRE(mat_eq(zr, s.V, ZMat::identity(zr, 2)));

  auto id3 = ZMat::identity(zr, 3);
  auto si = snf(zr, id3);
  REQUIRE(si.factors == std::vector<bigint>{1, 1, 1});
  REQUIRE(mat_eq(zr, si.D, id3));
}

TEST_CASE("snf worked example") {
  IntegerRing zr;
  auto a = from_rows({{2, 4}, {6, 8}}, 2);
  auto s = snf(zr, a);
  REQUIRE(s.factors == std::vector<bigint>{2, 4});
  check_snf_contract(zr, a);
  // cross-checked against determinantal divisors: d1 = gcd of entries,
  // d1*d2 = gcd of 2x2 minors = |det|
  REQUIRE(test_util::determinantal_divisor(a, 1) == 2);
  REQUIRE(test_util::determinantal_divisor(a, 2) == 8);
}

TEST_CASE("snf satisfies its contract on random matrices") {
  IntegerRing zr;
  std::mt19937_64 rng(21);
  for (int it = 0; it < 60; ++it) {
    std::size_t r = static_cast<std::size_t>(rand_int(rng, 1, 5));
    std::size_t c = static_cast<std::size_t>(rand_int(rng, 1, 5));
    auto a = test_util::random_matrix(rng, r, c, 9);
    check_snf_contract(zr, a);
  }
}

TEST_CASE("snf factors match determinantal divisors") {
  IntegerRing zr;
  std::mt19937_64 rng(22);
  for (int it = 0; it < 25; ++it) {
    std::size_t r = static_cast<std::size_t>(rand_int(rng, 1, 4));
    std::size_t c = static_cast<std::size_t>(rand_int(rng, 1, 4));
    auto a = test_util::random_matrix(rng, r, c, 6);
    auto s = snf(zr, a);
    bigint prod = 1;
    for (std::size_t k = 1; k <= s.factors.size(); ++k) {
      prod *= s.factors[k - 1];
      REQUIRE(test_util::determinantal_divisor(a, k) == prod);
    }
    if (s.factors.size() < std::min(r, c))
      REQUIRE(test_util::determinantal_divisor(a, s.factors.size() + 1) == 0);
  }
}

TEST_CASE("solve_linear worked examples") {
  IntegerRing zr;
  // identity: x = b
  auto id = ZMat::identity(zr, 3);
  std::vector<bigint> b{5, -2, 7};
  auto x = solve_linear(zr, id, b);
  REQUIRE(x.has_value());
  REQUIRE(*x == b);
  // 2x = 3 has no integer solution
  auto two = from_rows({{2}}, 1);
  REQUIRE_FALSE(solve_linear(zr, two, {bigint(3)}).has_value());
  // x + 2y = 5 is solvable
  auto row = from_rows({{1, 2}}, 2);
  auto sol = solve_linear(zr, row, {bigint(5)});
  REQUIRE(sol.has_value());
  REQUIRE((*sol)[0] + 2 * (*sol)[1] == 5);
}

TEST_CASE("solve_linear agrees with box enumeration on tiny systems") {
  IntegerRing zr;
  std::mt19937_64 rng(23);
  for (int it = 0; it < 120; ++it) {
    std::size_t r = static_cast<std::size_t>(rand_int(rng, 1, 2));
    std::size_t c = static_cast<std::size_t>(rand_int(rng, 1, 2));
    auto a = test_util::random_matrix(rng, r, c, 3);
    std::vector<bigint> b;
    for (std::size_t i = 0; i < r; ++i) b.push_back(bigint(rand_int(rng, -4, 4)));
    auto x = solve_linear(zr, a, b);
    if (x) {
      auto ax = mat_apply(zr, a, *x);
      REQUIRE(ax == b);
    } else {
      REQUIRE_FALSE(test_util::box_solvable(a, b, 12));
    }
  }
}

TEST_CASE("kernel_basis worked examples and random spans") {
  IntegerRing zr;
  auto zmap = ZMat::zero(zr, 2, 3);
  auto k0 = kernel_basis(zr, zmap);
  REQUIRE(k0.cols == 3);
  REQUIRE(zr.is_unit(determinant(zr, k0)));  // spans all of R^3

  auto inj = from_rows({{2, 0}, {0, 3}}, 2);
  REQUIRE(kernel_basis(zr, inj).cols == 0);

  auto row = from_rows({{1, 1}}, 2);
  auto k = kernel_basis(zr, row);
  REQUIRE(k.cols == 1);
  REQUIRE(k.at(0, 0) + k.at(1, 0) == 0);
  REQUIRE(boost::multiprecision::abs(k.at(0, 0)) == 1);

  std::mt19937_64 rng(24);
  for (int it = 0; it < 40; ++it) {
    auto a = test_util::random_matrix(rng, 3, 4, 5);
    auto kb = kernel_basis(zr, a);
    REQUIRE(mat_is_zero(zr, mat_mul(zr, a, kb)));
    REQUIRE(kb.cols == 4 - mat_rank(zr, a));
  }
}

TEST_CASE("cokernel invariants worked examples") {
  IntegerRing zr;
  auto id = ZMat::identity(zr, 2);
  auto c1 = cokernel_invariants(zr, id);
  REQUIRE(c1.invariants.empty());
  REQUIRE(c1.free_rank == 0);

  auto d24 = from_rows({{2, 0}, {0, 4}}, 2);
  auto c2 = cokernel_invariants(zr, d24);
  REQUIRE(c2.invariants == std::vector<bigint>{2, 4});
  REQUIRE(c2.free_rank == 0);

  auto zero_into = ZMat::zero(zr, 3, 0);
  auto c3 = cokernel_invariants(zr, zero_into);
  REQUIRE(c3.invariants.empty());
  REQUIRE(c3.free_rank == 3);
}

TEST_CASE("cokernel invariants are unimodular-invariant") {
  IntegerRing zr;
  std::mt19937_64 rng(25);
  for (int it = 0; it < 30; ++it) {
    auto a = test_util::random_matrix(rng, 3, 3, 6);
    auto u = test_util::random_unimodular(rng, 3);
    auto v = test_util::random_unimodular(rng, 3);
    auto base = cokernel_invariants(zr, a);
    auto moved = cokernel_invariants(zr, mat_mul(zr, u, mat_mul(zr, a, v)));
    REQUIRE(base.invariants == moved.invariants);
    REQUIRE(base.free_rank == moved.free_rank);
  }
}

TEST_CASE("saturation basis contains the column span with torsion-free quotient") {
  IntegerRing zr;
  auto b = from_rows({{2, 0}, {0, 3}, {0, 0}}, 2);
  auto sat = saturation_basis(zr, b);
  REQUIRE(sat.cols == 2);
  LinearSolver<IntegerRing> solver(zr, sat);
  REQUIRE(solver.solve_mat(b).has_value());
  // quotient by the saturation is free: no invariant factors
  REQUIRE(cokernel_invariants(zr, sat).invariants.empty());
}

TEST_CASE("snf over a polynomial ring") {
  PolyRing p2(2);
  Mat<PolyRing> a(2, 2, p2.zero());
  a.at(0, 0) = p2.from_string("x");
  a.at(0, 1) = p2.from_string("x^2");
  a.at(1, 0) = p2.from_string("1");
  a.at(1, 1) = p2.from_string("x^3+1");
  auto s = snf(p2, a);
  REQUIRE(mat_eq(p2, mat_mul(p2, mat_mul(p2, s.U, a), s.V), s.D));
  REQUIRE(p2.is_unit(determinant(p2, s.U)));
  REQUIRE(p2.is_unit(determinant(p2, s.V)));
  for (std::size_t i = 0; i + 1 < s.factors.size(); ++i)
    REQUIRE(p2.divides(s.factors[i], s.factors[i + 1]));
  for (const auto& f : s.factors) REQUIRE(f.c.back() == 1);  // monic normalization
}
