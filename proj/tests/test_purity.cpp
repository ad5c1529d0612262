#include "catch_amalgamated.hpp"

#include <random>

#include "support/test_util.hpp"

using namespace mlt;
using test_util::bigint;
using test_util::ZMat;
using test_util::rand_int;

TEST_CASE("torsion submodule and annihilator") {
  IntegerRing zr;
  auto g = diagonal_module(zr, {bigint(6)}, 1);  // Z/6 + Z
  auto t = torsion_submodule(zr, g);
  REQUIRE(t.annihilator == 6);
  auto [tm, tinc] = submodule_as_module(zr, t.sub);
  REQUIRE(tm.invariants == std::vector<bigint>{6});
  REQUIRE(tm.free_rank == 0);

  auto f = free_module(zr, 3);
  auto tf = torsion_submodule(zr, f);
  REQUIRE(tf.annihilator == 1);
  REQUIRE(sub_is_zero(zr, tf.sub));

  auto g2 = diagonal_module(zr, {bigint(2), bigint(4)});
  auto t2 = torsion_submodule(zr, g2);
  REQUIRE(t2.annihilator == 4);  // lcm of the invariant factors
  REQUIRE(sub_eq(zr, t2.sub, sub_full(zr, g2)));
}

TEST_CASE("divisible part: structural zero, sampled over-approximation") {
  IntegerRing zr;
  auto z = free_module(zr, 1);
  auto d = divisible_part(zr, z, {bigint(2), bigint(3)});
  REQUIRE(sub_is_zero(zr, d.structural));
  ZMat six(1, 1, bigint(6));
  REQUIRE(sub_eq(zr, d.sampled, sub_from_cols(zr, z, six)));

  auto m6 = cyclic_module(zr, bigint(6));
  auto d6 = divisible_part(zr, m6, {bigint(6)});
  REQUIRE(sub_is_zero(zr, d6.sampled));

  auto d0 = divisible_part(zr, zero_module(zr), {bigint(2)});
  REQUIRE(sub_is_zero(zr, d0.sampled));

  REQUIRE_THROWS_AS(divisible_part(zr, z, {}), std::invalid_argument);
  REQUIRE_THROWS_AS(divisible_part(zr, z, {bigint(0)}), std::invalid_argument);
}

TEST_CASE("sampled intersections shrink monotonically") {
  IntegerRing zr;
  std::mt19937_64 rng(51);
  std::vector<bigint> probes{bigint(2), bigint(3), bigint(5), bigint(7)};
  for (int it = 0; it < 20; ++it) {
    auto g = test_util::random_module(rng, 2, 9, 1);
    Submodule<IntegerRing> prev = sub_full(zr, g);
    for (std::size_t len = 1; len <= probes.size(); ++len) {
      std::vector<bigint> s(probes.begin(), probes.begin() + static_cast<std::ptrdiff_t>(len));
      auto d = divisible_part(zr, g, s);
      REQUIRE(sub_is_zero(zr, d.structural));
      REQUIRE(sub_contains(zr, prev, d.sampled));
      prev = d.sampled;
    }
  }
}

TEST_CASE("finite mu check") {
  IntegerRing zr;
  auto m6 = cyclic_module(zr, bigint(6));
  REQUIRE(finite_mu_check(zr, {bigint(6)}, m6).injective);

  auto z = free_module(zr, 1);
  auto mu = finite_mu_check(zr, {bigint(2), bigint(3)}, z);
  REQUIRE_FALSE(mu.injective);
  REQUIRE(mu.kernel_elem.has_value());
  REQUIRE((*mu.kernel_elem)[0] % 6 == 0);
  REQUIRE((*mu.kernel_elem)[0] != 0);

  REQUIRE(finite_mu_check(zr, {bigint(2)}, zero_module(zr)).injective);
  REQUIRE_THROWS_AS(finite_mu_check(zr, {}, z), std::invalid_argument);
}

TEST_CASE("purity of the identity and of a proper multiple") {
  IntegerRing zr;
  auto z = free_module(zr, 1);
  auto pid = is_pure_submodule(zr, identity_map(zr, z));
  REQUIRE(pid.pure);
  REQUIRE(map_eq(zr, *pid.retraction, identity_map(zr, z)));

  // 2Z inside Z: not pure, witness r = 2 with x = 2
  ZMat two(1, 1, bigint(2));
  auto [n2, inc2] = submodule_as_module(zr, sub_from_cols(zr, z, two));
  auto p2 = is_pure_submodule(zr, inc2);
  REQUIRE_FALSE(p2.pure);
  REQUIRE(p2.witness->first == 2);
  REQUIRE(p2.witness->second == std::vector<bigint>{bigint(2)});
}

TEST_CASE("purity of the diagonal embedding") {
  IntegerRing zr;
  auto z = free_module(zr, 1);
  auto z2 = free_module(zr, 2);
  ZMat diag(2, 1, bigint(1));
  auto inc = make_map(zr, z, z2, diag);
  auto p = is_pure_submodule(zr, inc);
  REQUIRE(p.pure);
  REQUIRE(map_eq(zr, compose(zr, *p.retraction, inc), identity_map(zr, z)));
}

TEST_CASE("purity rejects non-injective inclusions") {
  IntegerRing zr;
  auto m2 = cyclic_module(zr, bigint(2));
  auto m4 = cyclic_module(zr, bigint(4));
  auto red = make_map(zr, m4, m2, ZMat::identity(zr, 1));
  REQUIRE_THROWS_AS(is_pure_submodule(zr, red), std::invalid_argument);
}

TEST_CASE("direct summands are pure, random configurations") {
  IntegerRing zr;
  std::mt19937_64 rng(52);
  for (int it = 0; it < 20; ++it) {
    auto a = test_util::random_module(rng, 2, 8, 1);
    auto b = test_util::random_module(rng, 2, 8, 1);
    auto m = direct_sum(zr, {a, b});
    ZMat inc_cols(m.gens, a.gens, zr.zero());
    for (std::size_t i = 0; i < a.gens; ++i) inc_cols.at(i, i) = 1;
    auto inc = make_map(zr, a, m, inc_cols);
    auto p = is_pure_submodule(zr, inc);
    REQUIRE(p.pure);
    REQUIRE(map_eq(zr, compose(zr, *p.retraction, inc), identity_map(zr, a)));
  }
}

namespace {

// the two-row diagram used by the transfer tests:
//   Z -2-> Z -> Z/2 -> 0 over 0 -> Z -2-> Z -> Z/2,
// verticals h = 2, k = 2, ell = 0 (both squares commute)
HomotopyDiagram<IntegerRing> mul2_diagram(const IntegerRing& zr) {
  auto z = free_module(zr, 1);
  auto m2 = cyclic_module(zr, bigint(2));
  ZMat one = ZMat::identity(zr, 1);
  ZMat two(1, 1, bigint(2));
  auto f = make_map(zr, z, z, two);
  auto pi = make_map(zr, z, m2, one);
  auto eps = make_map(zr, z, z, two);
  auto g = make_map(zr, z, m2, one);
  auto h = make_map(zr, z, z, two);
  auto k = make_map(zr, z, z, two);
  auto ell = zero_map(zr, m2, m2);
  return HomotopyDiagram<IntegerRing>{f, pi, eps, g, h, k, ell};
}

}  // namespace

TEST_CASE("homotopy transfer in both directions") {
  IntegerRing zr;
  auto d = mul2_diagram(zr);
  auto z = free_module(zr, 1);

  // only q = 0 maps Z/2 into Z, and it does satisfy g q = ell = 0
  auto q = zero_map(zr, d.pi.target, d.g.source);
  REQUIRE(map_eq(zr, compose(zr, d.g, q), d.ell));
  auto p = homotopy_transfer(zr, d, TransferDirection::given_q_find_p, q);
  REQUIRE(map_eq(zr, compose(zr, p, d.f), d.h));
  REQUIRE(p.matrix.at(0, 0) == 1);  // eps p = k forces p = 1

  // round trip: transfer p back to some q' with g q' = ell
  auto q2 = homotopy_transfer(zr, d, TransferDirection::given_p_find_q, p);
  REQUIRE(map_eq(zr, compose(zr, d.g, q2), d.ell));

  // degenerate instance: zero ell and zero q force an eps-factorization of k
  auto dz = d;
  dz.k = make_map(zr, z, z, ZMat(1, 1, bigint(4)));
  dz.h = make_map(zr, z, z, ZMat(1, 1, bigint(4)));
  auto qz = zero_map(zr, dz.pi.target, dz.g.source);
  auto pz = homotopy_transfer(zr, dz, TransferDirection::given_q_find_p, qz);
  REQUIRE(map_eq(zr, compose(zr, dz.eps, pz), dz.k));
}

TEST_CASE("homotopy transfer with an isomorphism on top") {
  IntegerRing zr;
  auto z = free_module(zr, 1);
  auto m2 = cyclic_module(zr, bigint(2));
  ZMat one = ZMat::identity(zr, 1);
  ZMat two(1, 1, bigint(2));
  // f an isomorphism forces pi = 0 onto the zero cokernel
  auto zero = zero_module(zr);
  HomotopyDiagram<IntegerRing> d{
      make_map(zr, z, z, one),                    // f = id
      zero_map(zr, z, zero),                      // pi
      make_map(zr, z, z, two),                    // eps: 2Z
      make_map(zr, z, m2, one),                   // g
      make_map(zr, z, z, ZMat(1, 1, bigint(3))),  // h
      make_map(zr, z, z, ZMat(1, 1, bigint(6))),  // k = eps h f^{-1}
      zero_map(zr, zero, m2)};
  auto q = zero_map(zr, zero, z);
  auto p = homotopy_transfer(zr, d, TransferDirection::given_q_find_p, q);
  REQUIRE(map_eq(zr, p, d.h));  // p = h f^{-1} = h
}

TEST_CASE("homotopy transfer reports the first violated hypothesis") {
  IntegerRing zr;
  auto d = mul2_diagram(zr);
  d.k = make_map(zr, free_module(zr, 1), free_module(zr, 1), ZMat(1, 1, bigint(3)));
  auto q = zero_map(zr, d.pi.target, d.g.source);
  REQUIRE_THROWS_WITH(homotopy_transfer(zr, d, TransferDirection::given_q_find_p, q),
                      Catch::Matchers::ContainsSubstring("k o f != eps o h"));
}

TEST_CASE("pure intersection identity for submodules") {
  IntegerRing zr;
  auto z = free_module(zr, 1);
  ZMat two(1, 1, bigint(2));
  auto mul2 = make_map(zr, z, z, two);

  // N = M is trivially equal
  auto full = pure_intersection_check(zr, mul2, z, sub_full(zr, z));
  REQUIRE(full.equal);

  // N = 2Z is not pure; the witness composite is multiplication by 2
  auto bad = pure_intersection_check(zr, mul2, z, sub_from_cols(zr, z, two));
  REQUIRE_FALSE(bad.equal);
  REQUIRE(bad.witness.has_value());
  REQUIRE(bad.witness->matrix.at(0, 0) == 2);

  // a direct summand is pure: always equal
  auto z2 = free_module(zr, 2);
  ZMat first(2, 1, zr.zero());
  first.at(0, 0) = 1;
  std::mt19937_64 rng(53);
  for (int it = 0; it < 10; ++it) {
    ZMat fm(2, 1, zr.zero());
    fm.at(0, 0) = rand_int(rng, -3, 3);
    fm.at(1, 0) = rand_int(rng, -3, 3);
    auto f = make_map(zr, z, z2, fm);
    auto res = pure_intersection_check(zr, f, z2, sub_from_cols(zr, z2, first));
    REQUIRE(res.equal);
  }
}

TEST_CASE("purity decision matches the intersection identity on summands") {
  IntegerRing zr;
  std::mt19937_64 rng(54);
  for (int it = 0; it < 10; ++it) {
    auto a = test_util::random_torsion_module(rng, 2, 6);
    auto b = test_util::random_torsion_module(rng, 1, 6);
    auto m = direct_sum(zr, {a, b});
    ZMat inc_cols(m.gens, a.gens, zr.zero());
    for (std::size_t i = 0; i < a.gens; ++i) inc_cols.at(i, i) = 1;
    Submodule<IntegerRing> n{m, inc_cols};
    auto c = free_module(zr, 1);
    ZMat fm(1, 1, bigint(rand_int(rng, 1, 4)));
    auto f = make_map(zr, c, c, fm);
    auto check = pure_intersection_check(zr, f, m, n);
    REQUIRE(check.equal);
  }
}
