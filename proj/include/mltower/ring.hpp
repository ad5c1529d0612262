#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <concepts>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace mlt {

using bigint = boost::multiprecision::cpp_int;

/// Thrown when a configurable size cap (matrix dimension, hom generator
/// bound, factorization size, ...) would be exceeded. Never silently
/// truncates; the message names the violated cap.
class resource_error : public std::runtime_error {
 public:
  explicit resource_error(const std::string& what) : std::runtime_error(what) {}
};

/// Requirements on a computable Euclidean domain. Elements are plain
/// values; all arithmetic goes through the ring object so that rings with
/// runtime parameters (a prime modulus, say) need no global state.
template <class R>
concept euclidean_ring = requires(const R r, const typename R::Elem a, const typename R::Elem b) {
  typename R::Elem;
  { r.zero() } -> std::same_as<typename R::Elem>;
  { r.one() } -> std::same_as<typename R::Elem>;
  { r.add(a, b) } -> std::same_as<typename R::Elem>;
  { r.sub(a, b) } -> std::same_as<typename R::Elem>;
  { r.mul(a, b) } -> std::same_as<typename R::Elem>;
  { r.neg(a) } -> std::same_as<typename R::Elem>;
  { r.divmod(a, b) } -> std::same_as<std::pair<typename R::Elem, typename R::Elem>>;
  { r.is_zero(a) } -> std::same_as<bool>;
  { r.is_unit(a) } -> std::same_as<bool>;
  { r.eq(a, b) } -> std::same_as<bool>;
  { r.degree_less(a, b) } -> std::same_as<bool>;
  { r.canonical(a) } -> std::same_as<std::pair<typename R::Elem, typename R::Elem>>;
  { r.to_string(a) } -> std::same_as<std::string>;
  { r.tag() } -> std::same_as<std::string>;
};

// ---------------------------------------------------------------------------
// Integers with arbitrary precision.

struct IntegerRing {
  using Elem = bigint;

  static constexpr bool is_field = false;

  std::string tag() const { return "Z"; }

  Elem zero() const { return Elem(0); }
  Elem one() const { return Elem(1); }
  Elem from_int(long long v) const { return Elem(v); }

  Elem add(const Elem& a, const Elem& b) const { return a + b; }
  Elem sub(const Elem& a, const Elem& b) const { return a - b; }
  Elem mul(const Elem& a, const Elem& b) const { return a * b; }
  Elem neg(const Elem& a) const { return -a; }

  bool is_zero(const Elem& a) const { return a.is_zero(); }
  bool is_unit(const Elem& a) const { return a == 1 || a == -1; }
  bool eq(const Elem& a, const Elem& b) const { return a == b; }

  // Division with remainder in [0, |b|); the remainder's absolute value is
  // strictly below |b|, which is what every elimination step relies on.
  std::pair<Elem, Elem> divmod(const Elem& a, const Elem& b) const {
    if (b.is_zero()) throw std::invalid_argument("IntegerRing::divmod: division by zero");
    Elem q = a / b, r = a % b;
    if (r < 0) {
      if (b > 0) {
        q -= 1;
        r += b;
      } else {
        q += 1;
        r -= b;
      }
    }
    return {q, r};
  }

  bool divides(const Elem& d, const Elem& a) const {
    if (d.is_zero()) return a.is_zero();
    return a % d == 0;
  }

  Elem exact_div(const Elem& a, const Elem& d) const {
    if (!divides(d, a)) throw std::invalid_argument("IntegerRing::exact_div: not divisible");
    return a / d;
  }

  // Euclidean size comparison; pivot selection orders by |a|.
  bool degree_less(const Elem& a, const Elem& b) const {
    return boost::multiprecision::abs(a) < boost::multiprecision::abs(b);
  }

  // Total order used only for deterministic output (sorting divisor lists).
  bool less(const Elem& a, const Elem& b) const { return a < b; }

  // Canonical associate: (c, u) with c = a*u, u a unit, c >= 0.
  std::pair<Elem, Elem> canonical(const Elem& a) const {
    if (a < 0) return {-a, Elem(-1)};
    return {a, Elem(1)};
  }

  std::string to_string(const Elem& a) const { return a.str(); }

  Elem from_string(const std::string& s) const {
    if (s.empty()) throw std::invalid_argument("IntegerRing::from_string: empty string");
    std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) throw std::invalid_argument("IntegerRing::from_string: sign only");
    for (; i < s.size(); ++i)
      if (s[i] < '0' || s[i] > '9')
        throw std::invalid_argument("IntegerRing::from_string: not a decimal integer: " + s);
    return Elem(s);
  }

  // Trial division; inputs are desk scale (invariant factors, matrix
  // entries), so nothing clever is needed. Capped to keep pathological
  // inputs from hanging the process.
  std::vector<std::pair<Elem, int>> factor(const Elem& a0) const {
    Elem a = canonical(a0).first;
    if (a.is_zero() || is_unit(a)) return {};
    if (a > Elem(1) << 64) throw resource_error("IntegerRing::factor: operand exceeds factorization cap");
    std::vector<std::pair<Elem, int>> out;
    Elem p = 2;
    while (p * p <= a) {
      if (a % p == 0) {
        int e = 0;
        while (a % p == 0) {
          a /= p;
          ++e;
        }
        out.emplace_back(p, e);
      }
      p += (p == 2) ? 1 : 2;
    }
    if (a > 1) out.emplace_back(a, 1);
    return out;
  }

  // All positive divisors, ascending. Throws if there would be too many.
  std::vector<Elem> divisors(const Elem& a) const {
    auto fac = factor(a);
    std::vector<Elem> out{one()};
    for (const auto& [p, e] : fac) {
      std::vector<Elem> next;
      Elem pk = 1;
      for (int k = 0; k <= e; ++k) {
        for (const auto& d : out) next.push_back(d * pk);
        pk *= p;
      }
      out = std::move(next);
      if (out.size() > 4096) throw resource_error("IntegerRing::divisors: too many divisors");
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  // Upper bound on the composition length of R/aR (number of prime factors
  // with multiplicity); bit length suffices and avoids factoring.
  std::size_t length_bound(const Elem& a) const {
    Elem c = canonical(a).first;
    if (c.is_zero() || is_unit(c)) return 0;
    std::size_t bits = 0;
    while (c > 1) {
      c >>= 1;
      ++bits;
    }
    return bits + 1;
  }
};

// ---------------------------------------------------------------------------
// Univariate polynomials over a prime field GF(p).

/// Dense coefficient vector, ascending degree, normalized (no trailing
/// zeros, all values in [0, p)). The zero polynomial is the empty vector.
struct GFpPoly {
  std::vector<std::uint32_t> c;

  bool operator==(const GFpPoly&) const = default;
};

struct PolyRing {
  using Elem = GFpPoly;

  static constexpr bool is_field = false;

  std::uint32_t p = 2;

  PolyRing() = default;
  explicit PolyRing(std::uint32_t prime) : p(prime) {
    if (p < 2) throw std::invalid_argument("PolyRing: modulus must be a prime >= 2");
    for (std::uint32_t d = 2; d * d <= p; ++d)
      if (p % d == 0) throw std::invalid_argument("PolyRing: modulus is not prime");
  }

  std::string tag() const { return "GF(" + std::to_string(p) + ")[x]"; }

  Elem zero() const { return {}; }
  Elem one() const { return Elem{{1}}; }

  Elem from_int(long long v) const {
    long long m = v % static_cast<long long>(p);
    if (m < 0) m += p;
    if (m == 0) return {};
    return Elem{{static_cast<std::uint32_t>(m)}};
  }

  static int deg(const Elem& a) { return static_cast<int>(a.c.size()) - 1; }  // -1 for zero

  bool is_zero(const Elem& a) const { return a.c.empty(); }
  bool is_unit(const Elem& a) const { return a.c.size() == 1; }
  bool eq(const Elem& a, const Elem& b) const { return a.c == b.c; }

  Elem add(const Elem& a, const Elem& b) const {
    Elem r;
    r.c.resize(std::max(a.c.size(), b.c.size()), 0);
    for (std::size_t i = 0; i < r.c.size(); ++i) {
      std::uint64_t s = 0;
      if (i < a.c.size()) s += a.c[i];
      if (i < b.c.size()) s += b.c[i];
      r.c[i] = static_cast<std::uint32_t>(s % p);
    }
    trim(r);
    return r;
  }

  Elem neg(const Elem& a) const {
    Elem r = a;
    for (auto& x : r.c) x = x ? p - x : 0;
    return r;
  }

  Elem sub(const Elem& a, const Elem& b) const { return add(a, neg(b)); }

  Elem mul(const Elem& a, const Elem& b) const {
    if (a.c.empty() || b.c.empty()) return {};
    Elem r;
    r.c.assign(a.c.size() + b.c.size() - 1, 0);
    for (std::size_t i = 0; i < a.c.size(); ++i)
      for (std::size_t j = 0; j < b.c.size(); ++j) {
        std::uint64_t v = r.c[i + j] + static_cast<std::uint64_t>(a.c[i]) * b.c[j] % p;
        r.c[i + j] = static_cast<std::uint32_t>(v % p);
      }
    trim(r);
    return r;
  }

  std::pair<Elem, Elem> divmod(const Elem& a, const Elem& b) const {
    if (b.c.empty()) throw std::invalid_argument("PolyRing::divmod: division by zero");
    Elem rem = a, quot;
    if (deg(a) >= deg(b)) quot.c.assign(a.c.size() - b.c.size() + 1, 0);
    std::uint32_t lead_inv = inv_mod(b.c.back());
    while (!rem.c.empty() && rem.c.size() >= b.c.size()) {
      std::size_t shift = rem.c.size() - b.c.size();
      std::uint32_t q = static_cast<std::uint32_t>(
          static_cast<std::uint64_t>(rem.c.back()) * lead_inv % p);
      quot.c[shift] = q;
      for (std::size_t i = 0; i < b.c.size(); ++i) {
        std::uint64_t sub_v = static_cast<std::uint64_t>(b.c[i]) * q % p;
        std::uint64_t cur = rem.c[shift + i];
        rem.c[shift + i] = static_cast<std::uint32_t>((cur + p - sub_v) % p);
      }
      trim(rem);
    }
    trim(quot);
    return {quot, rem};
  }

  bool divides(const Elem& d, const Elem& a) const {
    if (d.c.empty()) return a.c.empty();
    return divmod(a, d).second.c.empty();
  }

  Elem exact_div(const Elem& a, const Elem& d) const {
    auto [q, r] = divmod(a, d);
    if (!r.c.empty()) throw std::invalid_argument("PolyRing::exact_div: not divisible");
    return q;
  }

  bool degree_less(const Elem& a, const Elem& b) const { return deg(a) < deg(b); }

  bool less(const Elem& a, const Elem& b) const {
    if (a.c.size() != b.c.size()) return a.c.size() < b.c.size();
    for (std::size_t i = a.c.size(); i-- > 0;)
      if (a.c[i] != b.c[i]) return a.c[i] < b.c[i];
    return false;
  }

  // Canonical associate is the monic polynomial: (c, u) with c = a*u.
  std::pair<Elem, Elem> canonical(const Elem& a) const {
    if (a.c.empty()) return {a, one()};
    std::uint32_t u = inv_mod(a.c.back());
    Elem unit{{u}};
    return {mul(a, unit), unit};
  }

  std::string to_string(const Elem& a) const {
    if (a.c.empty()) return "0";
    std::string s;
    for (std::size_t i = a.c.size(); i-- > 0;) {
      if (a.c[i] == 0) continue;
      if (!s.empty()) s += "+";
      if (i == 0) {
        s += std::to_string(a.c[i]);
      } else {
        if (a.c[i] != 1) s += std::to_string(a.c[i]) + "*";
        s += (i == 1) ? "x" : "x^" + std::to_string(i);
      }
    }
    return s;
  }

  Elem from_string(const std::string& s) const {
    Elem out;
    std::size_t i = 0;
    auto skip_ws = [&] {
      while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    };
    skip_ws();
    if (i == s.size()) throw std::invalid_argument("PolyRing::from_string: empty string");
    bool first = true;
    while (i < s.size()) {
      skip_ws();
      std::uint64_t sign = 1;
      if (s[i] == '+' || s[i] == '-') {
        if (s[i] == '-') sign = p - 1;
        ++i;
        skip_ws();
      } else if (!first) {
        throw std::invalid_argument("PolyRing::from_string: expected '+' or '-': " + s);
      }
      first = false;
      std::uint64_t coef = 1;
      bool saw_coef = false;
      if (i < s.size() && s[i] >= '0' && s[i] <= '9') {
        coef = 0;
        while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
          coef = (coef * 10 + (s[i] - '0')) % p;
          ++i;
        }
        saw_coef = true;
        skip_ws();
        if (i < s.size() && s[i] == '*') {
          ++i;
          skip_ws();
        }
      }
      std::size_t expo = 0;
      if (i < s.size() && s[i] == 'x') {
        ++i;
        expo = 1;
        if (i < s.size() && s[i] == '^') {
          ++i;
          if (i == s.size() || s[i] < '0' || s[i] > '9')
            throw std::invalid_argument("PolyRing::from_string: bad exponent: " + s);
          expo = 0;
          while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
            expo = expo * 10 + (s[i] - '0');
            ++i;
          }
        }
      } else if (!saw_coef) {
        throw std::invalid_argument("PolyRing::from_string: expected term: " + s);
      }
      if (expo > 1024) throw resource_error("PolyRing::from_string: exponent cap exceeded");
      if (out.c.size() < expo + 1) out.c.resize(expo + 1, 0);
      out.c[expo] = static_cast<std::uint32_t>((out.c[expo] + coef * sign) % p);
      skip_ws();
    }
    trim(out);
    return out;
  }

  // Monic irreducible factorization by trial division with enumerated
  // monic candidates of increasing degree. Desk scale only.
  std::vector<std::pair<Elem, int>> factor(const Elem& a0) const {
    Elem a = canonical(a0).first;
    if (a.c.empty() || is_unit(a)) return {};
    std::vector<std::pair<Elem, int>> out;
    for (int d = 1; deg(a) >= 2 * d || deg(a) == d; ++d) {
      if (power_count(d) > 2000000) throw resource_error("PolyRing::factor: candidate cap exceeded");
      std::uint64_t count = power_count(d);
      for (std::uint64_t idx = 0; idx < count && deg(a) >= d; ++idx) {
        Elem cand = monic_by_index(d, idx);
        if (deg(cand) != d) continue;
        int e = 0;
        while (divides(cand, a)) {
          a = exact_div(a, cand);
          ++e;
        }
        if (e > 0) out.emplace_back(cand, e);
        if (deg(a) < 2 * d && deg(a) > d) break;  // remaining part is irreducible or small
      }
    }
    if (deg(a) >= 1) out.emplace_back(a, 1);
    std::sort(out.begin(), out.end(),
              [this](const auto& x, const auto& y) { return less(x.first, y.first); });
    return out;
  }

  std::vector<Elem> divisors(const Elem& a) const {
    auto fac = factor(a);
    std::vector<Elem> out{one()};
    for (const auto& [q, e] : fac) {
      std::vector<Elem> next;
      Elem qk = one();
      for (int k = 0; k <= e; ++k) {
        for (const auto& d : out) next.push_back(mul(d, qk));
        qk = mul(qk, q);
      }
      out = std::move(next);
      if (out.size() > 4096) throw resource_error("PolyRing::divisors: too many divisors");
    }
    std::sort(out.begin(), out.end(), [this](const Elem& x, const Elem& y) { return less(x, y); });
    return out;
  }

  std::size_t length_bound(const Elem& a) const {
    Elem c = canonical(a).first;
    if (c.c.empty() || is_unit(c)) return 0;
    return static_cast<std::size_t>(deg(c));
  }

 private:
  static void trim(Elem& a) {
    while (!a.c.empty() && a.c.back() == 0) a.c.pop_back();
  }

  std::uint32_t inv_mod(std::uint32_t a) const {
    // extended Euclid on machine ints; p is prime so any nonzero a inverts
    std::int64_t t = 0, new_t = 1, r = p, new_r = a % p;
    while (new_r != 0) {
      std::int64_t q = r / new_r;
      std::tie(t, new_t) = std::make_pair(new_t, t - q * new_t);
      std::tie(r, new_r) = std::make_pair(new_r, r - q * new_r);
    }
    if (r != 1) throw std::invalid_argument("PolyRing: modulus is not prime");
    if (t < 0) t += p;
    return static_cast<std::uint32_t>(t);
  }

  std::uint64_t power_count(int d) const {
    std::uint64_t n = 1;
    for (int i = 0; i < d; ++i) {
      n *= p;
      if (n > 2000000) return n;
    }
    return n;
  }

  // idx-th monic polynomial of degree d, lower coefficients in base-p order.
  Elem monic_by_index(int d, std::uint64_t idx) const {
    Elem e;
    e.c.assign(static_cast<std::size_t>(d) + 1, 0);
    e.c[static_cast<std::size_t>(d)] = 1;
    for (int i = 0; i < d; ++i) {
      e.c[static_cast<std::size_t>(i)] = static_cast<std::uint32_t>(idx % p);
      idx /= p;
    }
    return e;
  }
};

// ---------------------------------------------------------------------------
// Ring-generic helpers.

template <euclidean_ring R>
typename R::Elem ring_gcd(const R& ring, typename R::Elem a, typename R::Elem b) {
  while (!ring.is_zero(b)) {
    auto r = ring.divmod(a, b).second;
    a = std::move(b);
    b = std::move(r);
  }
  return ring.canonical(a).first;
}

/// Extended gcd: returns (g, x, y) with x*a + y*b = g and g canonical.
template <euclidean_ring R>
std::tuple<typename R::Elem, typename R::Elem, typename R::Elem> ring_xgcd(
    const R& ring, const typename R::Elem& a, const typename R::Elem& b) {
  using E = typename R::Elem;
  E old_r = a, r = b;
  E old_s = ring.one(), s = ring.zero();
  E old_t = ring.zero(), t = ring.one();
  while (!ring.is_zero(r)) {
    auto [q, rem] = ring.divmod(old_r, r);
    old_r = r;
    r = rem;
    E ns = ring.sub(old_s, ring.mul(q, s));
    old_s = s;
    s = ns;
    E nt = ring.sub(old_t, ring.mul(q, t));
    old_t = t;
    t = nt;
  }
  auto [g, u] = ring.canonical(old_r);
  return {g, ring.mul(old_s, u), ring.mul(old_t, u)};
}

template <euclidean_ring R>
typename R::Elem ring_lcm(const R& ring, const typename R::Elem& a, const typename R::Elem& b) {
  if (ring.is_zero(a) || ring.is_zero(b)) return ring.zero();
  auto g = ring_gcd(ring, a, b);
  return ring.canonical(ring.mul(ring.exact_div(a, g), b)).first;
}

/// Multiplicative inverse of a unit.
template <euclidean_ring R>
typename R::Elem unit_inverse(const R& ring, const typename R::Elem& u) {
  if (!ring.is_unit(u)) throw std::invalid_argument("unit_inverse: not a unit");
  auto [q, r] = ring.divmod(ring.one(), u);
  if (!ring.is_zero(r)) throw std::logic_error("unit_inverse: unit does not divide 1");
  return q;
}

}  // namespace mlt
