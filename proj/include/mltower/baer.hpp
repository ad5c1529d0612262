#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mltower/direct_system.hpp"
#include "mltower/fp_module.hpp"
#include "mltower/purity.hpp"
#include "mltower/ring.hpp"
#include "mltower/tower.hpp"

namespace mlt {

// ---------------------------------------------------------------------------
// Torsion test families.

template <euclidean_ring R>
struct TorsionFamily {
  std::vector<typename R::Elem> sample;
  std::vector<FPModule<R>> modules;  // R/rR per sample entry
  FPModule<R> sum;
};

template <euclidean_ring R>
TorsionFamily<R> torsion_family(const R& ring, const std::vector<typename R::Elem>& sample) {
  if (sample.empty()) throw std::invalid_argument("torsion_family: empty sample");
  TorsionFamily<R> out;
  for (const auto& r : sample) {
    if (ring.is_zero(r) || ring.is_unit(r))
      throw std::invalid_argument("torsion_family: sample entries must be nonzero non-units");
    out.sample.push_back(ring.canonical(r).first);
    out.modules.push_back(cyclic_module(ring, out.sample.back()));
  }
  out.sum = direct_sum(ring, out.modules);
  return out;
}

// ---------------------------------------------------------------------------
// Prime support: the primes a finite torsion sample must cover for the
// criterion to be meaningful on a given system. Primes acting invertibly on
// every R/r^k contribute trivially stabilizing towers, so omitting a prime
// that actually divides the system's data can mask an obstruction.

template <euclidean_ring R>
std::vector<typename R::Elem> full_prime_support(const R& ring, const DirectSystem<R>& D) {
  using E = typename R::Elem;
  std::vector<E> primes;
  auto add_factors = [&](const E& v) {
    if (ring.is_zero(v) || ring.is_unit(v)) return;
    for (const auto& [p, e] : ring.factor(v)) {
      bool seen = false;
      for (const auto& q : primes)
        if (ring.eq(q, p)) seen = true;
      if (!seen) primes.push_back(p);
    }
  };
  auto add_matrix = [&](const Mat<R>& m) {
    for (const auto& v : m.a) add_factors(v);
  };
  for (const auto& m : D.maps) add_matrix(m);
  if (D.periodic()) {
    add_matrix(D.tail->map);
    add_matrix(D.tail->attach);
    // elementary divisors of the eventual image matrices
    Mat<R> pw = D.tail->map;
    for (std::size_t j = 0; j < std::max<std::size_t>(D.tail->rank, 1); ++j) {
      for (const auto& d : snf(ring, pw).factors) add_factors(d);
      pw = mat_mul(ring, pw, D.tail->map);
    }
  }
  std::sort(primes.begin(), primes.end(), [&](const E& a, const E& b) { return ring.less(a, b); });
  return primes;
}

// ---------------------------------------------------------------------------
// The Baer criterion as a uniform-stabilization analysis over escalating
// power families R/r^k. Each per-module tower is finite, hence exactly
// stationary; the question is whether one l(m) covers them all. A certified
// strictly increasing affine pattern of stabilization indices along a power
// family rules that out.

enum class BaerVerdictKind { consistent, negative, undecided };

inline const char* to_string(BaerVerdictKind v) {
  switch (v) {
    case BaerVerdictKind::consistent: return "BaerConsistent";
    case BaerVerdictKind::negative: return "BaerNegative";
    case BaerVerdictKind::undecided: return "Undecided";
  }
  return "?";
}

template <euclidean_ring R>
struct BaerVerdict {
  BaerVerdictKind kind = BaerVerdictKind::undecided;
  // uniformity table: per base element, the eventual stabilization index of
  // the hom tower against R/r^k for k = 1..escalation
  struct PowerFamily {
    typename R::Elem base;
    std::vector<std::size_t> indices;
    bool strictly_increasing = false;
    bool affine_certified = false;  // indices fit an exact affine recurrence
    std::size_t slope = 0;
  };
  std::vector<PowerFamily> families;
  std::optional<typename R::Elem> diverging_base;
  std::size_t uniform_bound = 0;  // max index over the whole sample, when consistent
  bool sample_dependent = false;  // set by callers comparing against full prime support
  std::vector<MLVerdict> per_module_verdicts;
};

template <euclidean_ring R>
BaerVerdict<R> baer_criterion(const R& ring, const DirectSystem<R>& D,
                              const std::vector<typename R::Elem>& base, std::size_t escalation) {
  if (escalation == 0) throw std::invalid_argument("baer_criterion: escalation must be >= 1");
  if (base.empty()) throw std::invalid_argument("baer_criterion: empty base sample");
  BaerVerdict<R> out;
  if (!D.periodic()) {
    out.kind = BaerVerdictKind::undecided;
    return out;
  }

  bool any_not_ml = false;
  for (const auto& r0 : base) {
    if (ring.is_zero(r0) || ring.is_unit(r0))
      throw std::invalid_argument("baer_criterion: base entries must be nonzero non-units");
    typename R::Elem r = ring.canonical(r0).first;
    typename BaerVerdict<R>::PowerFamily fam;
    fam.base = r;
    typename R::Elem rk = ring.one();
    for (std::size_t k = 1; k <= escalation; ++k) {
      rk = ring.mul(rk, r);
      auto rep = ml_check(ring, hom_tower(ring, D, cyclic_module(ring, rk)), 1);
      out.per_module_verdicts.push_back(rep.verdict);
      if (rep.verdict != MLVerdict::stationary) any_not_ml = true;
      fam.indices.push_back(rep.eventual_index);
    }
    fam.strictly_increasing = fam.indices.size() >= 2;
    for (std::size_t i = 0; i + 1 < fam.indices.size(); ++i)
      if (fam.indices[i + 1] <= fam.indices[i]) fam.strictly_increasing = false;
    if (fam.strictly_increasing) {
      std::size_t slope = fam.indices[1] - fam.indices[0];
      fam.affine_certified = slope >= 1;
      for (std::size_t i = 0; i + 1 < fam.indices.size(); ++i)
        if (fam.indices[i + 1] - fam.indices[i] != slope) fam.affine_certified = false;
      fam.slope = slope;
    }
    out.families.push_back(std::move(fam));
  }

  if (any_not_ml) {  // cannot happen for these finite modules, kept for safety
    out.kind = BaerVerdictKind::negative;
    return out;
  }
  for (const auto& fam : out.families) {
    if (fam.strictly_increasing && fam.affine_certified) {
      out.kind = BaerVerdictKind::negative;
      out.diverging_base = fam.base;
      return out;
    }
  }
  bool bounded = true;
  std::size_t uniform = 0;
  for (const auto& fam : out.families) {
    uniform = std::max(uniform, *std::max_element(fam.indices.begin(), fam.indices.end()));
    // bounded within the window: the last escalation step did not move
    if (fam.indices.size() >= 2 && fam.indices.back() != fam.indices[fam.indices.size() - 2])
      bounded = false;
  }
  if (bounded) {
    out.kind = BaerVerdictKind::consistent;
    out.uniform_bound = uniform;
  } else {
    out.kind = BaerVerdictKind::undecided;  // growth without a certified recurrence
  }
  return out;
}

// ---------------------------------------------------------------------------
// Finite-scale purity bridge: separation of probes by finite torsion
// quotients, with monotone kernel shrinkage along the sample.

template <euclidean_ring R>
struct PurityBridgeReport {
  struct ProbeReport {
    bool separated = false;
    std::vector<std::size_t> kernel_gen_counts;  // per growing sample prefix
    bool monotone = true;                        // kernels non-increasing along the sample
    std::string final_kernel;                    // normal form of the final sampled kernel
  };
  std::vector<ProbeReport> probes;
};

template <euclidean_ring R>
PurityBridgeReport<R> purity_bridge(const R& ring, const std::vector<typename R::Elem>& sample,
                                    const std::vector<FPModule<R>>& probes) {
  if (sample.empty()) throw std::invalid_argument("purity_bridge: empty sample");
  PurityBridgeReport<R> out;
  for (const auto& G : probes) {
    typename PurityBridgeReport<R>::ProbeReport pr;
    if (G.gens == 0) {
      pr.separated = true;
      pr.final_kernel = "0";
      out.probes.push_back(std::move(pr));
      continue;
    }
    std::optional<Submodule<R>> prev;
    for (std::size_t len = 1; len <= sample.size(); ++len) {
      std::vector<typename R::Elem> prefix(sample.begin(), sample.begin() + static_cast<std::ptrdiff_t>(len));
      auto div = divisible_part(ring, G, prefix);
      pr.kernel_gen_counts.push_back(div.sampled.gens.cols);
      if (prev && !sub_contains(ring, *prev, div.sampled)) pr.monotone = false;
      prev = div.sampled;
    }
    auto mu = finite_mu_check(ring, sample, G);
    pr.separated = mu.injective;
    pr.final_kernel = normal_form_string(ring, submodule_as_module(ring, mu.kernel_sub).module);
    out.probes.push_back(std::move(pr));
  }
  return out;
}

// ---------------------------------------------------------------------------
// End-to-end consistency: projectivity via the dual tower against the Baer
// criterion over an escalated torsion sample. A decisive contradiction in
// either direction is a library bug and is flagged as such.

template <euclidean_ring R>
struct ConsistencyReport {
  ProjectivityVerdict projectivity = ProjectivityVerdict::undecided;
  BaerVerdictKind baer = BaerVerdictKind::undecided;
  MLReport<R> dual_ml;
  BaerVerdict<R> baer_detail;
  bool contradiction = false;
  bool sample_dependent = false;  // NotProjective + BaerConsistent on a base missing support primes
  std::string note;
};

template <euclidean_ring R>
ConsistencyReport<R> theorem34_consistency(const R& ring, const DirectSystem<R>& D,
                                           const std::vector<typename R::Elem>& base,
                                           std::size_t escalation) {
  ConsistencyReport<R> out;
  auto proj = projectivity_test(ring, D);
  out.projectivity = proj.verdict;
  out.dual_ml = proj.dual_ml;
  out.baer_detail = baer_criterion(ring, D, base, escalation);
  out.baer = out.baer_detail.kind;

  if (out.projectivity == ProjectivityVerdict::projective && out.baer == BaerVerdictKind::negative) {
    out.contradiction = true;
    out.note = "projective system with a certified diverging torsion family: library bug";
    return out;
  }
  if (out.projectivity == ProjectivityVerdict::not_projective &&
      out.baer == BaerVerdictKind::consistent) {
    auto support = full_prime_support(ring, D);
    bool covered = true;
    for (const auto& p : support) {
      bool found = false;
      for (const auto& b : base)
        if (ring.divides(p, b)) found = true;
      if (!found) covered = false;
    }
    if (covered) {
      out.contradiction = true;
      out.note = "non-projective system consistent over its full prime support: library bug";
    } else {
      out.sample_dependent = true;
      out.baer_detail.sample_dependent = true;
      out.note = "base sample misses primes from the system's support; verdict is sample-relative";
    }
  }
  return out;
}

}  // namespace mlt
