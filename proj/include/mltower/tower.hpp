#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mltower/fp_module.hpp"
#include "mltower/matrix.hpp"
#include "mltower/ring.hpp"
#include "mltower/snf.hpp"

namespace mlt {

// ---------------------------------------------------------------------------
// Towers ... -> H_3 -> H_2 -> H_1, stored as a finite prefix plus a tail
// policy. A truncated tail means "no information past the prefix"; a
// periodic tail denotes the genuinely infinite tower
//   ... -lam-> H -lam-> H -attach-> H_d -> ... -> H_1.

template <euclidean_ring R>
struct PeriodicTail {
  FPModule<R> module;   // H
  ModuleMap<R> map;     // lam : H -> H
  ModuleMap<R> attach;  // H -> H_d
};

template <euclidean_ring R>
struct Tower {
  std::vector<FPModule<R>> prefix;   // H_1 .. H_d
  std::vector<ModuleMap<R>> maps;    // maps[i] : H_{i+2} -> H_{i+1}
  std::optional<PeriodicTail<R>> tail;

  bool periodic() const { return tail.has_value(); }
  std::size_t prefix_len() const { return prefix.size(); }

  const FPModule<R>& level(std::size_t n) const {  // 1-based
    if (n == 0) throw std::invalid_argument("Tower::level: levels are 1-based");
    if (n <= prefix.size()) return prefix[n - 1];
    if (!tail) throw std::invalid_argument("Tower::level: level beyond truncated prefix");
    return tail->module;
  }

  const ModuleMap<R>& map_at(std::size_t n) const {  // lam_n : level(n+1) -> level(n)
    if (n == 0) throw std::invalid_argument("Tower::map_at: levels are 1-based");
    if (n + 1 <= prefix.size()) return maps[n - 1];
    if (!tail) throw std::invalid_argument("Tower::map_at: map beyond truncated prefix");
    if (n == prefix.size()) return tail->attach;
    return tail->map;
  }
};

template <euclidean_ring R>
Tower<R> make_tower(const R& ring, std::vector<FPModule<R>> prefix, std::vector<ModuleMap<R>> maps,
                    std::optional<PeriodicTail<R>> tail = std::nullopt) {
  if (prefix.empty()) throw std::invalid_argument("make_tower: empty prefix");
  if (maps.size() + 1 != prefix.size()) throw std::invalid_argument("make_tower: need d-1 maps for d levels");
  for (std::size_t i = 0; i < maps.size(); ++i) {
    if (!same_presentation(ring, maps[i].target, prefix[i]) ||
        !same_presentation(ring, maps[i].source, prefix[i + 1]))
      throw std::invalid_argument("make_tower: map " + std::to_string(i + 1) + " does not chain");
  }
  if (tail) {
    if (!same_presentation(ring, tail->map.source, tail->module) ||
        !same_presentation(ring, tail->map.target, tail->module))
      throw std::invalid_argument("make_tower: periodic map must be an endomorphism of the tail module");
    if (!same_presentation(ring, tail->attach.source, tail->module) ||
        !same_presentation(ring, tail->attach.target, prefix.back()))
      throw std::invalid_argument("make_tower: attach map must go from the tail module to the last prefix level");
  }
  return Tower<R>{std::move(prefix), std::move(maps), std::move(tail)};
}

/// The constant-looking tower H <- H <- ... with one endomorphism.
template <euclidean_ring R>
Tower<R> endomorphism_tower(const R& ring, const FPModule<R>& H, const ModuleMap<R>& lam) {
  std::vector<FPModule<R>> prefix{H};
  std::vector<ModuleMap<R>> maps;
  return make_tower(ring, std::move(prefix), std::move(maps),
                    std::optional<PeriodicTail<R>>(PeriodicTail<R>{H, lam, lam}));
}

// ---------------------------------------------------------------------------
// Mittag-Leffler reports.

enum class MLVerdict { stationary, not_ml, undecided_at_depth };

inline const char* to_string(MLVerdict v) {
  switch (v) {
    case MLVerdict::stationary: return "Stationary";
    case MLVerdict::not_ml: return "NotML";
    case MLVerdict::undecided_at_depth: return "UndecidedAtDepth";
  }
  return "?";
}

template <euclidean_ring R>
struct MLReport {
  MLVerdict verdict = MLVerdict::undecided_at_depth;
  std::size_t depth = 0;  // levels reported / explored

  // Stationary data: l[m-1] is the stabilization index for level m,
  // l(m) > m, images from level l(m) on all coincide. 0 marks "unknown"
  // in partial (truncated) reports. eventual_index is the stabilization
  // index of the periodic regime chain im(lam^j).
  std::vector<std::size_t> l;
  std::size_t eventual_index = 0;

  // NotML data: a strictly descending subchain of the image chain at
  // witness_level, with one element certificate per step.
  struct WitnessStep {
    std::size_t entry;  // chain entry j: the image of level (witness_level + entry)
    std::vector<typename R::Elem> element;
  };
  std::size_t witness_level = 0;
  std::vector<WitnessStep> witness;
};

// ---------------------------------------------------------------------------
// Diagonal maps and finite sums/products of towers.

template <euclidean_ring R>
ModuleMap<R> diagonal_map(const R& ring, const std::vector<ModuleMap<R>>& family) {
  if (family.empty()) throw std::invalid_argument("diagonal_map: empty family");
  std::vector<FPModule<R>> srcs, tgts;
  for (const auto& f : family) {
    srcs.push_back(f.source);
    tgts.push_back(f.target);
  }
  FPModule<R> S = direct_sum(ring, srcs), T = direct_sum(ring, tgts);
  Mat<R> m = Mat<R>::zero(ring, T.gens, S.gens);
  std::size_t ro = 0, co = 0;
  for (const auto& f : family) {
    for (std::size_t i = 0; i < f.matrix.rows; ++i)
      for (std::size_t j = 0; j < f.matrix.cols; ++j) m.at(ro + i, co + j) = f.matrix.at(i, j);
    ro += f.matrix.rows;
    co += f.matrix.cols;
  }
  return make_map(ring, S, T, m);
}

namespace detail {

template <euclidean_ring R>
Tower<R> tower_combine(const R& ring, const std::vector<Tower<R>>& family) {
  if (family.empty()) throw std::invalid_argument("tower_combine: empty family");
  const std::size_t d = family[0].prefix_len();
  const bool per = family[0].periodic();
  for (const auto& t : family)
    if (t.prefix_len() != d || t.periodic() != per)
      throw std::invalid_argument("tower_combine: incompatible tails or prefix lengths");
  std::vector<FPModule<R>> prefix;
  for (std::size_t n = 0; n < d; ++n) {
    std::vector<FPModule<R>> lev;
    for (const auto& t : family) lev.push_back(t.prefix[n]);
    prefix.push_back(direct_sum(ring, lev));
  }
  std::vector<ModuleMap<R>> maps;
  for (std::size_t n = 0; n + 1 < d; ++n) {
    std::vector<ModuleMap<R>> fam;
    for (const auto& t : family) fam.push_back(t.maps[n]);
    maps.push_back(diagonal_map(ring, fam));
  }
  std::optional<PeriodicTail<R>> tail;
  if (per) {
    std::vector<FPModule<R>> hs;
    std::vector<ModuleMap<R>> lams, attaches;
    for (const auto& t : family) {
      hs.push_back(t.tail->module);
      lams.push_back(t.tail->map);
      attaches.push_back(t.tail->attach);
    }
    tail = PeriodicTail<R>{direct_sum(ring, hs), diagonal_map(ring, lams), diagonal_map(ring, attaches)};
  }
  return make_tower(ring, std::move(prefix), std::move(maps), std::move(tail));
}

}  // namespace detail

/// For finite families the sum and the product coincide; both constructors
/// exist because statements about towers quantify over both.
template <euclidean_ring R>
Tower<R> tower_sum(const R& ring, const std::vector<Tower<R>>& family) {
  return detail::tower_combine(ring, family);
}

template <euclidean_ring R>
Tower<R> tower_product(const R& ring, const std::vector<Tower<R>>& family) {
  return detail::tower_combine(ring, family);
}

// ---------------------------------------------------------------------------
// Image chains.

template <euclidean_ring R>
struct ImageChain {
  std::vector<Submodule<R>> entries;  // entry j-1 = image of level m+j in level m
  std::size_t decided = 0;            // entries computed; < requested depth iff truncated
};

template <euclidean_ring R>
ImageChain<R> image_chain(const R& ring, const Tower<R>& T, std::size_t m, std::size_t depth) {
  if (m == 0) throw std::invalid_argument("image_chain: levels are 1-based");
  if (!T.periodic() && m > T.prefix_len())
    throw std::invalid_argument("image_chain: level beyond truncated prefix");
  ImageChain<R> out;
  const FPModule<R>& Hm = T.level(m);
  Mat<R> comp = Mat<R>::identity(ring, Hm.gens);
  for (std::size_t j = 1; j <= depth; ++j) {
    if (!T.periodic() && m + j > T.prefix_len()) break;
    comp = mat_mul(ring, comp, T.map_at(m + j - 1).matrix);
    out.entries.push_back(Submodule<R>{Hm, comp});
    out.decided = j;
  }
  return out;
}

// ---------------------------------------------------------------------------
// The exact stabilization analysis for an endomorphism chain
// H >= im(lam) >= im(lam^2) >= ... of a finitely presented module.

namespace detail {

template <euclidean_ring R>
struct RegimeAnalysis {
  bool stationary = false;
  std::size_t s = 0;           // minimal j with im(lam^{j+1}) = im(lam^j)
  std::size_t descent_from = 0;  // NotML: strict descent certified for all j >= this
};

/// Decides whether the image chain of an endomorphism stabilizes.
/// Rank stabilization happens within free_rank steps; once the chain is
/// rank-stable, stabilization in the torsion-free quotient is equivalent to
/// the next image being all of the current one, and the leftover torsion
/// discrepancy has bounded length, so a budgeted scan is a decision
/// procedure rather than a heuristic.
template <euclidean_ring R>
RegimeAnalysis<R> analyze_image_chain(const R& ring, const FPModule<R>& H, const ModuleMap<R>& lam) {
  RegimeAnalysis<R> out;
  std::size_t scan_budget = torsion_length_bound(ring, H) + 4;

  if (H.free_rank > 0) {
    FreeQuotient<R> fq = free_quotient(ring, H);
    Mat<R> lam_bar = mat_mul(ring, fq.proj, mat_mul(ring, lam.matrix, fq.section));
    // rank stabilization index of the quotient chain
    Mat<R> pw = lam_bar;
    std::size_t j0 = 1;
    std::size_t r_prev = mat_rank(ring, pw);
    for (;; ++j0) {
      Mat<R> nxt = mat_mul(ring, pw, lam_bar);
      std::size_t r_next = mat_rank(ring, nxt);
      if (r_next == r_prev) break;
      pw = std::move(nxt);
      r_prev = r_next;
      if (j0 > fq.rank + 1) throw std::logic_error("analyze_image_chain: rank failed to stabilize");
    }
    // quotient chain is stationary iff the rank-stable image maps onto itself
    Mat<R> pw_next = mat_mul(ring, pw, lam_bar);
    LinearSolver<R> next_solver(ring, pw_next);
    if (!next_solver.solve_mat(pw)) {
      out.stationary = false;
      out.descent_from = j0;
      return out;
    }
    scan_budget += j0;
  }

  Mat<R> pw = Mat<R>::identity(ring, H.gens);
  for (std::size_t j = 0; j <= scan_budget; ++j) {
    Mat<R> nxt = mat_mul(ring, pw, lam.matrix);
    if (sub_eq(ring, Submodule<R>{H, pw}, Submodule<R>{H, nxt})) {
      out.stationary = true;
      out.s = j;
      return out;
    }
    pw = std::move(nxt);
  }
  throw std::logic_error("analyze_image_chain: scan budget exhausted");
}

/// Composite matrix carrying the tail module (level d+1) down to level m.
template <euclidean_ring R>
Mat<R> composite_to_tail(const R& ring, const Tower<R>& T, std::size_t m) {
  Mat<R> comp = Mat<R>::identity(ring, T.level(m).gens);
  for (std::size_t n = m; n <= T.prefix_len(); ++n) comp = mat_mul(ring, comp, T.map_at(n).matrix);
  return comp;
}

}  // namespace detail

/// Decide the Mittag-Leffler condition. Periodic tails are decided exactly:
/// re-running with a larger depth never changes the verdict, only how much
/// of the l table and witness chain is materialized. Truncated tails are
/// certified Stationary only when every level's chain provably dies (reaches
/// the zero submodule inside the window, which no extension can undo);
/// nothing else about an unknown tail is decidable, so everything else
/// reports UndecidedAtDepth.
template <euclidean_ring R>
MLReport<R> ml_check(const R& ring, const Tower<R>& T, std::size_t depth) {
  if (depth == 0) throw std::invalid_argument("ml_check: depth must be >= 1");
  MLReport<R> rep;
  rep.depth = depth;
  const std::size_t d = T.prefix_len();

  if (T.periodic()) {
    const auto& tail = *T.tail;
    auto reg = detail::analyze_image_chain(ring, tail.module, tail.map);
    if (!reg.stationary) {
      rep.verdict = MLVerdict::not_ml;
      rep.witness_level = d + 1;
      // strictly descending subchain with one escape certificate per step
      FreeQuotient<R> fq = free_quotient(ring, tail.module);
      Mat<R> lam_bar = mat_mul(ring, fq.proj, mat_mul(ring, tail.map.matrix, fq.section));
      Mat<R> pw = mat_pow(ring, tail.map.matrix, reg.descent_from);
      Mat<R> pw_bar = mat_pow(ring, lam_bar, reg.descent_from);
      for (std::size_t step = 0; step < depth; ++step) {
        std::size_t j = reg.descent_from + step;
        Mat<R> pw_bar_next = mat_mul(ring, pw_bar, lam_bar);
        LinearSolver<R> bar_solver(ring, pw_bar_next);
        Mat<R> proj_pw = mat_mul(ring, fq.proj, pw);
        std::optional<std::vector<typename R::Elem>> found;
        for (std::size_t c = 0; c < proj_pw.cols && !found; ++c)
          if (!bar_solver.solvable(mat_col(proj_pw, c))) found = mat_col(pw, c);
        if (!found) throw std::logic_error("ml_check: descent step lost its certificate");
        Mat<R> pw_next = mat_mul(ring, pw, tail.map.matrix);
        LinearSolver<R> in_next(ring, mat_hstack(ring, pw_next, tail.module.relations));
        if (in_next.solvable(*found))
          throw std::logic_error("ml_check: certificate element lies in the next image");
        rep.witness.push_back({j, std::move(*found)});
        pw = std::move(pw_next);
        pw_bar = std::move(pw_bar_next);
      }
      return rep;
    }

    rep.verdict = MLVerdict::stationary;
    rep.eventual_index = reg.s;
    Mat<R> stable_tail_gens = mat_pow(ring, tail.map.matrix, reg.s);
    rep.l.assign(depth, 0);
    for (std::size_t m = 1; m <= depth; ++m) {
      if (m > d) {
        rep.l[m - 1] = m + std::max<std::size_t>(reg.s, 1);
        continue;
      }
      Mat<R> to_m = detail::composite_to_tail(ring, T, m);
      Submodule<R> eventual{T.level(m), mat_mul(ring, to_m, stable_tail_gens)};
      Mat<R> comp = Mat<R>::identity(ring, T.level(m).gens);
      std::size_t limit = (d - m + 1) + reg.s + 1;
      std::size_t jmin = 0;
      for (std::size_t j = 1; j <= limit; ++j) {
        comp = mat_mul(ring, comp, T.map_at(m + j - 1).matrix);
        if (sub_eq(ring, Submodule<R>{T.level(m), comp}, eventual)) {
          jmin = j;
          break;
        }
      }
      if (jmin == 0) throw std::logic_error("ml_check: prefix chain missed its eventual image");
      rep.l[m - 1] = m + jmin;
    }
    return rep;
  }

  // Truncated tail.
  rep.l.assign(d, 0);
  bool all_certified = true;
  for (std::size_t m = 1; m <= d; ++m) {
    if (T.level(m).is_zero()) {
      rep.l[m - 1] = m + 1;
      continue;
    }
    auto chain = image_chain(ring, T, m, d >= m ? d - m : 0);
    bool certified = false;
    for (std::size_t j = 1; j <= chain.decided; ++j) {
      if (sub_is_zero(ring, chain.entries[j - 1])) {
        rep.l[m - 1] = m + j;
        certified = true;
        break;
      }
    }
    if (!certified) all_certified = false;
  }
  rep.verdict = all_certified ? MLVerdict::stationary : MLVerdict::undecided_at_depth;
  rep.depth = d;
  return rep;
}

/// Whether the tower satisfies the Mittag-Leffler condition with respect to
/// one concrete candidate sequence l (checked for levels 1..depth). For a
/// periodic tower this is exact; for a truncated tower it is relative to the
/// visible window.
template <euclidean_ring R>
bool ml_valid_for(const R& ring, const Tower<R>& T, const std::vector<std::size_t>& l,
                  std::size_t depth) {
  for (std::size_t m = 1; m <= depth && m - 1 < l.size(); ++m)
    if (l[m - 1] <= m) return false;
  if (T.periodic()) {
    auto rep = ml_check(ring, T, depth);
    if (rep.verdict != MLVerdict::stationary) return false;
    for (std::size_t m = 1; m <= depth; ++m) {
      if (m - 1 >= l.size()) return false;
      if (l[m - 1] < rep.l[m - 1]) return false;
    }
    return true;
  }
  const std::size_t d = T.prefix_len();
  for (std::size_t m = 1; m <= std::min(depth, d); ++m) {
    if (m - 1 >= l.size()) return false;
    std::size_t from = l[m - 1] - m;
    auto chain = image_chain(ring, T, m, d - m);
    if (from > chain.decided) return false;  // candidate points past the window
    for (std::size_t j = from; j < chain.decided; ++j)
      if (!sub_eq(ring, chain.entries[from - 1], chain.entries[j])) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// The equivalence: product ML w.r.t. l <=> each factor ML w.r.t. l <=> sum
// ML w.r.t. l, checked through the actual constructors.

template <euclidean_ring R>
struct Prop12Report {
  std::vector<bool> factor_ok;
  bool sum_ok = false;
  bool product_ok = false;
  bool equivalent = false;  // the three verdicts agree
  bool uniform_exists = false;
  std::vector<std::size_t> minimal_uniform_l;  // for levels 1..depth, when it exists
};

template <euclidean_ring R>
Prop12Report<R> prop12_check(const R& ring, const std::vector<Tower<R>>& family,
                             const std::vector<std::size_t>& l, std::size_t depth) {
  if (family.empty()) throw std::invalid_argument("prop12_check: empty family");
  Prop12Report<R> out;
  bool all = true;
  for (const auto& t : family) {
    bool ok = ml_valid_for(ring, t, l, depth);
    out.factor_ok.push_back(ok);
    all = all && ok;
  }
  Tower<R> sum = tower_sum(ring, family);
  Tower<R> prod = tower_product(ring, family);
  out.sum_ok = ml_valid_for(ring, sum, l, depth);
  out.product_ok = ml_valid_for(ring, prod, l, depth);
  out.equivalent = (out.sum_ok == all) && (out.product_ok == all);

  if (family[0].periodic()) {
    bool stationary_all = true;
    std::vector<std::size_t> lmin(depth, 0);
    for (const auto& t : family) {
      auto rep = ml_check(ring, t, depth);
      if (rep.verdict != MLVerdict::stationary) {
        stationary_all = false;
        break;
      }
      for (std::size_t m = 1; m <= depth; ++m) lmin[m - 1] = std::max(lmin[m - 1], rep.l[m - 1]);
    }
    out.uniform_exists = stationary_all;
    if (stationary_all) out.minimal_uniform_l = std::move(lmin);
  }
  return out;
}

// ---------------------------------------------------------------------------
// The shift-difference map on a finite truncation.

template <euclidean_ring R>
struct DeltaData {
  std::size_t depth = 0;
  Mat<R> matrix;      // block bidiagonal: identity blocks, -lam_n above
  ModuleMap<R> map;   // on the direct sum of levels 1..depth
};

template <euclidean_ring R>
DeltaData<R> delta_matrix(const R& ring, const Tower<R>& T, std::size_t depth) {
  if (depth == 0) throw std::invalid_argument("delta_matrix: depth must be >= 1");
  if (!T.periodic() && depth > T.prefix_len())
    throw std::invalid_argument("delta_matrix: depth beyond truncated prefix");
  std::vector<FPModule<R>> levels;
  std::vector<std::size_t> offset(depth + 1, 0);
  for (std::size_t n = 1; n <= depth; ++n) {
    levels.push_back(T.level(n));
    offset[n] = offset[n - 1] + T.level(n).gens;
  }
  FPModule<R> big = direct_sum(ring, levels);
  Mat<R> m = Mat<R>::zero(ring, big.gens, big.gens);
  for (std::size_t n = 1; n <= depth; ++n) {
    for (std::size_t i = 0; i < T.level(n).gens; ++i) m.at(offset[n - 1] + i, offset[n - 1] + i) = ring.one();
    if (n < depth) {
      const Mat<R>& lam = T.map_at(n).matrix;
      for (std::size_t i = 0; i < lam.rows; ++i)
        for (std::size_t j = 0; j < lam.cols; ++j) m.at(offset[n - 1] + i, offset[n] + j) = ring.neg(lam.at(i, j));
    }
  }
  ModuleMap<R> map = make_map(ring, big, big, m);
  return DeltaData<R>{depth, std::move(m), std::move(map)};
}

/// The honest finite-diagram version of the shift-difference map, from
/// levels 1..depth to levels 1..depth-1; its kernel is the module of threads
/// of the truncated system.
template <euclidean_ring R>
ModuleMap<R> delta_threads_map(const R& ring, const Tower<R>& T, std::size_t depth) {
  if (depth < 2) throw std::invalid_argument("delta_threads_map: depth must be >= 2");
  std::vector<FPModule<R>> src_levels, tgt_levels;
  for (std::size_t n = 1; n <= depth; ++n) src_levels.push_back(T.level(n));
  for (std::size_t n = 1; n + 1 <= depth; ++n) tgt_levels.push_back(T.level(n));
  FPModule<R> S = direct_sum(ring, src_levels), Tg = direct_sum(ring, tgt_levels);
  Mat<R> m = Mat<R>::zero(ring, Tg.gens, S.gens);
  std::size_t ro = 0, co = 0;
  for (std::size_t n = 1; n + 1 <= depth; ++n) {
    const auto& Hn = T.level(n);
    for (std::size_t i = 0; i < Hn.gens; ++i) m.at(ro + i, co + i) = ring.one();
    const Mat<R>& lam = T.map_at(n).matrix;
    for (std::size_t i = 0; i < lam.rows; ++i)
      for (std::size_t j = 0; j < lam.cols; ++j) m.at(ro + i, co + Hn.gens + j) = ring.neg(lam.at(i, j));
    ro += Hn.gens;
    co += Hn.gens;
  }
  return make_map(ring, S, Tg, m);
}

// ---------------------------------------------------------------------------
// lim and lim^1 on the decidable fragment.

template <euclidean_ring R>
struct LimResult {
  bool lim_exact = false;
  FPModule<R> lim;
  bool lim1_exact = false;
  FPModule<R> lim1;

  MLReport<R> ml;
  FPModule<R> truncated_kernel;    // threads of the depth-d truncation
  FPModule<R> truncated_cokernel;  // cokernel of the square truncation
  std::size_t partial_depth = 0;
  std::string note;
};

namespace detail {

/// Largest submodule W of H with lam(W) = W, for a torsion-free H, when it
/// is certifiable: the saturated stable image is computed exactly; on it the
/// restriction is injective, and the cases with a unit determinant, rank one,
/// or a diagonal restriction are decided. Returns nullopt when no exact
/// answer is certified.
template <euclidean_ring R>
std::optional<Mat<R>> stable_core_torsion_free(const R& ring, const FPModule<R>& H,
                                               const ModuleMap<R>& lam) {
  FreeQuotient<R> fq = free_quotient(ring, H);
  Mat<R> lam_bar = mat_mul(ring, fq.proj, mat_mul(ring, lam.matrix, fq.section));
  // saturated image chain stabilizes within rank steps
  Mat<R> pw = lam_bar;
  Mat<R> sat = saturation_basis(ring, lam_bar);
  for (std::size_t j = 0; j <= fq.rank + 1; ++j) {
    Mat<R> nxt_pw = mat_mul(ring, pw, lam_bar);
    Mat<R> nxt_sat = saturation_basis(ring, nxt_pw);
    if (nxt_sat.cols == sat.cols) break;
    pw = std::move(nxt_pw);
    sat = std::move(nxt_sat);
  }
  if (sat.cols == 0) return Mat<R>::zero(ring, H.gens, 0);
  // restriction of lam_bar to the stable saturated subspace
  LinearSolver<R> sat_solver(ring, sat);
  auto mu = sat_solver.solve_mat(mat_mul(ring, lam_bar, sat));
  if (!mu) throw std::logic_error("stable_core_torsion_free: image left the stable subspace");
  auto delta = determinant(ring, *mu);
  if (ring.is_zero(delta)) throw std::logic_error("stable_core_torsion_free: singular restriction");

  Mat<R> core_cols;  // columns in the saturated-subspace coordinates
  if (ring.is_unit(delta)) {
    core_cols = Mat<R>::identity(ring, sat.cols);
  } else if (sat.cols == 1) {
    core_cols = Mat<R>::zero(ring, 1, 0);
  } else {
    bool diag = true;
    for (std::size_t i = 0; i < mu->rows && diag; ++i)
      for (std::size_t j = 0; j < mu->cols && diag; ++j)
        if (i != j && !ring.is_zero(mu->at(i, j))) diag = false;
    if (!diag) return std::nullopt;
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < mu->rows; ++i)
      if (ring.is_unit(mu->at(i, i))) keep.push_back(i);
    core_cols = Mat<R>::zero(ring, sat.cols, keep.size());
    for (std::size_t j = 0; j < keep.size(); ++j) core_cols.at(keep[j], j) = ring.one();
  }
  return mat_mul(ring, fq.section, mat_mul(ring, sat, core_cols));
}

}  // namespace detail

template <euclidean_ring R>
LimResult<R> lim_and_lim1(const R& ring, const Tower<R>& T, std::size_t partial_depth = 4) {
  partial_depth = std::max<std::size_t>(partial_depth, 2);
  if (!T.periodic()) partial_depth = std::min(partial_depth, T.prefix_len());
  LimResult<R> out;
  out.partial_depth = partial_depth;
  if (partial_depth >= 2) {
    out.truncated_kernel = kernel(ring, delta_threads_map(ring, T, partial_depth)).module;
    out.truncated_cokernel = cokernel(ring, delta_matrix(ring, T, partial_depth).map).module;
  }

  if (!T.periodic()) {
    out.ml = ml_check(ring, T, std::max<std::size_t>(T.prefix_len(), 1));
    out.note = "truncated tail: lim and lim1 are not determined by a finite window";
    return out;
  }

  const auto& tail = *T.tail;
  out.ml = ml_check(ring, T, std::max<std::size_t>(partial_depth, T.prefix_len() + 1));
  if (out.ml.verdict == MLVerdict::stationary) {
    // threads are determined by their value in the stable image of the tail
    Mat<R> stable = mat_pow(ring, tail.map.matrix, out.ml.eventual_index);
    out.lim = submodule_as_module(ring, Submodule<R>{tail.module, stable}).module;
    out.lim_exact = true;
    out.lim1 = zero_module(ring);
    out.lim1_exact = true;
    out.note = "stationary: lim is the stable image, lim1 vanishes";
    return out;
  }

  // Not Mittag-Leffler. lim1 cannot be certified from truncations (they are
  // solvable block-triangular systems at every finite depth); lim is still
  // exact whenever the stable core is certifiable.
  out.note = "not Mittag-Leffler: lim1 left undecided (finite truncations cannot certify it)";
  if (tail.module.invariants.empty()) {
    if (auto core = detail::stable_core_torsion_free(ring, tail.module, tail.map)) {
      Submodule<R> core_sub{tail.module, *core};
      Submodule<R> moved{tail.module, mat_mul(ring, tail.map.matrix, *core)};
      if (!sub_eq(ring, core_sub, moved))
        throw std::logic_error("lim_and_lim1: stable core is not lam-stable");
      out.lim = submodule_as_module(ring, core_sub).module;
      out.lim_exact = true;
      out.note += "; lim computed from the stable core";
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Evidence harness around the shift-difference matrix.

template <euclidean_ring R>
struct Theorem13Report {
  MLReport<R> ml;
  // Stationary branch: the truncated shift-difference of the `copies`-fold
  // sum hits a full generator battery.
  bool battery_ok = false;
  std::size_t targets_checked = 0;
  // NotML branch: canonical back-substituted solutions against the diagonal
  // witness matrix; entries at level 1 grow without bound.
  std::vector<std::vector<typename R::Elem>> profile;       // per-column level-1 entries
  std::vector<typename R::Elem> row_cumulative;             // cumulative first-coordinate sums
  bool profile_strictly_growing = false;
};

template <euclidean_ring R>
Theorem13Report<R> theorem13_harness(const R& ring, const Tower<R>& T, std::size_t copies,
                                     std::size_t depth) {
  if (copies == 0) throw std::invalid_argument("theorem13_harness: copies must be >= 1");
  Theorem13Report<R> out;
  out.ml = ml_check(ring, T, std::max<std::size_t>(depth, 1));

  if (out.ml.verdict == MLVerdict::stationary) {
    Tower<R> tc = tower_sum(ring, std::vector<Tower<R>>(copies, T));
    std::size_t dd = T.periodic() ? depth : std::min(depth, tc.prefix_len());
    dd = std::max<std::size_t>(dd, 1);
    auto delta = delta_matrix(ring, tc, dd);
    const FPModule<R>& big = delta.map.source;
    LinearSolver<R> solver(ring, mat_hstack(ring, delta.matrix, big.relations));
    bool ok = true;
    for (std::size_t j = 0; j < big.gens; ++j) {
      std::vector<typename R::Elem> e(big.gens, ring.zero());
      e[j] = ring.one();
      if (!solver.solvable(e)) ok = false;
      ++out.targets_checked;
    }
    out.battery_ok = ok;
    return out;
  }
  if (out.ml.verdict == MLVerdict::undecided_at_depth) return out;

  // Obstruction profile from the witness chain: the canonical solution of
  // Delta * A = B with B the diagonal witness matrix forces the level-1
  // entries of column n to be the full push-down of the witness element.
  Mat<R> to_level1 = detail::composite_to_tail(ring, T, 1);
  std::vector<typename R::Elem> cumulative;
  typename R::Elem acc = ring.zero();
  for (const auto& step : out.ml.witness) {
    auto entry = mat_apply(ring, to_level1, step.element);
    if (!entry.empty()) acc = ring.add(acc, entry[0]);
    cumulative.push_back(acc);
    out.profile.push_back(std::move(entry));
  }
  out.row_cumulative = std::move(cumulative);
  out.profile_strictly_growing = out.profile.size() >= 2;
  for (std::size_t i = 0; i + 1 < out.profile.size(); ++i) {
    // compare the largest entries by Euclidean size
    auto largest = [&](const std::vector<typename R::Elem>& v) {
      typename R::Elem best = ring.zero();
      for (const auto& x : v)
        if (ring.degree_less(best, x)) best = x;
      return best;
    };
    if (!ring.degree_less(largest(out.profile[i]), largest(out.profile[i + 1])))
      out.profile_strictly_growing = false;
  }
  return out;
}

}  // namespace mlt
