#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mltower/baer.hpp"
#include "mltower/direct_system.hpp"
#include "mltower/fp_module.hpp"
#include "mltower/hom.hpp"
#include "mltower/matrix.hpp"
#include "mltower/purity.hpp"
#include "mltower/ring.hpp"
#include "mltower/tower.hpp"

namespace mlt {

using json = nlohmann::json;

/// All ring elements cross the wire as strings: decimal integers for the
/// integer instance, printed polynomials for the polynomial instance. No
/// floating point, no 64-bit truncation.

class parse_error : public std::runtime_error {
 public:
  explicit parse_error(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline const json& require_field(const json& j, const char* key, const char* ctx) {
  auto it = j.find(key);
  if (it == j.end()) throw parse_error(std::string(ctx) + ": missing field '" + key + "'");
  return *it;
}

inline std::size_t require_count(const json& j, const char* key, const char* ctx) {
  const json& v = require_field(j, key, ctx);
  if (!v.is_number_unsigned()) throw parse_error(std::string(ctx) + ": field '" + key + "' must be a count");
  return v.get<std::size_t>();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Matrices and modules.

template <euclidean_ring R>
json mat_to_json(const R& ring, const Mat<R>& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows; ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols; ++j) row.push_back(ring.to_string(m.at(i, j)));
    rows.push_back(std::move(row));
  }
  return json{{"rows", m.rows}, {"cols", m.cols}, {"entries", std::move(rows)}};
}

template <euclidean_ring R>
Mat<R> mat_from_json(const R& ring, const json& j) {
  std::size_t rows = detail::require_count(j, "rows", "matrix");
  std::size_t cols = detail::require_count(j, "cols", "matrix");
  const json& entries = detail::require_field(j, "entries", "matrix");
  if (!entries.is_array() || entries.size() != rows) throw parse_error("matrix: entry rows mismatch");
  Mat<R> m(rows, cols, ring.zero());
  for (std::size_t i = 0; i < rows; ++i) {
    const json& row = entries[i];
    if (!row.is_array() || row.size() != cols) throw parse_error("matrix: entry columns mismatch");
    for (std::size_t jj = 0; jj < cols; ++jj) {
      if (!row[jj].is_string()) throw parse_error("matrix: entries must be strings");
      m.at(i, jj) = ring.from_string(row[jj].get<std::string>());
    }
  }
  return m;
}

template <euclidean_ring R>
json module_to_json(const R& ring, const FPModule<R>& m) {
  return json{{"generators", m.gens}, {"relations", mat_to_json(ring, m.relations)}};
}

template <euclidean_ring R>
FPModule<R> module_from_json(const R& ring, const json& j) {
  std::size_t gens = detail::require_count(j, "generators", "module");
  Mat<R> rel = mat_from_json<R>(ring, detail::require_field(j, "relations", "module"));
  if (rel.rows != gens) throw parse_error("module: relation matrix must have one row per generator");
  return make_module(ring, gens, std::move(rel));
}

template <euclidean_ring R>
json normal_form_to_json(const R& ring, const FPModule<R>& m) {
  json inv = json::array();
  for (const auto& d : m.invariants) inv.push_back(ring.to_string(d));
  return json{{"display", normal_form_string(ring, m)},
              {"free_rank", m.free_rank},
              {"invariants", std::move(inv)}};
}

template <euclidean_ring R>
json elems_to_json(const R& ring, const std::vector<typename R::Elem>& v) {
  json out = json::array();
  for (const auto& x : v) out.push_back(ring.to_string(x));
  return out;
}

// ---------------------------------------------------------------------------
// Towers.

template <euclidean_ring R>
json tower_to_json(const R& ring, const Tower<R>& t) {
  json prefix = json::array();
  for (const auto& h : t.prefix) prefix.push_back(module_to_json(ring, h));
  json maps = json::array();
  for (const auto& m : t.maps) maps.push_back(mat_to_json(ring, m.matrix));
  json tail;
  if (t.tail) {
    tail = json{{"kind", "periodic"},
                {"module", module_to_json(ring, t.tail->module)},
                {"map", mat_to_json(ring, t.tail->map.matrix)},
                {"attach", mat_to_json(ring, t.tail->attach.matrix)}};
  } else {
    tail = json{{"kind", "truncated"}};
  }
  return json{{"prefix", std::move(prefix)}, {"maps", std::move(maps)}, {"tail", std::move(tail)}};
}

template <euclidean_ring R>
Tower<R> tower_from_json(const R& ring, const json& j) {
  const json& jprefix = detail::require_field(j, "prefix", "tower");
  if (!jprefix.is_array() || jprefix.empty()) throw parse_error("tower: prefix must be a nonempty array");
  std::vector<FPModule<R>> prefix;
  for (const auto& jm : jprefix) prefix.push_back(module_from_json<R>(ring, jm));
  const json& jmaps = detail::require_field(j, "maps", "tower");
  if (!jmaps.is_array() || jmaps.size() + 1 != prefix.size())
    throw parse_error("tower: need one map per adjacent pair of prefix levels");
  std::vector<ModuleMap<R>> maps;
  for (std::size_t i = 0; i < jmaps.size(); ++i)
    maps.push_back(make_map(ring, prefix[i + 1], prefix[i], mat_from_json<R>(ring, jmaps[i])));
  const json& jtail = detail::require_field(j, "tail", "tower");
  std::string kind = detail::require_field(jtail, "kind", "tower tail").get<std::string>();
  std::optional<PeriodicTail<R>> tail;
  if (kind == "periodic") {
    FPModule<R> H = module_from_json<R>(ring, detail::require_field(jtail, "module", "tower tail"));
    ModuleMap<R> lam = make_map(ring, H, H, mat_from_json<R>(ring, detail::require_field(jtail, "map", "tower tail")));
    ModuleMap<R> attach =
        make_map(ring, H, prefix.back(), mat_from_json<R>(ring, detail::require_field(jtail, "attach", "tower tail")));
    tail = PeriodicTail<R>{std::move(H), std::move(lam), std::move(attach)};
  } else if (kind != "truncated") {
    throw parse_error("tower: unknown tail kind '" + kind + "'");
  }
  return make_tower(ring, std::move(prefix), std::move(maps), std::move(tail));
}

// ---------------------------------------------------------------------------
// Direct systems and presentations.

template <euclidean_ring R>
json system_to_json(const R& ring, const DirectSystem<R>& d) {
  json maps = json::array();
  for (const auto& m : d.maps) maps.push_back(mat_to_json(ring, m));
  json tail;
  if (d.tail) {
    tail = json{{"kind", "periodic"},
                {"rank", d.tail->rank},
                {"map", mat_to_json(ring, d.tail->map)},
                {"attach", mat_to_json(ring, d.tail->attach)}};
  } else {
    tail = json{{"kind", "truncated"}};
  }
  return json{{"ranks", d.ranks}, {"maps", std::move(maps)}, {"tail", std::move(tail)}};
}

template <euclidean_ring R>
DirectSystem<R> system_from_json(const R& ring, const json& j) {
  const json& jranks = detail::require_field(j, "ranks", "system");
  if (!jranks.is_array() || jranks.empty()) throw parse_error("system: ranks must be a nonempty array");
  std::vector<std::size_t> ranks;
  for (const auto& r : jranks) {
    if (!r.is_number_unsigned()) throw parse_error("system: ranks must be counts");
    ranks.push_back(r.get<std::size_t>());
  }
  const json& jmaps = detail::require_field(j, "maps", "system");
  if (!jmaps.is_array() || jmaps.size() + 1 != ranks.size())
    throw parse_error("system: need one map per adjacent pair of levels");
  std::vector<Mat<R>> maps;
  for (const auto& jm : jmaps) maps.push_back(mat_from_json<R>(ring, jm));
  const json& jtail = detail::require_field(j, "tail", "system");
  std::string kind = detail::require_field(jtail, "kind", "system tail").get<std::string>();
  std::optional<DSPeriodicTail<R>> tail;
  if (kind == "periodic") {
    DSPeriodicTail<R> t;
    t.rank = detail::require_count(jtail, "rank", "system tail");
    t.map = mat_from_json<R>(ring, detail::require_field(jtail, "map", "system tail"));
    t.attach = mat_from_json<R>(ring, detail::require_field(jtail, "attach", "system tail"));
    tail = std::move(t);
  } else if (kind != "truncated") {
    throw parse_error("system: unknown tail kind '" + kind + "'");
  }
  return make_direct_system(ring, std::move(ranks), std::move(maps), std::move(tail));
}

template <euclidean_ring R>
json presentation_to_json(const R& ring, const JensenPresentation<R>& p) {
  return json{{"free_generators", p.free_gens}, {"relations", mat_to_json(ring, p.relation_cols)}};
}

template <euclidean_ring R>
JensenPresentation<R> presentation_from_json(const R& ring, const json& j) {
  JensenPresentation<R> p;
  p.free_gens = detail::require_count(j, "free_generators", "presentation");
  p.relation_cols = mat_from_json<R>(ring, detail::require_field(j, "relations", "presentation"));
  if (p.relation_cols.rows != p.free_gens)
    throw parse_error("presentation: relation matrix must have one row per free generator");
  return p;
}

// ---------------------------------------------------------------------------
// Reports.

template <euclidean_ring R>
json ml_report_to_json(const R& ring, const MLReport<R>& rep) {
  json out{{"verdict", to_string(rep.verdict)}, {"depth", rep.depth}};
  if (rep.verdict == MLVerdict::stationary) {
    out["l"] = rep.l;
    out["eventual_index"] = rep.eventual_index;
  } else if (rep.verdict == MLVerdict::undecided_at_depth) {
    out["l_partial"] = rep.l;
  }
  if (rep.verdict == MLVerdict::not_ml) {
    out["witness_level"] = rep.witness_level;
    json w = json::array();
    for (const auto& step : rep.witness)
      w.push_back(json{{"entry", step.entry}, {"element", elems_to_json(ring, step.element)}});
    out["witness"] = std::move(w);
  }
  return out;
}

template <euclidean_ring R>
json lim_result_to_json(const R& ring, const LimResult<R>& r) {
  json out{{"ml", ml_report_to_json(ring, r.ml)},
           {"partial_depth", r.partial_depth},
           {"note", r.note},
           {"truncated_kernel", normal_form_to_json(ring, r.truncated_kernel)},
           {"truncated_cokernel", normal_form_to_json(ring, r.truncated_cokernel)}};
  out["lim"] = r.lim_exact ? normal_form_to_json(ring, r.lim) : json{{"status", "undecided"}};
  out["lim1"] = r.lim1_exact ? normal_form_to_json(ring, r.lim1) : json{{"status", "undecided"}};
  return out;
}

template <euclidean_ring R>
json projectivity_to_json(const R& ring, const ProjectivityResult<R>& r) {
  json out{{"verdict", to_string(r.verdict)}, {"dual_ml", ml_report_to_json(ring, r.dual_ml)}};
  if (r.splitting) {
    out["splitting_depth"] = r.splitting_depth;
    out["splitting"] = mat_to_json(ring, *r.splitting);
  }
  return out;
}

template <euclidean_ring R>
json ext1_colim_to_json(const R& ring, const Ext1ColimResult<R>& r) {
  return json{{"verdict", to_string(r.verdict)},
              {"hom_ml", ml_report_to_json(ring, r.hom_ml)},
              {"stabilization_index", r.stabilization_index},
              {"truncated_surjectivity", r.truncated_surjectivity},
              {"checked_depth", r.checked_depth}};
}

template <euclidean_ring R>
json baer_verdict_to_json(const R& ring, const BaerVerdict<R>& r) {
  json fams = json::array();
  for (const auto& f : r.families)
    fams.push_back(json{{"base", ring.to_string(f.base)},
                        {"indices", f.indices},
                        {"strictly_increasing", f.strictly_increasing},
                        {"affine_certified", f.affine_certified},
                        {"slope", f.slope}});
  json out{{"verdict", to_string(r.kind)},
           {"families", std::move(fams)},
           {"sample_dependent", r.sample_dependent}};
  if (r.kind == BaerVerdictKind::consistent) out["uniform_bound"] = r.uniform_bound;
  if (r.diverging_base) out["diverging_base"] = ring.to_string(*r.diverging_base);
  return out;
}

template <euclidean_ring R>
json consistency_to_json(const R& ring, const ConsistencyReport<R>& r) {
  return json{{"projectivity", to_string(r.projectivity)},
              {"baer", to_string(r.baer)},
              {"contradiction", r.contradiction},
              {"sample_dependent", r.sample_dependent},
              {"note", r.note},
              {"dual_ml", ml_report_to_json(ring, r.dual_ml)},
              {"baer_detail", baer_verdict_to_json(ring, r.baer_detail)}};
}

template <euclidean_ring R>
json jensen_result_to_json(const R& ring, const JensenResult<R>& r) {
  json out{{"stage_ranks", r.stage_ranks},
           {"supports", r.supports},
           {"tail_extrapolated", r.tail_extrapolated}};
  if (r.failure) {
    out["verdict"] = "NotFlatEvidence";
    out["failure"] = json{{"stage", r.failure->stage}, {"detail", r.failure->detail}};
  } else {
    out["verdict"] = "System";
    out["system"] = system_to_json(ring, *r.system);
  }
  return out;
}

template <euclidean_ring R>
json snf_to_json(const R& ring, const SNF<R>& s) {
  return json{{"factors", elems_to_json(ring, s.factors)},
              {"rank", s.rank},
              {"U", mat_to_json(ring, s.U)},
              {"D", mat_to_json(ring, s.D)},
              {"V", mat_to_json(ring, s.V)}};
}

}  // namespace mlt
