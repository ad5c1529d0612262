// Batch front end: JSON in, deterministic JSON report out.
//
// Exit status: 0 decisive/consistent, 1 decisive-negative, 2 undecided,
// 3 input error (parse failures, cap violations, malformed data).

#include "CLI11.hpp"

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mltower/mltower.hpp"

namespace {

using mlt::json;

struct Caps {
  std::size_t max_dim = 512;
  std::size_t max_depth = 1024;
  std::size_t max_hom_gens = mlt::default_hom_gen_cap;
};

std::size_t env_count(const char* name, std::size_t fallback) {
  const char* v = std::getenv(name);
  if (!v || !*v) return fallback;
  char* end = nullptr;
  unsigned long long parsed = std::strtoull(v, &end, 10);
  if (!end || *end != '\0' || parsed == 0)
    throw mlt::resource_error(std::string("environment variable ") + name + " must be a positive count");
  return static_cast<std::size_t>(parsed);
}

Caps read_caps() {
  Caps c;
  c.max_dim = env_count("MLT_MAX_DIM", c.max_dim);
  c.max_depth = env_count("MLT_MAX_DEPTH", c.max_depth);
  c.max_hom_gens = env_count("MLT_MAX_HOM_GENS", c.max_hom_gens);
  return c;
}

std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string("fnv1a64:") + buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw mlt::parse_error("cannot open input file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json(const std::string& text, const std::string& path) {
  try {
    return json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw mlt::parse_error(path + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " +
                           e.what());
  }
}

void enforce_dimension_caps(const json& j, std::size_t max_dim) {
  if (j.is_object()) {
    auto r = j.find("rows");
    auto c = j.find("cols");
    if (r != j.end() && c != j.end() && r->is_number_unsigned() && c->is_number_unsigned()) {
      if (r->get<std::size_t>() > max_dim || c->get<std::size_t>() > max_dim)
        throw mlt::resource_error("matrix dimension exceeds MLT_MAX_DIM = " + std::to_string(max_dim));
    }
    for (const auto& [k, v] : j.items()) enforce_dimension_caps(v, max_dim);
  } else if (j.is_array()) {
    for (const auto& v : j) enforce_dimension_caps(v, max_dim);
  }
}

struct Options {
  std::string input;
  std::size_t depth = 8;
  std::size_t copies = 2;
  std::size_t escalation = 4;
  std::string sample;
  std::string ring_override;
};

template <mlt::euclidean_ring R>
std::vector<typename R::Elem> parse_sample(const R& ring, const std::string& s) {
  std::vector<typename R::Elem> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, ',')) {
    if (cur.empty()) continue;
    out.push_back(ring.from_string(cur));
  }
  if (out.empty()) throw mlt::parse_error("empty --sample list");
  return out;
}

struct Outcome {
  json result;
  int status = 0;
  std::string summary;
};

template <mlt::euclidean_ring R>
Outcome run_verb(const R& ring, const std::string& verb, const json& input, const Options& opt,
                 const Caps& caps) {
  using namespace mlt;
  Outcome out;
  if (verb == "snf") {
    auto m = mat_from_json<R>(ring, mlt::detail::require_field(input, "matrix", "input"));
    auto s = snf(ring, m);
    out.result = snf_to_json(ring, s);
    out.summary = "snf: rank " + std::to_string(s.rank);
  } else if (verb == "module-normal-form") {
    auto m = module_from_json<R>(ring, mlt::detail::require_field(input, "module", "input"));
    out.result = normal_form_to_json(ring, m);
    out.summary = "normal form: " + normal_form_string(ring, m);
  } else if (verb == "hom") {
    auto M = module_from_json<R>(ring, mlt::detail::require_field(input, "source", "input"));
    auto N = module_from_json<R>(ring, mlt::detail::require_field(input, "target", "input"));
    auto h = hom_module(ring, M, N, caps.max_hom_gens);
    json gens = json::array();
    for (std::size_t jgen = 0; jgen < h.module.gens; ++jgen)
      gens.push_back(mat_to_json(ring, hom_decode_generator(ring, h, jgen).matrix));
    out.result = json{{"hom", normal_form_to_json(ring, h.module)}, {"generator_maps", std::move(gens)}};
    out.summary = "hom: " + normal_form_string(ring, h.module);
  } else if (verb == "ext") {
    auto M = module_from_json<R>(ring, mlt::detail::require_field(input, "source", "input"));
    auto N = module_from_json<R>(ring, mlt::detail::require_field(input, "target", "input"));
    auto e = ext1(ring, M, N, caps.max_hom_gens);
    out.result = json{{"ext1", normal_form_to_json(ring, e)}};
    out.summary = "ext1: " + normal_form_string(ring, e);
    out.status = e.is_zero() ? 0 : 0;
  } else if (verb == "tower-ml") {
    auto t = tower_from_json<R>(ring, mlt::detail::require_field(input, "tower", "input"));
    auto rep = ml_check(ring, t, opt.depth);
    out.result = ml_report_to_json(ring, rep);
    out.summary = std::string("tower-ml: ") + to_string(rep.verdict);
    out.status = rep.verdict == MLVerdict::stationary ? 0 : rep.verdict == MLVerdict::not_ml ? 1 : 2;
  } else if (verb == "tower-lim") {
    auto t = tower_from_json<R>(ring, mlt::detail::require_field(input, "tower", "input"));
    auto r = lim_and_lim1(ring, t, opt.depth);
    out.result = lim_result_to_json(ring, r);
    out.summary = std::string("tower-lim: ") + (r.lim_exact && r.lim1_exact ? "exact" : "partial");
    out.status = (r.lim_exact && r.lim1_exact) ? 0 : 2;
  } else if (verb == "dirsys-projective") {
    auto d = system_from_json<R>(ring, mlt::detail::require_field(input, "system", "input"));
    auto r = projectivity_test(ring, d, opt.depth);
    out.result = projectivity_to_json(ring, r);
    out.summary = std::string("dirsys-projective: ") + to_string(r.verdict);
    out.status = r.verdict == ProjectivityVerdict::projective   ? 0
                 : r.verdict == ProjectivityVerdict::not_projective ? 1
                                                                    : 2;
  } else if (verb == "dirsys-ext") {
    auto d = system_from_json<R>(ring, mlt::detail::require_field(input, "system", "input"));
    auto M = module_from_json<R>(ring, mlt::detail::require_field(input, "module", "input"));
    auto r = ext1_colim(ring, d, M, opt.copies, opt.depth);
    out.result = ext1_colim_to_json(ring, r);
    out.summary = std::string("dirsys-ext: ") + to_string(r.verdict);
    out.status = r.verdict == ExtVerdict::zero ? 0 : r.verdict == ExtVerdict::nonzero ? 1 : 2;
  } else if (verb == "jensen") {
    auto p = presentation_from_json<R>(ring, mlt::detail::require_field(input, "presentation", "input"));
    auto r = jensen_system(ring, p);
    out.result = jensen_result_to_json(ring, r);
    out.summary = std::string("jensen: ") + (r.failure ? "NotFlatEvidence" : "System");
    out.status = r.failure ? 1 : 0;
  } else if (verb == "baer") {
    auto d = system_from_json<R>(ring, mlt::detail::require_field(input, "system", "input"));
    auto base = parse_sample(ring, opt.sample.empty() ? "2" : opt.sample);
    auto r = baer_criterion(ring, d, base, opt.escalation);
    out.result = baer_verdict_to_json(ring, r);
    out.summary = std::string("baer: ") + to_string(r.kind);
    out.status = r.kind == BaerVerdictKind::consistent ? 0 : r.kind == BaerVerdictKind::negative ? 1 : 2;
  } else if (verb == "consistency") {
    auto d = system_from_json<R>(ring, mlt::detail::require_field(input, "system", "input"));
    auto base = parse_sample(ring, opt.sample.empty() ? "2" : opt.sample);
    auto r = theorem34_consistency(ring, d, base, opt.escalation);
    out.result = consistency_to_json(ring, r);
    out.summary = std::string("consistency: ") + to_string(r.projectivity) + " + " + to_string(r.baer) +
                  (r.contradiction ? " CONTRADICTION" : "");
    if (r.contradiction) {
      out.status = 1;
    } else if (r.projectivity == ProjectivityVerdict::undecided ||
               r.baer == BaerVerdictKind::undecided) {
      out.status = 2;
    } else {
      out.status = r.projectivity == ProjectivityVerdict::projective ? 0 : 1;
    }
  } else {
    throw mlt::parse_error("unknown verb: " + verb);
  }
  return out;
}

json ring_to_json(const mlt::IntegerRing&) { return json{{"tag", "Z"}}; }

int dispatch(const std::string& verb, const Options& opt) {
  const Caps caps = read_caps();
  if (opt.depth > caps.max_depth || opt.escalation > caps.max_depth)
    throw mlt::resource_error("depth/escalation exceeds MLT_MAX_DEPTH = " + std::to_string(caps.max_depth));
  std::string raw = read_file(opt.input);
  json input = parse_json(raw, opt.input);
  enforce_dimension_caps(input, caps.max_dim);

  const json& jring = mlt::detail::require_field(input, "ring", "input");
  std::string tag = mlt::detail::require_field(jring, "tag", "ring").get<std::string>();
  if (!opt.ring_override.empty() && opt.ring_override != tag)
    throw mlt::parse_error("--ring '" + opt.ring_override + "' does not match input ring '" + tag + "'");

  Outcome res;
  if (tag == "Z") {
    res = run_verb(mlt::IntegerRing{}, verb, input, opt, caps);
  } else if (tag == "GF(p)[x]") {
    auto p = mlt::detail::require_count(jring, "p", "ring");
    res = run_verb(mlt::PolyRing{static_cast<std::uint32_t>(p)}, verb, input, opt, caps);
  } else {
    throw mlt::parse_error("unknown ring tag: " + tag + " (expected \"Z\" or \"GF(p)[x]\")");
  }

  json params{{"depth", opt.depth}, {"copies", opt.copies}, {"escalation", opt.escalation}};
  if (!opt.sample.empty()) params["sample"] = opt.sample;
  json report{{"verb", verb},
              {"parameters", std::move(params)},
              {"input_hash", fnv1a64_hex(raw)},
              {"library_version", mlt::library_version},
              {"result", std::move(res.result)}};
  std::cout << report.dump(2) << "\n";
  std::cerr << res.summary << "\n";
  return res.status;
}

// ---------------------------------------------------------------------------
// Curated fixtures. Byte-stable: built from sorted-key json and dumped with
// a fixed indent, no timestamps or environment data.

json fixture_system_endo(const std::vector<std::vector<long long>>& f) {
  const std::size_t n = f.size();
  json entries = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < n; ++j) row.push_back(std::to_string(f[i][j]));
    entries.push_back(std::move(row));
  }
  json m{{"rows", n}, {"cols", n}, {"entries", std::move(entries)}};
  return json{{"ranks", json::array({n})},
              {"maps", json::array()},
              {"tail", json{{"kind", "periodic"}, {"rank", n}, {"map", m}, {"attach", m}}}};
}

std::vector<std::pair<std::string, json>> curated_fixtures() {
  std::vector<std::pair<std::string, json>> out;
  json zring{{"tag", "Z"}};

  out.emplace_back("identity.json",
                   json{{"ring", zring},
                        {"verb", "consistency"},
                        {"system", fixture_system_endo({{1}})},
                        {"description", "constant rank-1 system; colimit is the ring itself"},
                        {"expected", json{{"projectivity", "Projective"}, {"baer", "BaerConsistent"}}}});

  {
    json f12{{"rows", 1}, {"cols", 2}, {"entries", json::array({json::array({"1", "0"})})}};
    json id1{{"rows", 1}, {"cols", 1}, {"entries", json::array({json::array({"1"})})}};
    json sys{{"ranks", json::array({2, 1})},
             {"maps", json::array({f12})},
             {"tail", json{{"kind", "periodic"}, {"rank", 1}, {"map", id1}, {"attach", id1}}}};
    out.emplace_back("eventually-identity.json",
                     json{{"ring", zring},
                          {"verb", "consistency"},
                          {"system", sys},
                          {"description", "rank drops once, then the identity repeats; colimit free"},
                          {"expected", json{{"projectivity", "Projective"}, {"baer", "BaerConsistent"}}}});
  }

  out.emplace_back("z-mul-2.json",
                   json{{"ring", zring},
                        {"verb", "consistency"},
                        {"system", fixture_system_endo({{2}})},
                        {"description", "multiplication by 2; colimit is the 2-inverted module"},
                        {"expected", json{{"projectivity", "NotProjective"}, {"baer", "BaerNegative"}}}});

  out.emplace_back("z-mul-3.json",
                   json{{"ring", zring},
                        {"verb", "consistency"},
                        {"system", fixture_system_endo({{3}})},
                        {"description", "multiplication by 3; base sample must contain 3"},
                        {"expected", json{{"projectivity", "NotProjective"}, {"baer", "BaerNegative"}}}});

  out.emplace_back("diag-1-2.json",
                   json{{"ring", zring},
                        {"verb", "consistency"},
                        {"system", fixture_system_endo({{1, 0}, {0, 2}})},
                        {"description", "one stable coordinate, one 2-divisible coordinate"},
                        {"expected", json{{"projectivity", "NotProjective"}, {"baer", "BaerNegative"}}}});

  {
    const std::size_t N = 5, K = 4;
    json entries = json::array();
    for (std::size_t i = 0; i < N; ++i) {
      json row = json::array();
      for (std::size_t j = 0; j < K; ++j) {
        long long v = (i == j) ? 1 : (i == j + 1 ? -2 : 0);
        row.push_back(std::to_string(v));
      }
      entries.push_back(std::move(row));
    }
    json pres{{"free_generators", N},
              {"relations", json{{"rows", N}, {"cols", K}, {"entries", std::move(entries)}}}};
    out.emplace_back("telescope-presentation.json",
                     json{{"ring", zring},
                          {"verb", "jensen"},
                          {"presentation", pres},
                          {"description", "telescope relations e_n - 2 e_{n+1}; the stage maps repeat"},
                          {"expected", json{{"verdict", "System"}, {"projectivity", "NotProjective"}}}});
  }

  {
    json pres{{"free_generators", 1},
              {"relations",
               json{{"rows", 1}, {"cols", 1}, {"entries", json::array({json::array({"2"})})}}}};
    out.emplace_back("nonflat-presentation.json",
                     json{{"ring", zring},
                          {"verb", "jensen"},
                          {"presentation", pres},
                          {"description", "presents a torsion module; stage 1 cannot split"},
                          {"expected", json{{"verdict", "NotFlatEvidence"}, {"stage", 1}}}});
  }
  return out;
}

int write_fixtures(const std::string& dir) {
  for (const auto& [name, body] : curated_fixtures()) {
    std::string path = dir + "/" + name;
    std::ofstream outf(path, std::ios::binary | std::ios::trunc);
    if (!outf) {
      std::cerr << "fixtures: cannot write " << path << "\n";
      return 3;
    }
    outf << body.dump(2) << "\n";
  }
  std::cerr << "fixtures: wrote " << curated_fixtures().size() << " files to " << dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact module-theory toolkit: towers, direct systems, projectivity, torsion tests"};
  app.require_subcommand(1);

  Options opt;
  std::string fixtures_dir;

  auto add_common = [&](CLI::App* sub, bool needs_input = true) {
    if (needs_input) sub->add_option("input", opt.input, "input JSON file")->required();
    sub->add_option("--depth", opt.depth, "exploration/report depth");
    sub->add_option("--copies", opt.copies, "number of copies for direct-sum targets");
    sub->add_option("--escalation", opt.escalation, "power-family escalation window");
    sub->add_option("--sample", opt.sample, "comma-separated ring elements");
    sub->add_option("--ring", opt.ring_override, "expected ring tag (checked against the input)");
  };

  const char* verbs[] = {"snf",    "module-normal-form", "hom",   "ext",
                         "tower-ml", "tower-lim",        "dirsys-projective",
                         "dirsys-ext", "jensen",         "baer",  "consistency"};
  for (const char* v : verbs) add_common(app.add_subcommand(v, v));

  auto* fix = app.add_subcommand("fixtures", "write the curated fixture suite");
  fix->add_option("--out", fixtures_dir, "target directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (fix->parsed()) return write_fixtures(fixtures_dir);
    for (const char* v : verbs)
      if (app.get_subcommand(v)->parsed()) return dispatch(v, opt);
    std::cerr << "no verb selected\n";
    return 3;
  } catch (const mlt::parse_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 3;
  } catch (const mlt::resource_error& e) {
    std::cerr << "resource cap: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
