#pragma once

// Command-line front end: subcommand routing and JSON/CSV reports.

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <regex>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "thinset/bmo.hpp"
#include "thinset/codes.hpp"
#include "thinset/error.hpp"
#include "thinset/gaussian.hpp"
#include "thinset/io/json.hpp"
#include "thinset/matroid.hpp"
#include "thinset/relations.hpp"
#include "thinset/riesz.hpp"
#include "thinset/spectrum.hpp"
#include "thinset/subgauss.hpp"

namespace thinset::cli {

using io::json;

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kBadInput = 2, kModuleError = 3 };

/// Every numeric result carries one of three labels.
inline json exact(double v) { return {{"value", v}, {"label", "exact"}}; }
inline json lower_bound(double v) { return {{"value", v}, {"label", "certified-lower-bound"}}; }
inline json exact_count(std::uint64_t v) { return {{"value", v}, {"label", "exact"}}; }
inline json lower_bound_count(std::uint64_t v) { return {{"value", v}, {"label", "certified-lower-bound"}}; }
inline json estimate(double v, std::uint64_t seed, std::uint64_t trials) {
  return {{"value", v}, {"label", "estimate"}, {"seed", seed}, {"trials", trials}};
}

/// Flags shared by all subcommands.
struct Common {
  std::uint64_t seed = 0;
  std::int64_t grid = 0;
  std::uint64_t cap = 0;
  double tol = 0.0;
  std::string out;
  std::string format = "json";
};

/// Subcommand flags; each subcommand reads the ones it declares.
struct Options {
  std::string set, group = "integers", extract = "none", vectors, dist, system, phases = "random";
  std::string poly, flavor = "mean1", arcs = "dyadic", order = "lex", z, functional, family;
  bool witnesses = false, exact_search = false;
  double delta = 0.5, a = 2.0, damping = 1.0, q = 2.0, s = 1.0, C = 1.0;
  std::int64_t p = 2, k = 1, n = 1, m = 1, degree = 8, nodes = 0, level = 0;
  std::uint64_t restarts = 8, samples = 0, trials = 0, attempts = 100'000, max_witnesses = 16;
};

struct Outcome {
  json results = json::object();
  json notes = json::array();
};

namespace detail {

inline FreqSet load_set(const Options& o, const GroupSpec& g) {
  if (o.set.empty()) throw io::InputError("--set is required");
  return io::freqset_from_json(io::load_json(o.set), g);
}

inline std::int64_t need_grid(const Common& c) {
  if (c.grid < 2) throw io::InputError("--grid is required and must be >= 2");
  return c.grid;
}

inline std::vector<std::int64_t> integer_set(const Options& o) {
  return load_set(o, GroupSpec::integers()).scalars();
}

inline json signs_json(const RelationCertificate& c) { return c.signs(); }

inline std::vector<double> parse_vector(const std::string& text) {
  const json j = io::load_json(text);
  try {
    return j.get<std::vector<double>>();
  } catch (const json::exception&) {
    throw io::InputError("expected a list of numbers");
  }
}

inline BmoFlavor parse_flavor(const std::string& s) {
  if (s == "mean1") return BmoFlavor::mean1();
  if (s.rfind("psi", 0) == 0 && s.size() > 3) {
    try {
      std::size_t used = 0;
      const double a = std::stod(s.substr(3), &used);
      if (used == s.size() - 3) return BmoFlavor::psi(a);
    } catch (const std::exception&) {
    }
  }
  throw io::InputError("flavor must be mean1 or psiA, e.g. psi2");
}

inline ArcScheme parse_arcs(const std::string& s) {
  if (s == "dyadic") return ArcScheme::DyadicLengths;
  if (s == "all") return ArcScheme::AllGridArcs;
  throw io::InputError("arcs must be dyadic or all");
}

}  // namespace detail

inline Outcome cmd_relations(const Common& c, const Options& o) {
  const auto g = GroupSpec::parse(o.group);
  const FreqSet A = detail::load_set(o, g);
  Outcome out;
  RelationOptions ro;
  if (c.cap) ro.cap = c.cap;
  ro.keep_witnesses = o.witnesses;
  ro.max_witnesses = o.max_witnesses;
  const auto rep = relation_count(A, ro);
  out.results["count"] = exact_count(rep.count);
  const auto qi = is_quasi_independent(A, ro.cap);
  out.results["quasi_independent"] = qi.quasi_independent;
  if (qi.witness) out.results["witness"] = detail::signs_json(*qi.witness);
  if (o.witnesses) {
    json w = json::array();
    for (const auto& cert : rep.certificates) w.push_back(detail::signs_json(cert));
    out.results["witnesses"] = w;
  }
  if (o.extract == "greedy" || o.extract == "thin") {
    const auto ex = o.extract == "greedy" ? extract_quasi_independent(A, Greedy{})
                                          : extract_quasi_independent(A, RandomThinning{o.delta, c.seed});
    json e = {{"subset", io::to_json(ex.subset)}, {"size", exact_count(ex.subset.size())}};
    if (o.extract == "thin") {
      e["retained"] = ex.retained;
      e["seed"] = c.seed;
      if (ex.retained_relations) e["retained_relations"] = exact_count(*ex.retained_relations);
    }
    out.results["extraction"] = e;
  } else if (o.extract != "none") {
    throw io::InputError("--extract must be none, greedy or thin");
  }
  if (g.kind() == GroupKind::Integers && o.q > 1.0) {
    const auto lac = lacunary_decompose(A, o.q);
    out.results["lacunary"] = {{"q", o.q}, {"parts", lac.parts}, {"block_bound", exact_count(lac.block_bound)}};
  }
  return out;
}

inline Outcome cmd_matroid(const Common&, const Options& o) {
  if (o.vectors.empty()) throw io::InputError("--vectors is required");
  const json j = io::load_json(o.vectors);
  std::vector<GFVector> vecs;
  try {
    vecs = j.get<std::vector<GFVector>>();
  } catch (const json::exception&) {
    throw io::InputError("vectors must be a list of integer lists");
  }
  if (vecs.empty()) throw io::InputError("no vectors given");
  const GFVectorSet V(o.p, static_cast<int>(vecs.front().size()), vecs);
  if (o.k < 1) throw io::InputError("--k must be >= 1");
  const auto k = static_cast<std::size_t>(o.k);
  Outcome out;
  out.results["rank"] = exact_count(gf_rank(V));
  const auto res = horn_rado_partition(V, k);
  if (const auto* P = std::get_if<Partition>(&res)) {
    out.results["outcome"] = "partition";
    out.results["parts"] = P->parts;
    out.results["verified"] = verify_partition(V, *P, k);
  } else {
    const auto& W = std::get<FailureWitness>(res);
    out.results["outcome"] = "witness";
    out.results["subset"] = W.subset;
    out.results["subset_rank"] = exact_count(W.rank);
    out.results["verified"] = verify_witness(V, W, k);
  }
  return out;
}

// Characters e^{ikt} on the torus grid, from --system {"grid", "freqs"} or --set and --grid.
inline FunctionSystem load_system(const Common& c, const Options& o, std::vector<std::int64_t>* freqs = nullptr) {
  std::vector<std::int64_t> f;
  std::int64_t M = c.grid;
  if (!o.system.empty()) {
    const json j = io::load_json(o.system);
    try {
      f = j.at("freqs").get<std::vector<std::int64_t>>();
      if (j.contains("grid")) M = j.at("grid").get<std::int64_t>();
    } catch (const json::exception&) {
      throw io::InputError("a system is {\"grid\": M, \"freqs\": [...]}");
    }
  } else {
    f = detail::integer_set(o);
  }
  if (M < 2) throw io::InputError("the system needs a grid size >= 2");
  if (freqs) *freqs = f;
  return torus_characters(f, M);
}

inline Outcome cmd_sg(const Common& c, const Options& o) {
  Outcome out;
  if (!o.dist.empty()) {
    const auto f = io::distribution_from_spec(o.dist);
    out.results["sg"] = lower_bound(sg_constant(f));
    out.notes.push_back("sg is the maximum over a log-spaced lambda grid plus the variance limit");
    return out;
  }
  const auto S = load_system(c, o);
  SystemOptions so;
  so.restarts = static_cast<int>(o.restarts);
  so.seed = c.seed;
  const auto est = sg_system_lower(S, so);
  out.results["sg_system"] = lower_bound(est.value);
  out.results["direction"] = est.direction;
  out.results["components"] = est.components;
  out.results["restarts"] = est.restarts;
  out.results["seed"] = est.seed;
  return out;
}

inline Outcome cmd_psi(const Common& c, const Options& o) {
  if (o.dist.empty()) throw io::InputError("--dist is required");
  const auto f = io::distribution_from_spec(o.dist);
  Outcome out;
  out.results["psi"] = exact(c.tol > 0 ? psi_norm(f, o.a, c.tol) : psi_norm(f, o.a));
  out.results["a"] = o.a;
  return out;
}

inline Outcome cmd_riesz(const Common& c, const Options& o) {
  const FreqSet A = detail::load_set(o, GroupSpec::integers());
  std::vector<cplx> z(A.size(), cplx(1.0));
  if (o.phases == "random") {
    auto rng = make_rng(c.seed, 0);
    for (auto& x : z) x = std::polar(1.0, kTwoPi * uniform01(rng));
  } else if (o.phases != "ones") {
    z.clear();
    for (double t : detail::parse_vector(o.phases)) z.push_back(std::polar(1.0, t));
  }
  std::int64_t M = c.grid;
  if (M == 0) {
    std::int64_t total = 0;
    for (auto k : A.scalars()) total += k < 0 ? -k : k;
    M = 4 * total + 4;
  }
  const auto R = riesz_product(A, z, M, o.damping);
  Outcome out;
  out.results["grid"] = M;
  out.results["mean"] = exact(R.mean);
  out.results["min_value"] = exact(R.min_value);
  json phases = json::array();
  for (auto x : z) phases.push_back(std::arg(x));
  out.results["phase_angles"] = phases;
  if (R.law) {
    out.results["coefficient_law"] = {{"max_deviation", exact(R.law->max_deviation)},
                                      {"holds", R.law->holds},
                                      {"worst_subset", R.law->worst_subset}};
  }
  return out;
}

inline Outcome cmd_sidon(const Common& c, const Options& o) {
  const auto g = GroupSpec::parse(o.group);
  const FreqSet L = detail::load_set(o, g);
  InterpolationOptions io_opt;
  if (c.tol > 0) io_opt.tol = c.tol;
  const auto s = sidon_constant_search(L, o.samples, c.seed, io_opt);
  Outcome out;
  out.results["sidon_lower_bound"] = lower_bound(s.certified_lower_bound);
  out.results["best_primal"] = estimate(s.best_primal, c.seed, s.sign_patterns + s.phase_samples);
  out.results["sign_patterns"] = s.sign_patterns;
  out.results["phase_samples"] = s.phase_samples;
  json phases = json::array();
  for (auto x : s.best_phases) phases.push_back(std::arg(x));
  out.results["best_phase_angles"] = phases;
  out.notes.push_back("the lower bound is the largest dual value over the sampled targets");
  return out;
}

inline Outcome cmd_mehler(const Common& c, const Options& o) {
  const int N = static_cast<int>(o.n);
  std::vector<double> z = o.z.empty() ? std::vector<double>(N, 1.0) : detail::parse_vector(o.z);
  Outcome out;
  DecompositionOptions d;
  d.nodes = static_cast<int>(o.nodes);
  const auto dec = tensor_decompose(N, o.delta, z, static_cast<int>(o.degree), d);
  out.results["decomposition"] = {
      {"nodes", dec.t.rule.nodes.size()},
      {"t_l1_norm", exact(*dec.t.l1_norm)},
      {"t_l1_bound", exact(dec.l1_bound)},
      {"r_op_norm", exact(*dec.r.op_norm_2to2)},
      {"r_op_bound", exact(dec.op_bound)},
      {"reconstruction_error", exact(dec.reconstruction_error)},
      {"certified", *dec.t.l1_norm <= dec.l1_bound + d.l1_tolerance &&
                        dec.reconstruction_error <= d.reconstruction_tolerance}};
  out.notes.push_back("t_l1_norm is the quadrature-grid L1 norm of the kernel t");
  if (!o.functional.empty()) {
    ConcentrationOptions co;
    co.seed = c.seed;
    if (o.trials) co.trials = o.trials;
    const auto F = parse_functional(o.functional);
    const auto est = lipschitz_concentration(F, N, co);
    json e = estimate(est.sg, est.seed, est.trials);
    e["stderr"] = est.stderr_;
    out.results["concentration"] = {{"functional", to_string(F)},
                                    {"sg", e},
                                    {"lipschitz", est.lipschitz},
                                    {"bound_holds", est.bound_holds}};
  }
  return out;
}

inline Outcome cmd_codes(const Common& c, const Options& o) {
  const int n = static_cast<int>(o.n), m = static_cast<int>(o.m), k = static_cast<int>(o.k);
  Outcome out;
  CodeFamily f;
  const std::uint64_t budget = c.cap ? c.cap : kCodeBudget;
  if (o.order == "lex") {
    try {
      f = gv_greedy(n, m, k, LexOrder{}, budget);
    } catch (const PartialFamily& e) {
      f = e.family();
      out.notes.push_back(std::string("greedy stopped early: ") + e.what());
    }
  } else if (o.order == "random") {
    f = gv_greedy(n, m, k, RandomOrder{c.seed, o.attempts}, budget);
    out.results["seed"] = c.seed;
  } else {
    throw io::InputError("--order must be lex or random");
  }
  out.results["greedy_size"] = lower_bound_count(f.words.size());
  out.results["counting_bound"] = exact(counting_bound(n, m, k));
  out.results["family"] = io::to_json(f);
  if (o.exact_search) out.results["exact_N"] = exact_count(exact_N(n, m, k));
  if (!o.set.empty()) {
    const FreqSet A = detail::load_set(o, GroupSpec::integers());
    const auto ex = extract_via_codes(A, f);
    json e = {{"supports", ex.supports}};
    if (ex.subset) {
      e["subset"] = io::to_json(*ex.subset);
      e["word"] = *ex.word;
    } else {
      e["relation_count"] = exact_count(ex.relation_count);
      e["injection_holds"] = ex.injection_holds;
    }
    out.results["extraction"] = e;
  }
  return out;
}

inline Outcome cmd_bmo(const Common& c, const Options& o) {
  Outcome out;
  const auto flavor = detail::parse_flavor(o.flavor);
  const auto scheme = detail::parse_arcs(o.arcs);
  if (!o.poly.empty()) {
    const TrigPoly p = io::trigpoly_from_json(io::load_json(o.poly));
    const std::int64_t M = detail::need_grid(c);
    out.results["bmo_norm"] = exact(bmo_norm(synth_eval(p, M), flavor, ArcFamily::make(M, scheme)));
  }
  if (!o.set.empty()) {
    const FreqSet L = detail::load_set(o, GroupSpec::integers());
    const std::size_t trials = o.trials ? o.trials : 200;
    const auto st = lacunary_bmo_ratio(L, trials, detail::need_grid(c), c.seed,
                                       BmoRatioOptions{flavor.kind == BmoFlavor::Kind::Psi ? flavor.a : 2.0, scheme});
    out.results["ratio"] = {{"max", estimate(st.max_ratio, st.seed, st.trials)},
                            {"mean", estimate(st.mean_ratio, st.seed, st.trials)}};
  }
  if (o.level > 0) {
    const auto t = trapezoid_poly(static_cast<int>(o.level), c.grid);
    out.results["trapezoid"] = {{"level", t.n},
                                {"grid", t.grid},
                                {"l1_norm", exact(t.l1_norm)},
                                {"fejer_identity_exact", t.identity_exact}};
  }
  if (o.poly.empty() && o.set.empty() && o.level == 0) throw io::InputError("give --poly, --set or --level");
  return out;
}

inline Outcome cmd_net(const Common& c, const Options& o) {
  const auto S = load_system(c, o);
  const auto rep = packing_net(S, o.delta, o.s, o.C);
  Outcome out;
  out.results["size"] = exact_count(rep.points.size());
  out.results["log_size"] = exact(rep.log_size);
  out.results["bound"] = exact(rep.bound);
  out.results["bound_holds"] = rep.bound_holds;
  out.results["maximal"] = rep.maximal;
  out.results["separation"] = rep.separation;
  return out;
}

inline Outcome cmd_entropy(const Common& c, const Options& o) {
  const FreqSet L = detail::load_set(o, GroupSpec::cyclic(detail::need_grid(c)));
  Outcome out;
  out.results["entropy_integral"] = exact(entropy_integral(L));
  return out;
}

namespace detail {

inline void flatten(const json& j, const std::string& path, std::ostream& os) {
  if (j.is_object() && j.contains("value") && j.contains("label")) {
    os << path << ',' << j.at("value").dump() << ',' << j.at("label").get<std::string>() << '\n';
    return;
  }
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, path.empty() ? k : path + "." + k, os);
    return;
  }
  std::string text = j.dump();
  if (j.is_array() || text.find(',') != std::string::npos) text = '"' + std::regex_replace(text, std::regex("\""), "\"\"") + '"';
  os << path << ',' << text << ",\n";
}

inline json option_echo(const CLI::App& app) {
  json cfg = json::object();
  for (const CLI::Option* opt : app.get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name.empty()) continue;
    if (opt->count() > 0) {
      const auto& r = opt->results();
      cfg[name] = opt->get_type_size() == 0 ? json(true) : (r.size() == 1 ? json(r.front()) : json(r));
    } else if (!opt->get_default_str().empty()) {
      cfg[name] = opt->get_default_str();
    }
  }
  return cfg;
}

inline void report_error(std::ostream& err, const std::string& kind, const std::string& message, int code) {
  err << json{{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}}.dump() << '\n';
}

}  // namespace detail

/// Runs one command line (without the program name). Reports go to `out`
/// (or --out); diagnostics go to `err` as a JSON error object. Exit codes:
/// 0 success, 2 malformed input, 3 module error.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  CLI::App app{"thinset: thin sets, subgaussian systems and related tools", "thinset"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", kVersion);
  Common c;
  Options o;
  app.add_option("--seed", c.seed, "Seed for every random stream");
  app.add_option("--grid", c.grid, "Grid size M");
  app.add_option("--cap", c.cap, "Work cap (0 keeps the module default)");
  app.add_option("--tol", c.tol, "Tolerance (0 keeps the module default)")->check(CLI::NonNegativeNumber);
  app.add_option("--out", c.out, "Write the report here instead of standard output");
  app.add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  using Handler = std::function<Outcome(const Common&, const Options&)>;
  std::map<std::string, std::pair<CLI::App*, Handler>> commands;
  auto sub = [&](const std::string& name, const std::string& help, Handler h) {
    CLI::App* s = app.add_subcommand(name, help)->fallthrough();
    commands[name] = {s, std::move(h)};
    return s;
  };

  auto* rel = sub("relations", "Relation counts, quasi-independence and extraction", cmd_relations);
  rel->add_option("--set", o.set, "Frequency set (JSON list or file)")->required();
  rel->add_option("--group", o.group, "integers, cyclic:M, torus:M or prime:p:N");
  rel->add_flag("--witnesses", o.witnesses, "List nontrivial relations");
  rel->add_option("--max-witnesses", o.max_witnesses, "Cap on listed relations");
  rel->add_option("--extract", o.extract, "none, greedy or thin");
  rel->add_option("--delta", o.delta, "Thinning probability");
  rel->add_option("--q", o.q, "Lacunarity ratio for the decomposition");

  auto* mat = sub("matroid", "Horn-Rado partition over GF(p)", cmd_matroid);
  mat->add_option("--p", o.p, "Prime field size")->required();
  mat->add_option("--vectors", o.vectors, "JSON list of vectors")->required();
  mat->add_option("--k", o.k, "Number of independent parts")->required();

  auto* sg = sub("sg", "Subgaussian constants of a distribution or character system", cmd_sg);
  sg->add_option("--dist", o.dist, "Distribution name or JSON");
  sg->add_option("--system", o.system, "JSON {\"grid\": M, \"freqs\": [...]}");
  sg->add_option("--set", o.set, "Frequencies, used with --grid");
  sg->add_option("--restarts", o.restarts, "Random starts for the system search");

  auto* psi = sub("psi", "Orlicz psi_a norm of a distribution", cmd_psi);
  psi->add_option("--dist", o.dist, "Distribution name or JSON")->required();
  psi->add_option("--a", o.a, "Orlicz exponent")->check(CLI::PositiveNumber);

  auto* rz = sub("riesz", "Riesz product on a quasi-independent set", cmd_riesz);
  rz->add_option("--set", o.set, "Quasi-independent frequency set")->required();
  rz->add_option("--phases", o.phases, "random, ones, or a JSON list of angles");
  rz->add_option("--damping", o.damping, "Factor in [0, 1] on each cosine term");

  auto* sd = sub("sidon", "Certified lower bound for a Sidon constant", cmd_sidon);
  sd->add_option("--group", o.group, "cyclic:M or prime:p:N")->required();
  sd->add_option("--set", o.set, "Characters as group elements")->required();
  sd->add_option("--samples", o.samples, "Random phase targets beyond the sign patterns");

  auto* me = sub("mehler", "Tensor decomposition and Lipschitz concentration", cmd_mehler);
  me->add_option("--n", o.n, "Number of Gaussian variables")->check(CLI::Range(1, 3));
  me->add_option("--delta", o.delta, "Ornstein-Uhlenbeck parameter in (0, 1)")->required();
  me->add_option("--degree", o.degree, "Hermite truncation degree");
  me->add_option("--z", o.z, "JSON list of weights in [-1, 1]");
  me->add_option("--nodes", o.nodes, "Quadrature nodes per axis (0 adapts)");
  me->add_option("--report", c.out, "Same as --out");
  me->add_option("--lipschitz", o.functional, "coordinate, euclidean-norm, max-coordinate or distance-to-point");
  me->add_option("--trials", o.trials, "Monte Carlo trials for --lipschitz");

  auto* co = sub("codes", "Constant-weight code packings", cmd_codes);
  co->add_option("--n", o.n, "Word length")->required();
  co->add_option("--m", o.m, "Word weight")->required();
  co->add_option("--k", o.k, "Largest allowed intersection")->required();
  co->add_flag("--exact", o.exact_search, "Also compute N(k, m, n) exactly");
  co->add_option("--order", o.order, "lex or random");
  co->add_option("--attempts", o.attempts, "Consecutive rejections before random order stops");
  co->add_option("--set", o.set, "Extract a quasi-independent subset of this set");

  auto* bm = sub("bmo", "BMO norms, trapezoid polynomials and lacunary ratios", cmd_bmo);
  bm->add_option("--poly", o.poly, "Polynomial JSON");
  bm->add_option("--flavor", o.flavor, "mean1 or psiA");
  bm->add_option("--arcs", o.arcs, "dyadic or all");
  bm->add_option("--set", o.set, "Frequencies for the random-direction ratio");
  bm->add_option("--trials", o.trials, "Random directions for the ratio");
  bm->add_option("--level", o.level, "Trapezoid level n");

  auto* nt = sub("net", "Packing net of a character system", cmd_net);
  nt->add_option("--system", o.system, "JSON {\"grid\": M, \"freqs\": [...]}");
  nt->add_option("--set", o.set, "Frequencies, used with --grid");
  nt->add_option("--delta", o.delta, "Pairwise separation in units of sqrt(n)");
  nt->add_option("--s", o.s, "Certified sg bound")->required();
  nt->add_option("--C", o.C, "Sup-norm bound");

  auto* en = sub("entropy", "Entropy integral of a set in Z_M", cmd_entropy);
  en->add_option("--set", o.set, "Frequencies in Z_M, with --grid M")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion& e) {
    out << kVersion << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    detail::report_error(err, "UsageError", e.what(), kBadInput);
    return kBadInput;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  const auto& [cmd_app, handler] = commands.at(name);
  Outcome result;
  try {
    result = handler(c, o);
  } catch (const io::InputError& e) {
    detail::report_error(err, e.kind(), e.what(), kBadInput);
    return kBadInput;
  } catch (const json::exception& e) {
    detail::report_error(err, "InputError", e.what(), kBadInput);
    return kBadInput;
  } catch (const Error& e) {
    detail::report_error(err, e.kind(), e.what(), kModuleError);
    return kModuleError;
  } catch (const std::exception& e) {
    detail::report_error(err, "InternalError", e.what(), kModuleError);
    return kModuleError;
  }

  json report;
  report["tool"] = {{"name", "thinset"}, {"version", kVersion}};
  json config = detail::option_echo(app);
  config.update(detail::option_echo(*cmd_app));
  config.erase("out");
  config.erase("report");
  report["config"] = {{"subcommand", name}, {"options", config}};
  report["results"] = result.results;
  report["notes"] = result.notes;
  report["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::ostringstream text;
  if (c.format == "csv") {
    text << "key,value,label\n";
    detail::flatten(report["results"], "", text);
  } else {
    text << report.dump(2) << '\n';
  }
  if (c.out.empty()) {
    out << text.str();
  } else {
    std::ofstream f(c.out);
    if (!f || !(f << text.str())) {
      detail::report_error(err, "InputError", "cannot write '" + c.out + "'", kBadInput);
      return kBadInput;
    }
  }
  return kOk;
}

}  // namespace thinset::cli
