#include "formulads/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <ostream>
#include <random>
#include <set>

#include "formulads/construct.hpp"
#include "formulads/dyndet.hpp"
#include "formulads/dyninv.hpp"
#include "formulads/errors.hpp"
#include "formulads/formula.hpp"
#include "formulads/matching.hpp"
#include "formulads/oracle.hpp"
#include "formulads/rank.hpp"

namespace formulads {

using json = nlohmann::json;
using QMatrix = Matrix<Rational>;

// ---- config ------------------------------------------------------------------

namespace {

const std::set<std::string> kScenarios = {"maintain", "determinant", "rank", "matching", "bits-sweep"};
const std::set<std::string> kKeys = {"scenario", "formula", "s_max",    "dim_max", "n",       "t",
                                     "ring",     "bits",    "precision", "eps",     "p",       "seed",
                                     "engine",   "mu",      "nu",        "entry_range", "b_list", "slope_max",
                                     "ops",      "timing"};

template <class T>
T get_positive(const json& j, const char* key, T fallback, bool allow_zero = false) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(std::string(key) + " must be a number");
  double d = v.get<double>();
  if (d < 0 || (!allow_zero && d == 0)) throw ConfigError(std::string(key) + " must be positive");
  return v.get<T>();
}

}  // namespace

ScenarioConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!kKeys.count(key)) throw ConfigError("unknown key '" + key + "'");
  ScenarioConfig c;
  if (j.contains("scenario")) c.scenario = j.at("scenario").get<std::string>();
  if (!kScenarios.count(c.scenario)) throw ConfigError("unknown scenario '" + c.scenario + "'");
  if (j.contains("formula")) c.formula = j.at("formula").get<std::string>();
  c.s_max = get_positive<std::size_t>(j, "s_max", c.s_max);
  c.dim_max = get_positive<std::size_t>(j, "dim_max", c.dim_max);
  c.n = get_positive<std::size_t>(j, "n", c.scenario == "bits-sweep" ? 8 : c.n);
  c.t = get_positive<std::size_t>(j, "t", c.t, true);
  if (c.scenario == "determinant")
    c.ring = "float64";
  else if (c.scenario == "bits-sweep")
    c.ring = "fixed";
  if (j.contains("ring")) c.ring = j.at("ring").get<std::string>();
  if (c.ring != "rational" && c.ring != "float64" && c.ring != "fixed")
    throw ConfigError("ring must be rational, float64 or fixed");
  c.bits = get_positive<unsigned>(j, "bits", c.bits);
  if (j.contains("precision")) {
    std::string pr = j.at("precision").get<std::string>();
    if (pr != "certified" && pr != "empirical") throw ConfigError("precision must be certified or empirical");
    c.certified = pr == "certified";
  }
  c.eps = get_positive<double>(j, "eps", c.scenario == "determinant" ? 1e-3 : c.eps);
  c.p = get_positive<std::uint64_t>(j, "p", c.p);
  if (!is_prime(c.p) || c.p < 3 || c.p >= (std::uint64_t{1} << 63))
    throw ConfigError("p must be an odd prime below 2^63");
  if (!j.contains("seed")) throw ConfigError("seed is required");
  if (!j.at("seed").is_number_unsigned() && !(j.at("seed").is_number_integer() && j.at("seed").get<long>() >= 0))
    throw ConfigError("seed must be a non-negative integer");
  c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("engine")) c.engine = j.at("engine").get<std::string>();
  try {
    parse_engine_kind(c.engine);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (j.contains("mu")) c.mu = get_positive<double>(j, "mu", 0.0, true);
  if (j.contains("nu")) c.nu = get_positive<double>(j, "nu", 0.0, true);
  c.entry_range = get_positive<long>(j, "entry_range", c.entry_range);
  if (j.contains("b_list")) {
    for (const auto& b : j.at("b_list")) {
      if (!b.is_number_integer() || b.get<long>() <= 0) throw ConfigError("b_list entries must be positive");
      c.b_list.push_back(b.get<unsigned>());
    }
  }
  if (j.contains("slope_max")) c.slope_max = j.at("slope_max").get<double>();
  if (j.contains("ops"))
    for (const auto& op : j.at("ops")) c.graph_ops.push_back(op.get<std::string>());
  if (j.contains("timing")) c.timing = j.at("timing").get<bool>();
  return c;
}

// ---- shared helpers ---------------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

double micros_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::micro>(Clock::now() - t0).count();
}

long uniform(std::mt19937_64& rng, long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng); }

long nonzero(std::mt19937_64& rng, long r) {
  long v = uniform(rng, 1, r);
  return uniform(rng, 0, 1) ? v : -v;
}

Formula load_formula(const ScenarioConfig& cfg, std::mt19937_64& rng, bool square) {
  if (cfg.formula) {
    try {
      return parse(*cfg.formula, Shape{cfg.n, cfg.n});
    } catch (const Error& e) {
      throw ConfigError(std::string("formula: ") + e.what());
    }
  }
  GeneratorParams gp{cfg.s_max, cfg.dim_max, square ? cfg.n : 0};
  return random_formula(rng, gp);
}

// Inputs are drawn per name; every leaf carrying the name shares the value.
struct Inputs {
  std::vector<LeafInfo> leaves;
  std::map<std::string, QMatrix> by_name;

  std::vector<QMatrix> per_leaf() const {
    std::vector<QMatrix> out;
    for (const auto& l : leaves) out.push_back(by_name.at(l.name));
    return out;
  }
  std::vector<std::size_t> leaves_named(const std::string& name) const {
    std::vector<std::size_t> out;
    for (const auto& l : leaves)
      if (l.name == name) out.push_back(l.id);
    return out;
  }
};

Inputs random_inputs(const Formula& f, std::mt19937_64& rng, long r) {
  Inputs in;
  in.leaves = enumerate_leaves(f);
  for (const auto& [name, shape] : f.dims()) {
    QMatrix m(shape.rows, shape.cols, Rational(0));
    for (std::size_t i = 0; i < shape.rows; ++i)
      for (std::size_t j = 0; j < shape.cols; ++j) m(i, j) = uniform(rng, -r, r);
    in.by_name[name] = m;
  }
  return in;
}

struct EntryChange {
  std::string name;
  std::size_t i, j;
  Rational delta;
};

EntryChange random_change(const Formula& f, std::mt19937_64& rng, long r) {
  auto it = f.dims().begin();
  std::advance(it, uniform(rng, 0, static_cast<long>(f.dims().size()) - 1));
  EntryChange ch{it->first, 0, 0, Rational(nonzero(rng, r))};
  ch.i = static_cast<std::size_t>(uniform(rng, 0, static_cast<long>(it->second.rows) - 1));
  ch.j = static_cast<std::size_t>(uniform(rng, 0, static_cast<long>(it->second.cols) - 1));
  return ch;
}

// Retries a sampler until pred accepts; the promise of well-defined values is
// the scenario's, not the engine's.
template <class Sample, class Pred>
auto sample_until(Sample sample, Pred pred, const char* what) {
  for (int tries = 0; tries < 500; ++tries) {
    auto v = sample();
    if (pred(v)) return v;
  }
  throw ConfigError(std::string("could not sample ") + what);
}

bool well_defined(const Formula& f, const Inputs& in) {
  try {
    oracle::eval_exact(f, in.per_leaf());
    return true;
  } catch (const SingularInversion&) {
    return false;
  }
}

EngineParams engine_params(const ScenarioConfig& cfg) {
  EngineParams p = default_params(parse_engine_kind(cfg.engine));
  if (cfg.mu) p.mu = *cfg.mu;
  if (cfg.nu) p.nu = *cfg.nu;
  return p;
}

double to_double_exact(const Rational& q) { return q.get_d(); }

json summary_base(const ScenarioConfig& cfg, const Formula* f) {
  json s{{"type", "summary"}, {"scenario", cfg.scenario}, {"seed", cfg.seed}, {"t", cfg.t}};
  if (f) s["formula"] = pretty_print(*f);
  return s;
}

void finish(Report& rep, const ScenarioConfig& cfg, Clock::time_point t0, std::size_t steps) {
  double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  rep.summary["steps"] = steps;
  rep.summary["pass"] = rep.pass;
  if (cfg.timing) {
    rep.summary["elapsed_s"] = secs;
    rep.summary["throughput"] = secs > 0 ? static_cast<double>(steps) / secs : 0.0;
  }
}

// ---- maintain ------------------------------------------------------------------------

template <class Ring>
Report maintain_with(const ScenarioConfig& cfg, const Ring& ring_in, const Formula& f, Inputs in,
                     std::mt19937_64& rng) {
  Report rep;
  auto t0 = Clock::now();
  Ring ring = ring_in;
  std::vector<Matrix<typename Ring::value_type>> converted;
  for (const auto& m : in.per_leaf()) converted.push_back(convert(ring, m));
  auto cons = build(ring, f, converted);
  EngineParams params = engine_params(cfg);
  if (!Ring::exact) params.eps_step = cfg.eps / (2.0 * static_cast<double>(std::max<std::size_t>(cfg.t, 1)));
  InverseEngine<Ring> engine(ring, cons.N, params);
  double worst = 0;
  for (std::size_t step = 0; step < cfg.t; ++step) {
    EntryChange ch = sample_until(
        [&] { return random_change(f, rng, cfg.entry_range); },
        [&](const EntryChange& c) {
          Inputs next = in;
          next.by_name[c.name](c.i, c.j) += c.delta;
          return well_defined(f, next);
        },
        "a well-defined update");
    in.by_name[ch.name](ch.i, ch.j) += ch.delta;
    auto ts = Clock::now();
    for (std::size_t leaf : in.leaves_named(ch.name)) {
      const LeafBlock& lb = locate_input(cons, leaf);
      engine.update_entry(lb.row + ch.i, lb.col + ch.j, ring.from_rational(ch.delta));
    }
    std::vector<typename Ring::value_type> answers;
    for (std::size_t a = 0; a < cons.I.size(); ++a)
      for (std::size_t b = 0; b < cons.J.size(); ++b) answers.push_back(engine.query(cons.I[a], cons.J[b]));
    double us = micros_since(ts);
    QMatrix truth = oracle::eval_exact(f, in.per_leaf());
    Rational max_err = 0;
    double max_rel = 0;
    for (std::size_t a = 0, k = 0; a < cons.I.size(); ++a)
      for (std::size_t b = 0; b < cons.J.size(); ++b, ++k) {
        Rational err = abs(ring.to_rational(answers[k]) - truth(a, b));
        if (err > max_err) max_err = err;
        if (sgn(truth(a, b)) != 0) max_rel = std::max(max_rel, to_double_exact(err / abs(truth(a, b))));
      }
    double e = to_double_exact(max_err);
    worst = std::max(worst, e);
    bool ok = e <= cfg.eps;
    rep.pass = rep.pass && ok;
    json rec{{"type", "record"},
             {"step", step},
             {"input", ch.name},
             {"i", ch.i},
             {"j", ch.j},
             {"delta", ch.delta.get_str()},
             {"answer", ring.to_double(answers[0])},
             {"oracle", truth(0, 0).get_d()},
             {"abs_err", e},
             {"rel_err", max_rel},
             {"ledger", engine.ledger()},
             {"ok", ok}};
    if (cfg.timing) rec["time_us"] = us;
    rep.records.push_back(std::move(rec));
  }
  rep.summary = summary_base(cfg, &f);
  rep.summary["ring"] = ring.name();
  rep.summary["engine"] = to_string(params.kind);
  rep.summary["size_N"] = cons.size();
  rep.summary["max_abs_err"] = worst;
  rep.summary["eps"] = cfg.eps;
  auto snap = engine.snapshot();
  rep.summary["resets"] = snap.resets;
  rep.summary["flushes"] = snap.flushes;
  finish(rep, cfg, t0, cfg.t);
  return rep;
}

Report run_maintain(const ScenarioConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  Formula f = load_formula(cfg, rng, false);
  Inputs in = sample_until([&] { return random_inputs(f, rng, cfg.entry_range); },
                           [&](const Inputs& x) { return well_defined(f, x); }, "well-defined inputs");
  if (cfg.ring == "rational") return maintain_with(cfg, RationalRing{}, f, in, rng);
  if (cfg.ring == "float64") return maintain_with(cfg, Float64Ring{}, f, in, rng);
  unsigned bits = cfg.bits;
  if (cfg.certified) {
    Float64Ring fr;
    std::vector<Matrix<double>> conv;
    for (const auto& m : in.per_leaf()) conv.push_back(convert(fr, m));
    auto c = build(fr, f, conv);
    double kappa = std::max({2.0, frobenius(fr, c.N), frobenius(fr, approx_inverse(fr, c.N))});
    bits = certified_frac_bits(kappa, cfg.t, cfg.eps);
  }
  return maintain_with(cfg, FixedRing{bits}, f, in, rng);
}

// ---- determinant -----------------------------------------------------------------------

bool det_nonzero(const Formula& f, const Inputs& in) {
  try {
    return sgn(oracle::det_bareiss(oracle::eval_exact(f, in.per_leaf()))) != 0;
  } catch (const SingularInversion&) {
    return false;
  }
}

template <class Ring>
Report determinant_with(const ScenarioConfig& cfg, const Ring& ring, const Formula& f, Inputs in,
                        std::mt19937_64& rng) {
  Report rep;
  auto t0 = Clock::now();
  DetTrackerOptions opt{engine_params(cfg), cfg.eps, std::max<std::size_t>(cfg.t, 1)};
  DetTracker<Ring> tracker(ring, f, in.per_leaf(), opt);
  double worst = 0;
  for (std::size_t step = 0; step < cfg.t; ++step) {
    EntryChange ch;
    double us = 0;
    for (int attempt = 0;; ++attempt) {
      if (attempt > 500) throw ConfigError("could not sample an invertibility-preserving update");
      ch = sample_until([&] { return random_change(f, rng, cfg.entry_range); },
                        [&](const EntryChange& c) {
                          Inputs next = in;
                          next.by_name[c.name](c.i, c.j) += c.delta;
                          return det_nonzero(f, next);
                        },
                        "an invertibility-preserving update");
      auto ts = Clock::now();
      std::size_t applied = 0;
      try {
        for (std::size_t leaf : in.leaves_named(ch.name)) {
          tracker.update(leaf, ch.i, ch.j, ch.delta);
          ++applied;
        }
      } catch (const SingularUpdate&) {
        // an intermediate fan-out state was singular; undo and resample
        for (; applied > 0; --applied) tracker.revert();
        continue;
      }
      us = micros_since(ts);
      break;
    }
    in.by_name[ch.name](ch.i, ch.j) += ch.delta;
    Rational truth = oracle::det_bareiss(oracle::eval_exact(f, in.per_leaf()));
    SignedLogDet d = tracker.current();
    bool sign_ok = d.sign == sgn(truth);
    double rel = std::fabs(std::expm1(d.log_abs - log_abs(truth)));
    worst = std::max(worst, rel);
    bool ok = sign_ok && rel <= cfg.eps;
    rep.pass = rep.pass && ok;
    json rec{{"type", "record"}, {"step", step},         {"input", ch.name},  {"i", ch.i},
             {"j", ch.j},        {"delta", ch.delta.get_str()}, {"sign", d.sign}, {"log_abs", d.log_abs},
             {"oracle", truth.get_d()}, {"oracle_sign", sgn(truth)}, {"rel_err", rel}, {"sign_ok", sign_ok},
             {"ledger", tracker.snapshot_json()["ledger_Nhat"]}, {"ok", ok}};
    if (cfg.timing) rec["time_us"] = us;
    rep.records.push_back(std::move(rec));
  }
  rep.summary = summary_base(cfg, &f);
  rep.summary["ring"] = ring.name();
  rep.summary["max_rel_err"] = worst;
  rep.summary["eps"] = cfg.eps;
  rep.summary["restarts"] = tracker.restarts();
  finish(rep, cfg, t0, cfg.t);
  return rep;
}

Report run_determinant(const ScenarioConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  // A generated formula can be singular for every input (a rank-deficient
  // product), so when inputs keep failing a fresh formula is drawn.
  std::optional<Formula> chosen;
  Inputs in;
  for (int attempt = 0; attempt < 50 && !chosen; ++attempt) {
    Formula f = load_formula(cfg, rng, true);
    DimCheck dc = check_dims(f);
    if (dc.output.rows != dc.output.cols) throw ConfigError("determinant needs a square formula");
    for (int tries = 0; tries < 50; ++tries) {
      in = random_inputs(f, rng, cfg.entry_range);
      if (det_nonzero(f, in)) {
        chosen = f;
        break;
      }
    }
    if (cfg.formula && !chosen) break;
  }
  if (!chosen) throw ConfigError("could not sample inputs with det f != 0");
  const Formula& f = *chosen;
  if (cfg.ring == "rational") return determinant_with(cfg, RationalRing{}, f, in, rng);
  if (cfg.ring == "float64") return determinant_with(cfg, Float64Ring{}, f, in, rng);
  FixedRing ring{cfg.bits};
  if (cfg.certified) ring = certified_fixed_ring(f, in.per_leaf(), std::max<std::size_t>(cfg.t, 1), cfg.eps);
  return determinant_with(cfg, ring, f, in, rng);
}

// ---- rank -------------------------------------------------------------------------------

using UMatrix = Matrix<std::uint64_t>;

struct FieldInputs {
  std::vector<LeafInfo> leaves;
  std::map<std::string, UMatrix> by_name;

  std::vector<UMatrix> per_leaf() const {
    std::vector<UMatrix> out;
    for (const auto& l : leaves) out.push_back(by_name.at(l.name));
    return out;
  }
};

std::uint64_t sparse_value(std::mt19937_64& rng, long r) {
  return uniform(rng, 0, 1) ? 0 : static_cast<std::uint64_t>(uniform(rng, 1, r));
}

bool field_defined(const Formula& f, const FieldInputs& in, std::uint64_t p) {
  try {
    oracle::eval_mod_p(f, in.per_leaf(), p);
    return true;
  } catch (const SingularInversion&) {
    return false;
  }
}

Report run_rank(const ScenarioConfig& cfg) {
  Report rep;
  auto t0 = Clock::now();
  std::mt19937_64 rng(cfg.seed);
  Formula f = cfg.formula ? load_formula(cfg, rng, true) : parse("A", Shape{cfg.n, cfg.n});
  DimCheck dc = check_dims(f);
  if (dc.output.rows != dc.output.cols) throw ConfigError("rank needs a square formula");
  FieldInputs in = sample_until(
      [&] {
        FieldInputs x;
        x.leaves = enumerate_leaves(f);
        for (const auto& [name, shape] : f.dims()) {
          UMatrix m(shape.rows, shape.cols, 0);
          for (std::size_t i = 0; i < shape.rows; ++i)
            for (auto& v : m.row(i)) v = sparse_value(rng, cfg.entry_range);
          x.by_name[name] = m;
        }
        return x;
      },
      [&](const FieldInputs& x) { return field_defined(f, x, cfg.p); }, "well-defined field inputs");
  RankState rs(f, in.per_leaf(), cfg.p, cfg.seed);
  auto oracle_rank = [&] {
    return oracle::rank_elimination_mod_p(oracle::eval_mod_p(f, in.per_leaf(), cfg.p), cfg.p);
  };
  bool init_ok = rs.rank() == oracle_rank();
  rep.pass = init_ok;
  std::size_t prev = rs.rank();
  for (std::size_t step = 0; step < cfg.t; ++step) {
    std::string name;
    std::size_t i = 0, j = 0;
    std::uint64_t value = 0;
    sample_until(
        [&] {
          auto it = f.dims().begin();
          std::advance(it, uniform(rng, 0, static_cast<long>(f.dims().size()) - 1));
          name = it->first;
          i = static_cast<std::size_t>(uniform(rng, 0, static_cast<long>(it->second.rows) - 1));
          j = static_cast<std::size_t>(uniform(rng, 0, static_cast<long>(it->second.cols) - 1));
          value = sparse_value(rng, cfg.entry_range);
          FieldInputs next = in;
          next.by_name[name](i, j) = value;
          return next;
        },
        [&](const FieldInputs& x) { return field_defined(f, x, cfg.p); }, "a well-defined field update");
    auto ts = Clock::now();
    std::size_t touched = 0;
    for (const auto& l : in.leaves)
      if (l.name == name) {
        rs.update(l.id, i, j, value);
        ++touched;
      }
    double us = micros_since(ts);
    in.by_name[name](i, j) = value;
    std::size_t truth = oracle_rank();
    std::size_t r = rs.rank();
    std::size_t jump = r > prev ? r - prev : prev - r;
    bool ok = r == truth && jump <= std::max<std::size_t>(touched, 1);
    rep.pass = rep.pass && ok;
    json rec{{"type", "record"}, {"step", step}, {"input", name},  {"i", i},
             {"j", j},           {"value", value}, {"rank", r},     {"oracle", truth},
             {"k", rs.defect()}, {"ok", ok}};
    if (cfg.timing) rec["time_us"] = us;
    rep.records.push_back(std::move(rec));
    prev = r;
  }
  rep.summary = summary_base(cfg, &f);
  rep.summary["initial_ok"] = init_ok;
  rep.summary["p"] = cfg.p;
  rep.summary["tracker"] = rs.snapshot_json();
  finish(rep, cfg, t0, cfg.t);
  return rep;
}

// ---- matching ------------------------------------------------------------------------------

GraphUpdate random_graph_update(std::mt19937_64& rng, const TutteState& ts) {
  std::vector<std::size_t> live;
  for (std::size_t v = 0; v < ts.n(); ++v)
    if (ts.is_representative(v)) live.push_back(v);
  auto pick = [&] { return live[static_cast<std::size_t>(uniform(rng, 0, static_cast<long>(live.size()) - 1))]; };
  auto pick_pair = [&] {
    std::size_t a = pick(), b = pick();
    while (b == a) b = pick();
    return std::make_pair(a, b);
  };
  long roll = uniform(rng, 0, 99);
  if (live.size() < 2) return uniform(rng, 0, 1) ? GraphUpdate::on(live[0]) : GraphUpdate::off(live[0]);
  if (roll < 45) {
    auto [a, b] = pick_pair();
    return GraphUpdate::insert(a, b);
  }
  if (roll < 70) {
    std::vector<std::pair<std::size_t, std::size_t>> present;
    for (std::size_t a : live)
      for (std::size_t b : live)
        if (a < b && ts.has_edge(a, b)) present.emplace_back(a, b);
    if (!present.empty()) {
      auto e = present[static_cast<std::size_t>(uniform(rng, 0, static_cast<long>(present.size()) - 1))];
      return GraphUpdate::remove(e.first, e.second);
    }
    auto [a, b] = pick_pair();
    return GraphUpdate::remove(a, b);
  }
  if (roll < 85) return GraphUpdate::off(pick());
  if (roll < 96 || live.size() < 3) return GraphUpdate::on(pick());
  auto [a, b] = pick_pair();
  return GraphUpdate::merge(a, b);
}

Report run_matching(const ScenarioConfig& cfg) {
  if (cfg.n > 12) throw ConfigError("matching oracle supports n <= 12");
  Report rep;
  auto t0 = Clock::now();
  std::mt19937_64 rng(cfg.seed);
  TutteState ts(cfg.n, cfg.p, cfg.seed);
  oracle::Graph g(cfg.n);
  std::size_t steps = cfg.graph_ops.empty() ? cfg.t : cfg.graph_ops.size();
  for (std::size_t step = 0; step < steps; ++step) {
    GraphUpdate up = cfg.graph_ops.empty() ? random_graph_update(rng, ts) : parse_graph_update(cfg.graph_ops[step]);
    auto ts0 = Clock::now();
    std::size_t size = ts.apply(up);
    double us = micros_since(ts0);
    switch (up.kind) {
      case GraphUpdate::Kind::Insert: g.insert(up.u, up.v); break;
      case GraphUpdate::Kind::Remove: g.remove(up.u, up.v); break;
      case GraphUpdate::Kind::On: g.active[up.u] = true; break;
      case GraphUpdate::Kind::Off: g.active[up.u] = false; break;
      case GraphUpdate::Kind::Merge: g.merge(up.u, up.v); break;
    }
    std::size_t truth = oracle::max_matching_bruteforce(g);
    std::size_t rank = ts.tutte_rank();
    bool ok = size == truth && rank % 2 == 0;
    rep.pass = rep.pass && ok;
    json rec{{"type", "record"}, {"step", step},   {"op", to_string(up)}, {"size", size},
             {"oracle", truth},  {"rank", rank},   {"ok", ok}};
    if (cfg.timing) rec["time_us"] = us;
    rep.records.push_back(std::move(rec));
  }
  rep.summary = summary_base(cfg, nullptr);
  rep.summary["n"] = cfg.n;
  rep.summary["final_size"] = ts.matching_size();
  rep.summary["tracker"] = ts.rank_state().snapshot_json();
  finish(rep, cfg, t0, steps);
  return rep;
}

}  // namespace

// ---- public entry points --------------------------------------------------------------

std::optional<double> fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2) return std::nullopt;
  double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0) return std::nullopt;
  return sxy / sxx;
}

Report bits_sweep(const ScenarioConfig& cfg, const std::vector<unsigned>& b_list) {
  if (cfg.ring != "fixed") throw ConfigError("bits-sweep needs the fixed ring");
  if (b_list.empty()) throw ConfigError("b_list is empty");
  if (!std::is_sorted(b_list.begin(), b_list.end()) ||
      std::adjacent_find(b_list.begin(), b_list.end()) != b_list.end())
    throw ConfigError("b_list must be strictly ascending");
  Report rep;
  auto t0 = Clock::now();
  ScenarioConfig inner = cfg;
  inner.scenario = "maintain";
  inner.certified = false;
  if (!inner.formula) inner.formula = "inv(A)";
  std::vector<double> xs, ys;
  bool monotone = true;
  double prev = -1;
  std::string formula_text;
  for (unsigned b : b_list) {
    inner.bits = b;
    Report r = run_maintain(inner);
    formula_text = r.summary.value("formula", "");
    double err = r.summary["max_abs_err"].get<double>();
    if (prev >= 0 && err > prev) monotone = false;
    prev = err;
    json rec{{"type", "record"}, {"bits", b}, {"max_abs_err", err}};
    if (err > 0) {
      rec["log2_err"] = std::log2(err);
      xs.push_back(b);
      ys.push_back(std::log2(err));
    } else {
      rec["log2_err"] = nullptr;
    }
    if (cfg.timing && r.summary.contains("elapsed_s")) rec["elapsed_s"] = r.summary["elapsed_s"];
    rep.records.push_back(std::move(rec));
  }
  auto slope = fit_slope(xs, ys);
  rep.summary = summary_base(cfg, nullptr);
  rep.summary["formula"] = formula_text;
  rep.summary["b_list"] = b_list;
  rep.summary["monotone"] = monotone;
  rep.summary["slope"] = slope ? json(*slope) : json(nullptr);
  rep.summary["slope_max"] = cfg.slope_max;
  rep.pass = monotone && (!slope || *slope <= cfg.slope_max);
  finish(rep, cfg, t0, b_list.size());
  return rep;
}

Report run_scenario(const ScenarioConfig& cfg) {
  if (cfg.scenario == "maintain") return run_maintain(cfg);
  if (cfg.scenario == "determinant") return run_determinant(cfg);
  if (cfg.scenario == "rank") return run_rank(cfg);
  if (cfg.scenario == "matching") return run_matching(cfg);
  if (cfg.scenario == "bits-sweep") {
    std::vector<unsigned> bl = cfg.b_list.empty() ? std::vector<unsigned>{16, 24, 32, 48, 64} : cfg.b_list;
    return bits_sweep(cfg, bl);
  }
  throw ConfigError("unknown scenario '" + cfg.scenario + "'");
}

void write_jsonl(const Report& r, std::ostream& out) {
  for (const auto& rec : r.records) out << rec.dump() << '\n';
  out << r.summary.dump() << '\n';
}

namespace {
std::string csv_cell(const json& v) {
  std::string s = v.is_string() ? v.get<std::string>() : v.dump();
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}
}  // namespace

void write_csv(const Report& r, std::ostream& out) {
  std::vector<std::string> cols;
  for (const auto& rec : r.records)
    for (const auto& [k, v] : rec.items())
      if (std::find(cols.begin(), cols.end(), k) == cols.end()) cols.push_back(k);
  for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
  out << '\n';
  for (const auto& rec : r.records) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (c) out << ',';
      if (rec.contains(cols[c])) out << csv_cell(rec.at(cols[c]));
    }
    out << '\n';
  }
}

json strip_timing(const json& j) {
  if (j.is_object()) {
    json out = json::object();
    for (const auto& [k, v] : j.items()) {
      if (k == "time_us" || k == "elapsed_s" || k == "throughput") continue;
      out[k] = strip_timing(v);
    }
    return out;
  }
  if (j.is_array()) {
    json out = json::array();
    for (const auto& v : j) out.push_back(strip_timing(v));
    return out;
  }
  return j;
}

}  // namespace formulads
