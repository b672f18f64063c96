// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "formulads/construct.hpp"
#include "formulads/dyninv.hpp"
#include "formulads/errors.hpp"
#include "formulads/oracle.hpp"
#include "formulads/scenario.hpp"

using namespace formulads;
using QM = Matrix<Rational>;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

long uniform(std::mt19937_64& rng, long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng); }

QM random_int(std::mt19937_64& rng, std::size_t r, std::size_t c, long range) {
  QM m(r, c, Rational(0));
  for (std::size_t i = 0; i < r; ++i)
    for (auto& v : m.row(i)) v = uniform(rng, -range, range);
  return m;
}

Rational frob2(const QM& m) {
  Rational s = 0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (const auto& v : m.row(i)) s += v * v;
  return s;
}

Rational pow_q(const Rational& x, std::size_t e) {
  Rational r = 1;
  for (std::size_t k = 0; k < e; ++k) r *= x;
  return r;
}

// Random formula with integer inputs on which every inversion is defined.
struct Instance {
  Formula f;
  std::vector<QM> inputs;
};

Instance random_instance(std::mt19937_64& rng) {
  for (;;) {
    Formula f = random_formula(rng, GeneratorParams{6, 4, 0});
    auto leaves = enumerate_leaves(f);
    for (int tries = 0; tries < 50; ++tries) {
      std::map<std::string, QM> by_name;
      for (const auto& [name, shape] : f.dims()) by_name[name] = random_int(rng, shape.rows, shape.cols, 3);
      std::vector<QM> in;
      for (const auto& l : leaves) in.push_back(by_name[l.name]);
      try {
        oracle::eval_exact(f, in);
        return {f, in};
      } catch (const SingularInversion&) {
      }
    }
  }
}

std::vector<Instance> corpus(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Instance> out;
  for (std::size_t k = 0; k < count; ++k) out.push_back(random_instance(rng));
  return out;
}

// ---- 1: reduction correctness -----------------------------------------------------
Outcome reduction(const std::vector<Instance>& c) {
  std::size_t failures = 0;
  for (const auto& inst : c) {
    auto cons = build(RationalRing{}, inst.f, inst.inputs);
    QM got = select_block(oracle::inv_exact(cons.N), cons.I, cons.J);
    if (!(got == oracle::eval_exact(inst.f, inst.inputs))) ++failures;
  }
  return {failures == 0, std::to_string(c.size()) + " formulas, " + std::to_string(failures) + " failures"};
}

// ---- 2: determinant ratio identity --------------------------------------------------
Outcome det_identity(const std::vector<Instance>& c) {
  std::size_t checked = 0, failures = 0;
  for (const auto& inst : c) {
    std::vector<QM> inv_inputs;
    QM value = oracle::eval_exact(inst.f, inst.inputs, inv_inputs);
    auto cons = build(RationalRing{}, inst.f, inst.inputs);
    Rational det_n = oracle::det_bareiss(cons.N);
    Rational prod = 1;
    for (const auto& m : inv_inputs) prod *= abs(oracle::det_bareiss(m));
    if (abs(det_n) != prod) ++failures;
    if (value.rows() != value.cols()) continue;
    Rational det_f = oracle::det_bareiss(value);
    if (sgn(det_f) == 0) continue;
    ++checked;
    auto hat = build_hat(RationalRing{}, cons);
    if (oracle::det_bareiss(hat.Nhat) != det_n * det_f) ++failures;
  }
  return {failures == 0 && checked > 0,
          std::to_string(checked) + " square invertible outputs, " + std::to_string(failures) + " failures"};
}

// ---- 3: norm bounds ---------------------------------------------------------------------
Outcome norm_bounds(const std::vector<Instance>& c) {
  std::size_t violations = 0;
  for (const auto& inst : c) {
    std::vector<QM> inv_inputs;
    oracle::eval_exact(inst.f, inst.inputs, inv_inputs);
    // smallest integer kappa meeting the promises
    Rational need2 = 4;
    for (const auto& [name, shape] : inst.f.dims()) {
      Rational side = static_cast<long>(shape.rows + shape.cols);
      need2 = std::max(need2, Rational(side * side));
    }
    for (const auto& m : inst.inputs) need2 = std::max(need2, frob2(m));
    for (const auto& m : inv_inputs) need2 = std::max(need2, frob2(oracle::inv_exact(m)));
    long kappa = static_cast<long>(std::floor(std::sqrt(need2.get_d())));
    while (Rational(kappa * kappa) < need2) ++kappa;
    while (kappa > 2 && Rational((kappa - 1) * (kappa - 1)) >= need2) --kappa;

    auto cons = build(RationalRing{}, inst.f, inst.inputs);
    QM inv = oracle::inv_exact(cons.N);
    NormBudget b = norm_budget(inst.f.gate_count(), Rational(kappa));
    Rational bound_n = std::max<Rational>(b.bound_N, b.bound_N_alt);
    QM rows(cons.I.size(), inv.cols(), Rational(0)), cols(inv.rows(), cons.J.size(), Rational(0));
    for (std::size_t a = 0; a < cons.I.size(); ++a)
      for (std::size_t j = 0; j < inv.cols(); ++j) rows(a, j) = inv(cons.I[a], j);
    for (std::size_t i = 0; i < inv.rows(); ++i)
      for (std::size_t a = 0; a < cons.J.size(); ++a) cols(i, a) = inv(i, cons.J[a]);
    bool ok = frob2(cons.N) <= bound_n * bound_n && frob2(inv) <= b.bound_Ninv * b.bound_Ninv &&
              frob2(rows) <= b.bound_rowblock * b.bound_rowblock &&
              frob2(cols) <= b.bound_rowblock * b.bound_rowblock;
    if (!ok) ++violations;
  }
  return {violations == 0, std::to_string(c.size()) + " formulas, " + std::to_string(violations) + " violations"};
}

// ---- 4: dynamic inverse accuracy -----------------------------------------------------
template <class Ring>
double engine_error(const Ring& ring, const InverseEngine<Ring>& e, const QM& truth) {
  double worst = 0;
  for (std::size_t i = 0; i < truth.rows(); ++i)
    for (std::size_t j = 0; j < truth.cols(); ++j)
      worst = std::max(worst, std::fabs(Rational(ring.to_rational(e.query(i, j)) - truth(i, j)).get_d()));
  return worst;
}

Outcome inverse_accuracy() {
  const std::size_t n = 16, t = 16;
  const double eps = 1e-6;
  std::size_t failures = 0;
  double worst = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    std::mt19937_64 rng(seed);
    QM z = random_int(rng, n, n, 5);
    while (sgn(oracle::det_bareiss(z)) == 0) z = random_int(rng, n, n, 5);
    Float64Ring fr;
    FixedRing fx{96};
    std::vector<InverseEngine<Float64Ring>> fe;
    std::vector<InverseEngine<FixedRing>> xe;
    for (auto kind : {EngineKind::Explicit, EngineKind::Lazy, EngineKind::TwoLevel}) {
      EngineParams p = default_params(kind);
      p.eps_step = eps / (2.0 * t);
      fe.emplace_back(fr, convert(fr, z), p);
      xe.emplace_back(fx, convert(fx, z), p);
    }
    for (std::size_t step = 0; step < t; ++step) {
      std::size_t i, j;
      long d;
      for (;;) {
        i = static_cast<std::size_t>(uniform(rng, 0, n - 1));
        j = static_cast<std::size_t>(uniform(rng, 0, n - 1));
        d = uniform(rng, -3, 3);
        if (d == 0) continue;
        z(i, j) += d;
        if (sgn(oracle::det_bareiss(z)) != 0) break;
        z(i, j) -= d;
      }
      for (auto& e : fe) e.update_entry(i, j, static_cast<double>(d));
      for (auto& e : xe) e.update_entry(i, j, fx.from_int(d));
      QM truth = oracle::inv_exact(z);
      for (auto& e : fe) {
        double err = engine_error(fr, e, truth);
        worst = std::max(worst, err);
        if (err > eps) ++failures;
      }
      for (auto& e : xe) {
        double err = engine_error(fx, e, truth);
        worst = std::max(worst, err);
        if (err > eps) ++failures;
      }
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "50 seeds x 3 engines x 2 rings, max error %.3g, %zu failures", worst, failures);
  return {failures == 0, buf};
}

// ---- 5: determinant maintenance ----------------------------------------------------------
Outcome det_maintenance() {
  std::size_t failures = 0;
  double worst = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    for (bool fixed : {false, true}) {
      nlohmann::json j{{"scenario", "determinant"}, {"n", 2 + seed % 15}, {"t", 16},   {"s_max", 5},
                       {"dim_max", 4},              {"eps", 1e-3},        {"seed", seed}, {"timing", false}};
      if (fixed) {
        j["ring"] = "fixed";
        j["precision"] = "certified";
      } else {
        j["ring"] = "float64";
      }
      Report r = run_scenario(parse_config(j));
      worst = std::max(worst, r.summary["max_rel_err"].get<double>());
      if (!r.pass) ++failures;
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "50 seeds x {float64, certified fixed}, max rel error %.3g, %zu failing runs", worst,
                failures);
  return {failures == 0, buf};
}

// ---- 6: perturbation bounds ----------------------------------------------------------------
Outcome perturbation() {
  std::mt19937_64 rng(6);
  std::size_t failures = 0, done = 0;
  while (done < 500) {
    QM a = random_int(rng, 4, 4, 5), x = random_int(rng, 4, 4, 5);
    Rational det_a = oracle::det_bareiss(a);
    if (sgn(det_a) == 0) continue;
    double eps = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    ++done;
    try {
      auto b = oracle::det_perturbation_bounds(a, x, eps);
      QM shifted = a;
      for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) shifted(i, j) += b.epshat_exact * x(i, j);
      Rational det = oracle::det_bareiss(shifted);
      bool ok = sgn(det) == sgn(det_a) && b.lower_exact <= abs(det) && abs(det) <= b.upper_exact;
      if (!ok) ++failures;
    } catch (const Error&) {
      ++failures;
    }
  }
  return {failures == 0, "500 instances, " + std::to_string(failures) + " failures"};
}

// ---- 7: forward-backward error -------------------------------------------------------------------
Outcome forward_backward() {
  std::mt19937_64 rng(7);
  std::size_t failures = 0, done = 0;
  while (done < 500) {
    std::size_t n = static_cast<std::size_t>(uniform(rng, 2, 6));
    QM nm = random_int(rng, n, n, 4);
    if (sgn(oracle::det_bareiss(nm)) == 0) continue;
    ++done;
    QM ninv = oracle::inv_exact(nm);
    Rational kappa2 = std::max(frob2(nm), frob2(ninv));  // kappa > 1 since ||N||_F ||N^-1||_F >= n
    QM e = random_int(rng, n, n, 3);
    Rational s = frob2(e);
    if (sgn(s) == 0) e(0, 0) = 1, s = 1;
    // scale E by 1/m with m^2 >= 4 kappa^2 ||E||^2, so that ||E||_F <= 1/(2 kappa)
    Rational q = 4 * kappa2 * s;
    long m = static_cast<long>(std::ceil(std::sqrt(q.get_d()))) + uniform(rng, 0, 5);
    while (Rational(m) * m < q) ++m;
    for (std::size_t i = 0; i < n; ++i)
      for (auto& v : e.row(i)) v /= m;
    Rational eps2 = frob2(e);
    QM sum = nm;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) sum(i, j) += e(i, j);
    try {
      QM diff = oracle::inv_exact(sum);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) diff(i, j) -= ninv(i, j);
      // ||diff||^2 <= (2 kappa^2 eps)^2
      if (frob2(diff) > 4 * kappa2 * kappa2 * eps2) ++failures;
    } catch (const SingularMatrix&) {
      ++failures;
    }
  }
  return {failures == 0, "500 instances, " + std::to_string(failures) + " failures"};
}

// ---- 8, 9, 10: scenarios driven through the harness ---------------------------------------------
Outcome rank_maintenance() {
  std::size_t failures = 0, checks = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    nlohmann::json j{{"scenario", "rank"}, {"n", 1 + seed % 8}, {"t", 50}, {"seed", seed}, {"timing", false}};
    Report r = run_scenario(parse_config(j));
    for (const auto& rec : r.records) {
      ++checks;
      if (!rec["ok"].get<bool>()) ++failures;
    }
    if (!r.summary["initial_ok"].get<bool>()) ++failures;
  }
  return {failures == 0, std::to_string(checks) + " updates, " + std::to_string(failures) + " failures"};
}

Outcome matching() {
  std::size_t failures = 0, odd = 0, checks = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    nlohmann::json j{{"scenario", "matching"}, {"n", 2 + seed % 9}, {"t", 200}, {"seed", seed}, {"timing", false}};
    Report r = run_scenario(parse_config(j));
    for (const auto& rec : r.records) {
      ++checks;
      if (rec["size"] != rec["oracle"]) ++failures;
      if (rec["rank"].get<std::size_t>() % 2 != 0) ++odd;
    }
  }
  return {failures == 0 && odd == 0, std::to_string(checks) + " ops, " + std::to_string(failures) +
                                         " size mismatches, " + std::to_string(odd) + " odd ranks"};
}

Outcome bit_precision() {
  nlohmann::json j{{"scenario", "bits-sweep"}, {"formula", "inv(A)"}, {"n", 8}, {"t", 8}, {"seed", 10}};
  ScenarioConfig cfg = parse_config(j);
  Report r = bits_sweep(cfg, {16, 24, 32, 48, 64});
  std::string errs;
  for (const auto& rec : r.records) {
    char b[48];
    std::snprintf(b, sizeof b, "%s%u:%.2g", errs.empty() ? "" : " ", rec["bits"].get<unsigned>(),
                  rec["max_abs_err"].get<double>());
    errs += b;
  }
  char buf[256];
  double slope = r.summary["slope"].is_null() ? NAN : r.summary["slope"].get<double>();
  std::snprintf(buf, sizeof buf, "errors {%s}, slope %.3f, monotone %s", errs.c_str(), slope,
                r.summary["monotone"].get<bool>() ? "yes" : "no");
  return {r.pass, buf};
}

}  // namespace

int main() {
  using Clock = std::chrono::steady_clock;
  std::vector<Instance> c;
  double corpus_s = 0;
  {
    auto t0 = Clock::now();
    c = corpus(200, 2024);
    corpus_s = std::chrono::duration<double>(Clock::now() - t0).count();
  }
  struct Criterion {
    int id;
    const char* name;
    double limit_s;  // 0 = no runtime limit
    std::function<Outcome()> run;
  };
  std::vector<Criterion> all = {
      {1, "reduction correctness", 60, [&] { return reduction(c); }},
      {2, "determinant ratio identity", 0, [&] { return det_identity(c); }},
      {3, "norm bounds", 0, [&] { return norm_bounds(c); }},
      {4, "dynamic inverse accuracy", 120, inverse_accuracy},
      {5, "determinant maintenance", 0, det_maintenance},
      {6, "perturbation bounds", 0, perturbation},
      {7, "forward-backward error", 0, forward_backward},
      {8, "rank maintenance", 0, rank_maintenance},
      {9, "dynamic matching", 0, matching},
      {10, "bit-precision behavior", 60, bit_precision},
  };
  int failed = 0;
  for (const auto& cr : all) {
    auto t0 = Clock::now();
    Outcome o;
    try {
      o = cr.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (cr.id == 1) secs += corpus_s;
    bool in_time = cr.limit_s == 0 || secs <= cr.limit_s;
    bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::printf("criterion %2d %-28s %s  %s  [%.1fs%s]\n", cr.id, cr.name, pass ? "PASS" : "FAIL", o.detail.c_str(),
                secs, in_time ? "" : ", over time limit");
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
