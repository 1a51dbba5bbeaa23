#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "proxkit/checks.hpp"
#include "proxkit/contraction.hpp"
#include "proxkit/dynamics.hpp"
#include "proxkit/function.hpp"
#include "proxkit/metric.hpp"
#include "proxkit/minimizers.hpp"
#include "proxkit/parse.hpp"
#include "proxkit/prox.hpp"
#include "proxkit/report.hpp"

namespace proxkit {

inline constexpr std::uint64_t kDefaultSeed = 0x9e3779b97f4a7c15ull;
inline constexpr const char* kToolVersion = "0.1.0";

struct RunOptions {
  bool has_seed_override = false;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct RunOutcome {
  std::vector<nlohmann::json> records;
  std::vector<nlohmann::json> experiments;  // {label, kind} per experiment
  int failures = 0;

  bool all_passed() const { return failures == 0; }
};

namespace detail {

using nlohmann::json;

struct ExpContext {
  ProbeSpec probe;
  std::uint64_t seed = 0;
  bool execute = true;
  std::string label;
  std::vector<json>* records = nullptr;
  int* failures = nullptr;
};

inline void emit(const ExpContext& ctx, json j, bool pass) {
  j["experiment"] = ctx.label;
  j["pass"] = pass;
  if (!pass) ++*ctx.failures;
  ctx.records->push_back(std::move(j));
}

inline double opt_number(const json& j, const std::string& key, double fallback,
                         const std::string& where) {
  if (!j.contains(key)) return fallback;
  return get_number(j, key, where);
}

inline int opt_int(const json& j, const std::string& key, int fallback,
                   const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) config_fail(where, "\"" + key + "\" must be an integer");
  return j.at(key).get<int>();
}

inline bool opt_bool(const json& j, const std::string& key, bool fallback,
                     const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_boolean()) config_fail(where, "\"" + key + "\" must be a boolean");
  return j.at(key).get<bool>();
}

inline std::vector<double> get_numbers(const json& j, const std::string& key,
                                       const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_array() || j.at(key).empty()) {
    config_fail(where, "\"" + key + "\" must be a nonempty array of numbers");
  }
  std::vector<double> out;
  for (const json& v : j.at(key)) {
    if (!v.is_number()) config_fail(where, "\"" + key + "\" must contain numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

inline std::vector<ConvexFunction> get_functions(const json& j, const std::string& where) {
  if (!j.contains("functions") || !j.at("functions").is_array() || j.at("functions").empty()) {
    config_fail(where, "\"functions\" must be a nonempty array");
  }
  std::vector<ConvexFunction> fns;
  int i = 0;
  for (const json& fj : j.at("functions")) {
    fns.push_back(function_from_json(fj, where + ".functions[" + std::to_string(i) + "]"));
    ++i;
  }
  return fns;
}

inline ConvexFunction get_function(const json& j, const std::string& where) {
  if (!j.contains("function")) config_fail(where, "missing key \"function\"");
  return function_from_json(j.at("function"), where + ".function");
}

inline ProbeVerdict verdict_from_string(const std::string& s, const std::string& where) {
  if (s == "positive") return ProbeVerdict::Positive;
  if (s == "negative") return ProbeVerdict::Negative;
  if (s == "inconclusive") return ProbeVerdict::Inconclusive;
  config_fail(where, "verdict must be positive, negative or inconclusive");
}

// ---- experiment kinds ----

inline void run_metric_table(const json& j, const ExpContext& ctx, const std::string& where) {
  reject_unknown_keys(j, {"kind", "name", "functions", "verify_axioms", "same_class_tol",
                          "triangle_tol"},
                      where);
  const std::vector<ConvexFunction> fns = get_functions(j, where);
  for (const ConvexFunction& f : fns) {
    if (f.dim() != fns.front().dim()) {
      config_fail(where, "all functions in a metric table must share one dimension");
    }
  }
  const bool verify = opt_bool(j, "verify_axioms", false, where);
  const double same_class_tol = opt_number(j, "same_class_tol", 5e-3, where);
  const double triangle_tol = opt_number(j, "triangle_tol", 1e-6, where);
  if (!ctx.execute) return;

  std::vector<OperatorHandle> ops;
  for (const ConvexFunction& f : fns) ops.push_back(prox_operator(f));
  for (std::size_t a = 0; a < fns.size(); ++a) {
    for (std::size_t b = a + 1; b < fns.size(); ++b) {
      const MetricEstimate est = operator_metric(ops[a], ops[b], ctx.probe);
      emit(ctx,
           json{{"record", "metric"},
                {"i", a},
                {"j", b},
                {"f", describe(fns[a])},
                {"g", describe(fns[b])},
                {"lower", est.lower()},
                {"upper", est.upper()},
                {"heuristic", est.heuristic}},
           true);
    }
  }
  if (verify) {
    const AxiomReport rep = verify_metric_axioms(fns, ctx.probe, same_class_tol);
    emit(ctx,
         json{{"record", "axioms"},
              {"identity_ok", rep.identity_ok},
              {"symmetry_ok", rep.symmetry_ok},
              {"triangle_min_margin", rep.triangle_min_margin},
              {"min_distinct_lower", rep.min_distinct_lower},
              {"max_same_class_upper", rep.max_same_class_upper},
              {"separation_ok", rep.separation_ok}},
         rep.passed(triangle_tol));
  }
}

inline void run_perturbation_sweep(const json& j, const ExpContext& ctx,
                                   const std::string& where) {
  reject_unknown_keys(j, {"kind", "name", "function", "sigmas", "eps", "sup_samples",
                          "sup_radius", "check_numeric", "identity_tol", "numeric_tol"},
                      where);
  const ConvexFunction f = get_function(j, where);
  std::vector<double> sigmas, eps_list;
  if (j.contains("sigmas")) sigmas = get_numbers(j, "sigmas", where);
  if (j.contains("eps")) eps_list = get_numbers(j, "eps", where);
  for (const double s : sigmas) {
    if (!(s > 0.0 && s < 1.0)) config_fail(where, "sigmas must lie strictly in (0,1)");
  }
  for (const double e : eps_list) {
    if (!(e > 0.0)) config_fail(where, "eps values must be > 0");
  }
  const int sup_samples = opt_int(j, "sup_samples", 1000, where);
  const double sup_radius = opt_number(j, "sup_radius", 10.0, where);
  const bool check_numeric = opt_bool(j, "check_numeric", false, where);
  const double identity_tol = opt_number(j, "identity_tol", 1e-8, where);
  const double numeric_tol = opt_number(j, "numeric_tol", 1e-5, where);
  if (!ctx.execute) return;

  SeededRng rng(mix_seed(ctx.seed, 1));
  std::vector<Vector> xs;
  xs.reserve(static_cast<std::size_t>(sup_samples));
  for (int s = 0; s < sup_samples; ++s) xs.push_back(rng.in_ball(f.dim(), sup_radius));

  const ProxOperator Pf(f, 1.0);
  for (const double sigma : sigmas) {
    const ConvexFunction g = perturb(f, sigma);
    const ProxOperator Pg(g, 1.0);
    double sup_closed = 0.0;
    for (const Vector& x : xs) {
      sup_closed = std::max(sup_closed, (Pg(x) - (1.0 - sigma) * Pf(x)).norm());
    }
    json rec{{"record", "perturbation"},
             {"sigma", sigma},
             {"sup_gap_closed", sup_closed}};
    bool pass = sup_closed <= identity_tol;
    if (check_numeric) {
      ProxOptions popts;
      popts.force_numeric = true;
      const ProxOperator Pg_num(g, 1.0, popts);
      double sup_numeric = 0.0;
      for (const Vector& x : xs) {
        sup_numeric = std::max(sup_numeric, (Pg_num(x) - (1.0 - sigma) * Pf(x)).norm());
      }
      rec["sup_gap_numeric"] = sup_numeric;
      pass = pass && sup_numeric <= numeric_tol;
    }
    const MetricEstimate est = metric(f, g, ctx.probe);
    rec["d_lower"] = est.lower();
    rec["d_upper"] = est.upper();
    emit(ctx, std::move(rec), pass);
  }

  for (const double eps : eps_list) {
    const SigmaChoice choice = choose_sigma(f, eps, ctx.probe.shells);
    const MetricEstimate est = metric(f, perturb(f, choice.sigma), ctx.probe);
    emit(ctx,
         json{{"record", "sigma_choice"},
              {"eps", eps},
              {"sigma", choice.sigma},
              {"m_bound", choice.m},
              {"predicted_upper", choice.predicted_upper},
              {"realized_lower", est.lower()},
              {"realized_upper", est.upper()}},
         est.upper() < eps);
  }
}

inline void run_dynamics(const json& j, const ExpContext& ctx, const std::string& where) {
  reject_unknown_keys(j, {"kind", "name", "functions", "radius", "expect", "tol",
                          "spread_factor", "starts", "max_steps"},
                      where);
  const std::vector<ConvexFunction> fns = get_functions(j, where);
  const double radius = opt_number(j, "radius", 1.0, where);
  if (!(radius > 0.0)) config_fail(where, "\"radius\" must be > 0");
  DynamicsOptions dopts;
  dopts.tol = opt_number(j, "tol", dopts.tol, where);
  dopts.spread_factor = opt_number(j, "spread_factor", dopts.spread_factor, where);
  dopts.starts = opt_int(j, "starts", dopts.starts, where);
  dopts.max_steps = opt_int(j, "max_steps", dopts.max_steps, where);
  std::vector<ProbeVerdict> expected;
  if (j.contains("expect")) {
    if (!j.at("expect").is_array() || j.at("expect").size() != fns.size()) {
      config_fail(where, "\"expect\" must list one verdict per function");
    }
    for (const json& e : j.at("expect")) {
      if (!e.is_string()) config_fail(where, "\"expect\" entries must be strings");
      expected.push_back(verdict_from_string(e.get<std::string>(), where));
    }
  }
  if (!ctx.execute) return;

  for (std::size_t i = 0; i < fns.size(); ++i) {
    const SuperRegularityReport rep =
        super_regularity_probe(prox_operator(fns[i]), radius, dopts);
    json rec{{"record", "dynamics"},
             {"f", describe(fns[i])},
             {"verdict", to_string(rep.verdict)},
             {"spread", rep.spread},
             {"num_converged", rep.num_converged}};
    if (rep.verdict == ProbeVerdict::Positive) {
      rec["limit"] = vector_to_json(rep.representative);
      const MinimizerInfo mi = minimizer_info(fns[i]);
      if (mi.unique()) rec["minimizer_gap"] = (rep.representative - mi.point).norm();
    }
    const bool pass = expected.empty() || rep.verdict == expected[i];
    emit(ctx, std::move(rec), pass);
  }
}

inline void run_checks(const json& j, const ExpContext& ctx, const std::string& where) {
  reject_unknown_keys(j, {"kind", "name", "functions", "lambdas", "samples", "cycles",
                          "max_cycle_len", "radius", "include_counterexample", "firm_tol",
                          "cycle_tol", "resolvent_tol"},
                      where);
  const std::vector<ConvexFunction> fns = get_functions(j, where);
  std::vector<double> lambdas{1.0};
  if (j.contains("lambdas")) lambdas = get_numbers(j, "lambdas", where);
  for (const double l : lambdas) {
    if (!(l > 0.0)) config_fail(where, "lambdas must be > 0");
  }
  CheckSpec cs;
  cs.samples = opt_int(j, "samples", cs.samples, where);
  cs.cycles = opt_int(j, "cycles", cs.cycles, where);
  cs.max_cycle_len = opt_int(j, "max_cycle_len", cs.max_cycle_len, where);
  cs.radius = opt_number(j, "radius", cs.radius, where);
  const bool counterexample = opt_bool(j, "include_counterexample", false, where);
  const double firm_tol = opt_number(j, "firm_tol", 1e-9, where);
  const double cycle_tol = opt_number(j, "cycle_tol", 1e-9, where);
  const double resolvent_tol = opt_number(j, "resolvent_tol", 1e-8, where);
  if (!ctx.execute) return;

  cs.seed = mix_seed(ctx.seed, 2);
  for (const ConvexFunction& f : fns) {
    const OperatorHandle T = prox_operator(f);
    const PairCheckReport firm = check_firmly_nonexpansive(T, cs);
    const CycleCheckReport cyc = check_cycle_inequality(T, cs);
    emit(ctx,
         json{{"record", "operator_check"},
              {"f", describe(f)},
              {"firm_min_margin", firm.min_margin},
              {"cycle_min_margin", cyc.min_margin}},
         firm.passed(firm_tol) && cyc.passed(cycle_tol));
    for (const double lambda : lambdas) {
      const ResolventCheckReport res = check_resolvent_identity(f, lambda, cs);
      emit(ctx,
           json{{"record", "resolvent_check"},
                {"f", describe(f)},
                {"lambda", lambda},
                {"forward_gap", res.max_forward_gap},
                {"inverse_gap", res.max_inverse_gap}},
           res.max_gap() <= resolvent_tol);
    }
  }
  if (counterexample) {
    const OperatorHandle T = rotation_resolvent();
    const PairCheckReport firm = check_firmly_nonexpansive(T, cs);
    const CycleCheckReport cyc = check_cycle_inequality(T, cs);
    json witness = json::array();
    for (const Vector& p : cyc.worst_cycle) witness.push_back(vector_to_json(p));
    // Passing here means the separation shows: firmly nonexpansive, yet a
    // cycle sum goes genuinely negative.
    emit(ctx,
         json{{"record", "counterexample"},
              {"operator", T.name},
              {"firm_min_margin", firm.min_margin},
              {"cycle_min_margin", cyc.min_margin},
              {"witness_cycle", witness}},
         firm.passed(firm_tol) && cyc.min_margin < -1e-3);
  }
}

inline void run_stability(const json& j, const ExpContext& ctx, const std::string& where) {
  reject_unknown_keys(j, {"kind", "name", "function", "sigma", "radius", "eps", "max_n0",
                          "tol", "starts", "max_steps"},
                      where);
  const ConvexFunction f = get_function(j, where);
  const double sigma = get_number(j, "sigma", where);
  if (!(sigma > 0.0 && sigma < 1.0)) config_fail(where, "\"sigma\" must lie in (0,1)");
  const double radius = opt_number(j, "radius", 2.0, where);
  const double eps = opt_number(j, "eps", 1e-2, where);
  if (!(radius > 0.0) || !(eps > 0.0)) config_fail(where, "radius and eps must be > 0");
  const int max_n0 = opt_int(j, "max_n0", -1, where);
  DynamicsOptions dopts;
  dopts.tol = opt_number(j, "tol", dopts.tol, where);
  dopts.starts = opt_int(j, "starts", dopts.starts, where);
  dopts.max_steps = opt_int(j, "max_steps", dopts.max_steps, where);
  if (!ctx.execute) return;

  const SuperRegularityReport base = super_regularity_probe(prox_operator(f), radius, dopts);
  if (base.verdict != ProbeVerdict::Positive) {
    emit(ctx,
         json{{"record", "stability"},
              {"f", describe(f)},
              {"sigma", sigma},
              {"eps", eps},
              {"note", "base dynamics are not super-regular on this ball; no target"},
              {"base_verdict", to_string(base.verdict)}},
         false);
    return;
  }
  const StabilityReport rep = stability_probe(prox_operator(perturb(f, sigma)),
                                              base.representative, radius, eps, dopts);
  const bool pass = rep.verdict == ProbeVerdict::Positive && (max_n0 < 0 || rep.n0 <= max_n0);
  emit(ctx,
       json{{"record", "stability"},
            {"f", describe(f)},
            {"sigma", sigma},
            {"eps", eps},
            {"n0", rep.n0},
            {"worst_limit_gap", rep.worst_limit_gap},
            {"target", vector_to_json(base.representative)},
            {"verdict", to_string(rep.verdict)}},
       pass);
}

inline RunOutcome run_impl(const json& config, const RunOptions& opts, bool execute) {
  if (!config.is_object()) throw ConfigError("config: expected a JSON object");
  reject_unknown_keys(config, {"name", "seed", "metric", "experiments"}, "config");

  std::uint64_t seed = kDefaultSeed;
  if (config.contains("seed")) {
    if (!config.at("seed").is_number_unsigned() && !config.at("seed").is_number_integer()) {
      config_fail("config", "\"seed\" must be an integer");
    }
    seed = config.at("seed").get<std::uint64_t>();
  }
  if (opts.has_seed_override) seed = opts.seed;

  ProbeSpec probe;
  probe.threads = opts.threads;
  if (config.contains("metric")) {
    const json& m = config.at("metric");
    reject_unknown_keys(m, {"shells", "mesh_step", "samples_per_radius"}, "config.metric");
    probe.shells = opt_int(m, "shells", probe.shells, "config.metric");
    probe.mesh_step = opt_number(m, "mesh_step", probe.mesh_step, "config.metric");
    probe.samples_per_radius =
        opt_int(m, "samples_per_radius", probe.samples_per_radius, "config.metric");
    if (probe.shells < 1) config_fail("config.metric", "\"shells\" must be >= 1");
    if (!(probe.mesh_step > 0.0)) config_fail("config.metric", "\"mesh_step\" must be > 0");
    if (probe.samples_per_radius < 1) {
      config_fail("config.metric", "\"samples_per_radius\" must be >= 1");
    }
  }

  if (!config.contains("experiments") || !config.at("experiments").is_array() ||
      config.at("experiments").empty()) {
    throw ConfigError("config: \"experiments\" must be a nonempty array");
  }

  RunOutcome out;
  if (execute) {
    out.records.push_back(json{{"record", "meta"},
                               {"tool", "proxkit"},
                               {"version", kToolVersion},
                               {"seed", seed},
                               {"config_hash", hex64(fnv1a_hash(config.dump()))},
                               {"name", config.value("name", std::string("unnamed"))}});
  }

  int index = 0;
  for (const json& ej : config.at("experiments")) {
    const std::string where = "experiments[" + std::to_string(index) + "]";
    if (!ej.is_object() || !ej.contains("kind") || !ej.at("kind").is_string()) {
      throw ConfigError(where + ": each experiment needs a string \"kind\"");
    }
    const std::string kind = ej.at("kind").get<std::string>();
    ExpContext ctx;
    ctx.probe = probe;
    ctx.probe.seed = mix_seed(seed, static_cast<std::uint64_t>(index) * 2 + 1);
    ctx.seed = mix_seed(seed, static_cast<std::uint64_t>(index) * 2 + 2);
    ctx.execute = execute;
    ctx.label = ej.contains("name") && ej.at("name").is_string()
                    ? ej.at("name").get<std::string>()
                    : kind + "#" + std::to_string(index);
    ctx.records = &out.records;
    ctx.failures = &out.failures;
    out.experiments.push_back(json{{"label", ctx.label}, {"kind", kind}});

    if (kind == "metric_table") {
      run_metric_table(ej, ctx, where);
    } else if (kind == "perturbation_sweep") {
      run_perturbation_sweep(ej, ctx, where);
    } else if (kind == "dynamics") {
      run_dynamics(ej, ctx, where);
    } else if (kind == "checks") {
      run_checks(ej, ctx, where);
    } else if (kind == "stability") {
      run_stability(ej, ctx, where);
    } else {
      throw ConfigError(where + ": unknown kind \"" + kind + "\"");
    }
    ++index;
  }

  if (execute) {
    out.records.push_back(json{{"record", "summary"},
                               {"experiments", index},
                               {"failures", out.failures}});
  }
  return out;
}

}  // namespace detail

/// Executes every experiment in the config. Throws ConfigError for malformed
/// input; probe failures are reported through RunOutcome::failures instead.
inline RunOutcome run_experiments(const nlohmann::json& config, const RunOptions& opts = {}) {
  return detail::run_impl(config, opts, true);
}

/// Full parse and validation (functions are constructed, parameters checked)
/// without running anything.
inline void validate_config(const nlohmann::json& config) {
  detail::run_impl(config, RunOptions{}, false);
}

/// Labels and kinds of the experiments a config declares.
inline std::vector<nlohmann::json> list_experiments(const nlohmann::json& config) {
  return detail::run_impl(config, RunOptions{}, false).experiments;
}

/// Flat per-record CSV view: fixed lead columns, then the remaining scalar
/// fields of each record as sorted "key=value" pairs.
inline void write_csv_summary(std::ostream& os, const std::vector<nlohmann::json>& records) {
  CsvWriter csv(os);
  csv.row({"experiment", "record", "pass", "detail"});
  for (const nlohmann::json& r : records) {
    std::string detail;
    for (const auto& item : r.items()) {
      const std::string& k = item.key();
      if (k == "experiment" || k == "record" || k == "pass") continue;
      if (!item.value().is_primitive()) continue;
      if (!detail.empty()) detail += "; ";
      detail += k + "=" + (item.value().is_string()
                               ? item.value().get<std::string>()
                               : item.value().dump());
    }
    csv.row({r.value("experiment", std::string("-")), r.value("record", std::string("-")),
             r.contains("pass") ? (r.at("pass").get<bool>() ? "true" : "false") : "-",
             detail});
  }
}

}  // namespace proxkit
