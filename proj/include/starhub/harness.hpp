#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "starhub/error.hpp"
#include "starhub/exact.hpp"
#include "starhub/hub_classing.hpp"
#include "starhub/instance.hpp"
#include "starhub/instance_io.hpp"
#include "starhub/lp.hpp"
#include "starhub/random.hpp"
#include "starhub/rounding.hpp"
#include "starhub/transport.hpp"

namespace starhub {

// ---------------------------------------------------------------------------
// Approximation guarantee as a function of the classification base.

inline double ratio_bound(double r) {
  if (!(r > 1.0) || !std::isfinite(r)) throw Error(ErrorKind::invalid_argument, "ratio_bound needs r > 1");
  const double r2 = r * r;
  return (r - 1.0) / std::log(r) * (2.0 + (r2 + 1.0) / (r2 - 1.0));
}

// (r^2+1)/(r^2-1): the cross-class stretch factor.
inline double cross_class_factor(double r) { return (r * r + 1.0) / (r * r - 1.0); }

struct RatioPoint {
  double r;
  double value;
};

inline std::vector<RatioPoint> ratio_curve(std::span<const double> grid) {
  std::vector<RatioPoint> out;
  out.reserve(grid.size());
  for (double r : grid) out.push_back({r, ratio_bound(r)});
  return out;
}

// Golden-section search on [lo, hi].
inline RatioPoint minimize_ratio(double lo = 1.0 + 1e-6, double hi = 10.0, double tolerance = 1e-6) {
  if (!(lo > 1.0) || !(hi > lo)) throw Error(ErrorKind::invalid_argument, "minimize_ratio needs 1 < lo < hi");
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = ratio_bound(c), fd = ratio_bound(d);
  while (b - a > tolerance) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = ratio_bound(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = ratio_bound(d);
    }
  }
  const double r = (a + b) / 2.0;
  return {r, ratio_bound(r)};
}

// ---------------------------------------------------------------------------
// Experiments.

struct ExperimentConfig {
  std::size_t instances = 50;
  std::size_t n_min = 3, n_max = 6;
  std::size_t h_min = 3, h_max = 5;
  std::int64_t ell_max = 20;
  double c_max = 10.0;
  double w_max = 5.0;
  double density = 0.7;
  std::size_t trials = 2000;
  std::uint64_t seed = 1;
  double r = default_ratio_base;
  bool truncate_u = true;
  double bound_factor = 5.281;
  double bound_sigmas = 3.0;
  std::uint64_t exact_limit = 1'000'000;
  std::size_t marginal_trials = 10'000;
  std::size_t lambda_samples = 20;  // per instance, for the deterministic suites
  std::size_t threads = 0;          // 0: hardware concurrency
};

struct CorpusEntry {
  std::size_t id = 0;
  std::uint64_t seed = 0;
  Instance instance;
};

inline std::vector<CorpusEntry> make_corpus(const ExperimentConfig& cfg) {
  if (cfg.n_min < 1 || cfg.n_max < cfg.n_min || cfg.h_min < 1 || cfg.h_max < cfg.h_min)
    throw Error(ErrorKind::invalid_argument, "corpus size ranges are empty");
  std::vector<CorpusEntry> corpus;
  for (std::size_t k = 0; k < cfg.instances; ++k) {
    const std::uint64_t seed = derive_seed(cfg.seed, k);
    Rng shape(seed);
    GeneratorParams params;
    params.seed = mix64(seed);
    params.nonhubs = cfg.n_min + shape.below(cfg.n_max - cfg.n_min + 1);
    params.hubs = cfg.h_min + shape.below(cfg.h_max - cfg.h_min + 1);
    params.ell_max = cfg.ell_max;
    params.c_max = cfg.c_max;
    params.w_max = cfg.w_max;
    params.density = cfg.density;
    corpus.push_back({k, seed, generate_random(params)});
  }
  return corpus;
}

struct CheckResult {
  std::string name;
  bool passed = true;
  std::size_t cases = 0;
  std::string detail;  // first failure, if any
};

struct ExperimentRow {
  std::size_t id = 0;
  std::size_t n = 0;
  std::size_t h = 0;
  std::uint64_t seed = 0;
  double r = 0.0;
  double lp_value = 0.0;
  std::optional<double> exact_value;
  std::vector<double> costs;
  double mean_cost = 0.0;
  double std_cost = 0.0;
  double best_cost = 0.0;
  double ratio_mean_lp = 0.0;
  std::optional<double> ratio_best_exact;
  bool bound_ok = false;
  bool sandwich_ok = true;
  std::string error;
};

struct ExperimentReport {
  std::vector<ExperimentRow> rows;
  std::vector<CheckResult> checks;

  bool all_passed() const {
    for (const auto& row : rows)
      if (!row.error.empty() || !row.bound_ok || !row.sandwich_ok) return false;
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
};

// num/den with the convention 0/0 = 1.
inline double safe_ratio(double num, double den) {
  if (den > 0.0) return num / den;
  return std::abs(num) <= 1e-12 ? 1.0 : std::numeric_limits<double>::infinity();
}

namespace detail {

inline void record(CheckResult& check, bool ok, const std::string& what) {
  ++check.cases;
  if (!ok && check.passed) {
    check.passed = false;
    check.detail = what;
  }
}

inline void merge(CheckResult& into, const CheckResult& from) {
  into.cases += from.cases;
  if (!from.passed && into.passed) {
    into.passed = false;
    into.detail = from.detail;
  }
}

inline std::vector<double> row_of(const Matrix<double>& x, std::size_t p) {
  return {x.row(p).begin(), x.row(p).end()};
}

// Deterministic invariant suites on one instance and its relaxation.
struct StructuralChecks {
  CheckResult u_sandwich{"u_sandwich", true, 0, {}};
  CheckResult class_gap{"class_gap_bound", true, 0, {}};
  CheckResult line_metric{"line_metric_realization", true, 0, {}};
  CheckResult monge_hat{"hat_matrix_monge", true, 0, {}};
  CheckResult nwcr_prefix{"nwcr_prefix_identity", true, 0, {}};
  CheckResult nwcr_optimal{"monge_nwcr_optimal", true, 0, {}};
  CheckResult block_mass{"class_block_nwcr_mass", true, 0, {}};
  CheckResult coupling{"coupling_identity", true, 0, {}};

  std::vector<CheckResult*> all() {
    return {&u_sandwich, &class_gap, &line_metric, &monge_hat, &nwcr_prefix, &nwcr_optimal, &block_mass, &coupling};
  }
};

inline void structural_checks(const Instance& inst, const Matrix<double>& x, double r, Rng& rng,
                              std::size_t lambda_samples, StructuralChecks& out) {
  const std::size_t h = inst.hub_count();
  const std::size_t n = inst.nonhub_count();
  const auto& lengths = inst.spoke_lengths();
  const double factor = cross_class_factor(r);

  for (std::size_t s = 0; s < lambda_samples; ++s) {
    const double lambda = rng.uniform();
    const auto hc = classify_hubs(inst, r, lambda);
    const auto hat = build_hat_matrix(hc);
    const std::string tag = "lambda=" + std::to_string(lambda);

    for (std::size_t i = 0; i < h; ++i) {
      if (lengths[i] < 1) continue;
      const double l = static_cast<double>(lengths[i]);
      record(out.u_sandwich, l < hc.u[i] && hc.u[i] <= r * l * (1.0 + 1e-12), tag + " hub " + std::to_string(i));
    }
    for (std::size_t i = 0; i < h; ++i) {
      for (std::size_t j = 0; j < h; ++j) {
        const double line = std::abs(hat.position[i] - hat.position[j]);
        record(out.line_metric, std::abs(line - hat.cost(i, j)) <= 1e-9 * std::max(1.0, line),
               tag + " pair " + std::to_string(i) + "," + std::to_string(j));
        if (i < j && hc.alpha[i] != hc.alpha[j])
          record(out.class_gap, hc.u[i] + hc.u[j] <= factor * hat.cost(i, j) * (1.0 + 1e-12),
                 tag + " pair " + std::to_string(i) + "," + std::to_string(j));
      }
    }
    record(out.monge_hat, find_monge_order(hat.cost, std::span<const std::size_t>(hc.hub_order), 1e-9),
           tag + " hub order");

    // Relaxation rows as marginals of the surrogate transport problems.
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = 0; q < n; ++q) {
        if (p == q) continue;
        TransportInstance<double> t{row_of(x, p), row_of(x, q), hat.cost};
        const auto nw = nwcr(t, hc.hub_order, hc.hub_order);
        double rows_prefix = 0.0;
        for (std::size_t a = 0; a < h; ++a) {
          rows_prefix += t.supply[hc.hub_order[a]];
          double cols_prefix = 0.0;
          for (std::size_t b = 0; b < h; ++b) {
            cols_prefix += t.demand[hc.hub_order[b]];
            double mass = 0.0;
            for (std::size_t a2 = 0; a2 <= a; ++a2)
              for (std::size_t b2 = 0; b2 <= b; ++b2) mass += nw.flow(hc.hub_order[a2], hc.hub_order[b2]);
            record(out.nwcr_prefix, std::abs(mass - std::min(rows_prefix, cols_prefix)) <= 1e-9,
                   tag + " corner " + std::to_string(a) + "," + std::to_string(b));
          }
        }
        if (s == 0) {
          const auto opt = transport_optimal(t);
          record(out.nwcr_optimal, std::abs(nw.cost - opt.cost) <= 1e-8 * std::max(1.0, std::abs(opt.cost)),
                 "pair " + std::to_string(p) + "," + std::to_string(q));
        }

        // Class-level NWCR over the class order agrees with block sums of
        // the hub-level plan.
        const std::size_t classes = static_cast<std::size_t>(hc.kappa_max) + 1;
        std::vector<double> a_block(classes, 0.0), b_block(classes, 0.0);
        for (std::size_t i = 0; i < h; ++i) {
          a_block[static_cast<std::size_t>(hc.alpha[i])] += t.supply[i];
          b_block[static_cast<std::size_t>(hc.alpha[i])] += t.demand[i];
        }
        std::vector<std::size_t> order(hc.class_order.begin(), hc.class_order.end());
        TransportInstance<double> blocks{a_block, b_block, Matrix<double>(classes, classes)};
        const auto block_plan = nwcr(blocks, order, order);
        for (std::size_t k1 = 0; k1 < classes; ++k1)
          for (std::size_t k2 = 0; k2 < classes; ++k2) {
            const double hub_level = block_mass(nw.flow, std::span<const int>(hc.alpha),
                                                std::span<const int>(hc.alpha), static_cast<int>(k1),
                                                static_cast<int>(k2));
            record(out.block_mass, std::abs(hub_level - block_plan.flow(k1, k2)) <= 1e-9,
                   tag + " classes " + std::to_string(k1) + "," + std::to_string(k2));
          }
      }
    }
  }

  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q < n; ++q) {
      if (p == q) continue;
      const auto xp = row_of(x, p), xq = row_of(x, q);
      const auto y = couple_from_marginals<double>(xp, xq);
      const double lhs = star_cost<double, std::int64_t>(y.flow, lengths);
      const double rhs = weighted_l1<double, std::int64_t>(lengths, xp, xq);
      record(out.coupling, std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, rhs),
             "pair " + std::to_string(p) + "," + std::to_string(q));
    }
}

}  // namespace detail

// Rounds `trials` times at a fixed lambda and compares the empirical
// allocation frequencies with x (4 binomial standard deviations), and the
// joint class frequencies of non-hubs 0 and 1 with the class-level NWCR mass.
inline std::vector<CheckResult> marginal_checks(const Instance& inst, const Matrix<double>& x, double r, double lambda,
                                                std::size_t trials, std::uint64_t seed,
                                                const RoundingOptions& options = {}) {
  const std::size_t n = inst.nonhub_count();
  const std::size_t h = inst.hub_count();
  const auto hc = classify_hubs(inst, r, lambda);
  const std::size_t classes = static_cast<std::size_t>(hc.kappa_max) + 1;
  Matrix<double> hits(n, h, 0.0);
  Matrix<double> joint(classes, classes, 0.0);
  for (std::size_t t = 0; t < trials; ++t) {
    const auto trace = round_with_lambda(x, inst.spoke_lengths(), r, lambda, derive_seed(seed, t), options);
    for (std::size_t p = 0; p < n; ++p) hits(p, trace.assignment.target[p]) += 1.0;
    if (n >= 2) {
      const auto a = static_cast<std::size_t>(hc.alpha[trace.assignment.target[0]]);
      const auto b = static_cast<std::size_t>(hc.alpha[trace.assignment.target[1]]);
      joint(a, b) += 1.0;
    }
  }
  const double total = static_cast<double>(trials);
  auto within = [&](double observed, double expected) {
    const double sigma = std::sqrt(std::max(expected * (1.0 - expected), 0.0) / total);
    return std::abs(observed / total - expected) <= 4.0 * sigma + 1e-12;
  };

  CheckResult marginal{"marginal_preservation", true, 0, {}};
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t i = 0; i < h; ++i)
      detail::record(marginal, within(hits(p, i), x(p, i)),
                     "p=" + std::to_string(p) + " i=" + std::to_string(i) + " freq=" +
                         std::to_string(hits(p, i) / total) + " x=" + std::to_string(x(p, i)));

  CheckResult blocks{"class_pair_frequency", true, 0, {}};
  if (n >= 2) {
    std::vector<double> a(classes, 0.0), b(classes, 0.0);
    for (std::size_t i = 0; i < h; ++i) {
      a[static_cast<std::size_t>(hc.alpha[i])] += x(0, i);
      b[static_cast<std::size_t>(hc.alpha[i])] += x(1, i);
    }
    // NWCR needs exactly balanced marginals; rows of x are stochastic.
    std::vector<std::size_t> order(hc.class_order.begin(), hc.class_order.end());
    const auto plan = nwcr(TransportInstance<double>{a, b, Matrix<double>(classes, classes)}, order, order);
    for (std::size_t k1 = 0; k1 < classes; ++k1)
      for (std::size_t k2 = 0; k2 < classes; ++k2)
        detail::record(blocks, within(joint(k1, k2), plan.flow(k1, k2)),
                       "classes " + std::to_string(k1) + "," + std::to_string(k2));
  }
  return {marginal, blocks};
}

namespace detail {

struct InstanceOutcome {
  ExperimentRow row;
  StructuralChecks checks;
};

inline InstanceOutcome run_instance(const CorpusEntry& entry, const ExperimentConfig& cfg) {
  InstanceOutcome out;
  auto& row = out.row;
  const auto& inst = entry.instance;
  row.id = entry.id;
  row.n = inst.nonhub_count();
  row.h = inst.hub_count();
  row.seed = entry.seed;
  row.r = cfg.r;
  try {
    RoundingOptions options;
    options.truncate_u = cfg.truncate_u;
    const auto result = run_pipeline(inst, cfg.r, cfg.trials, entry.seed, options);
    row.lp_value = result.relaxation.objective_value;
    row.costs = result.costs;
    row.best_cost = result.best_cost;
    const double t = static_cast<double>(row.costs.size());
    row.mean_cost = std::accumulate(row.costs.begin(), row.costs.end(), 0.0) / t;
    double ss = 0.0;
    for (double c : row.costs) ss += (c - row.mean_cost) * (c - row.mean_cost);
    row.std_cost = row.costs.size() > 1 ? std::sqrt(ss / (t - 1.0)) : 0.0;
    row.ratio_mean_lp = safe_ratio(row.mean_cost, row.lp_value);
    const double se = row.std_cost / std::sqrt(t);
    row.bound_ok = row.mean_cost <= cfg.bound_factor * row.lp_value + cfg.bound_sigmas * se + 1e-9;

    if (enumeration_size(row.h, row.n, cfg.exact_limit) <= cfg.exact_limit) {
      const auto exact = solve_exact(inst, cfg.exact_limit);
      row.exact_value = exact.value;
      row.ratio_best_exact = safe_ratio(row.best_cost, exact.value);
      const double slack = 1e-6 * std::max(1.0, std::abs(exact.value));
      const double worst_low = *std::min_element(row.costs.begin(), row.costs.end());
      row.sandwich_ok = row.lp_value <= exact.value + slack && exact.value <= worst_low + slack;
    }

    Rng rng(mix64(entry.seed ^ 0x5bd1e995ULL));
    structural_checks(inst, result.relaxation.x, cfg.r, rng, cfg.lambda_samples, out.checks);
  } catch (const std::exception& e) {
    row.error = e.what();
    row.bound_ok = false;
  }
  return out;
}

}  // namespace detail

// Runs the pipeline on every corpus instance (concurrently), plus the
// invariant suites. Row order follows instance id regardless of schedule.
inline ExperimentReport run_experiment(const ExperimentConfig& cfg, const std::vector<CorpusEntry>& corpus) {
  ExperimentReport report;
  if (corpus.empty()) return report;

  std::vector<detail::InstanceOutcome> outcomes(corpus.size());
  std::size_t workers = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, corpus.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < corpus.size();) outcomes[k] = detail::run_instance(corpus[k], cfg);
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();

  detail::StructuralChecks merged;
  for (auto& o : outcomes) {
    report.rows.push_back(std::move(o.row));
    auto from = o.checks.all();
    auto into = merged.all();
    for (std::size_t k = 0; k < into.size(); ++k) detail::merge(*into[k], *from[k]);
  }
  std::sort(report.rows.begin(), report.rows.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  for (auto* c : merged.all()) report.checks.push_back(*c);

  // Marginal suite on the first instance that solved.
  for (std::size_t k = 0; k < corpus.size(); ++k) {
    if (!report.rows[k].error.empty()) continue;
    const auto relax = solve_lrp(corpus[k].instance);
    Rng rng(mix64(corpus[k].seed ^ 0x27d4eb2fULL));
    const double lambda = rng.uniform();
    RoundingOptions options;
    options.truncate_u = cfg.truncate_u;
    for (auto& c : marginal_checks(corpus[k].instance, relax.x, cfg.r, lambda, cfg.marginal_trials,
                                   corpus[k].seed, options))
      report.checks.push_back(std::move(c));
    break;
  }
  return report;
}

inline ExperimentReport run_experiment(const ExperimentConfig& cfg) { return run_experiment(cfg, make_corpus(cfg)); }

// ---------------------------------------------------------------------------
// Report emission.

inline const char* csv_header() {
  return "instance_id,n,h,seed,r,trials,lp_value,exact_value,mean_cost,std_cost,best_cost,"
         "ratio_mean_lp,ratio_best_exact,bound_ok,sandwich_ok,error";
}

inline std::string csv_field(std::string s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string write_csv(const ExperimentReport& report) {
  using detail::format_real;
  std::ostringstream out;
  out << csv_header() << '\n';
  for (const auto& row : report.rows) {
    out << row.id << ',' << row.n << ',' << row.h << ',' << row.seed << ',' << format_real(row.r) << ','
        << row.costs.size() << ',' << format_real(row.lp_value) << ','
        << (row.exact_value ? format_real(*row.exact_value) : "") << ',' << format_real(row.mean_cost) << ','
        << format_real(row.std_cost) << ',' << format_real(row.best_cost) << ',' << format_real(row.ratio_mean_lp)
        << ',' << (row.ratio_best_exact ? format_real(*row.ratio_best_exact) : "") << ','
        << (row.bound_ok ? 1 : 0) << ',' << (row.sandwich_ok ? 1 : 0) << ',' << csv_field(row.error) << '\n';
  }
  return out.str();
}

inline nlohmann::json to_json(const ExperimentReport& report) {
  nlohmann::json doc;
  doc["rows"] = nlohmann::json::array();
  for (const auto& row : report.rows) {
    nlohmann::json j;
    j["instance_id"] = row.id;
    j["n"] = row.n;
    j["h"] = row.h;
    j["seed"] = row.seed;
    j["r"] = row.r;
    j["lp_value"] = row.lp_value;
    j["exact_value"] = row.exact_value ? nlohmann::json(*row.exact_value) : nlohmann::json(nullptr);
    j["costs"] = row.costs;
    j["mean_cost"] = row.mean_cost;
    j["std_cost"] = row.std_cost;
    j["best_cost"] = row.best_cost;
    j["ratio_mean_lp"] = std::isfinite(row.ratio_mean_lp) ? nlohmann::json(row.ratio_mean_lp) : nlohmann::json(nullptr);
    j["ratio_best_exact"] = row.ratio_best_exact ? nlohmann::json(*row.ratio_best_exact) : nlohmann::json(nullptr);
    j["bound_ok"] = row.bound_ok;
    j["sandwich_ok"] = row.sandwich_ok;
    j["error"] = row.error;
    doc["rows"].push_back(std::move(j));
  }
  doc["checks"] = nlohmann::json::array();
  for (const auto& c : report.checks)
    doc["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"cases", c.cases}, {"detail", c.detail}});
  doc["passed"] = report.all_passed();
  return doc;
}

inline std::string write_json(const ExperimentReport& report) { return to_json(report).dump(2) + "\n"; }

}  // namespace starhub
