#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "starhub/starhub.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_error = 1;
constexpr int exit_check_failed = 2;

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw starhub::Error(starhub::ErrorKind::invalid_argument, "cannot write '" + out_path + "'");
  out << text;
}

std::string fmt(double v) { return starhub::detail::format_real(v); }

json matrix_json(const starhub::Instance& inst, const starhub::Matrix<double>& x) {
  // Columns in external hub order.
  json rows = json::array();
  std::vector<std::size_t> slot(inst.hub_count());
  for (std::size_t k = 0; k < inst.hub_count(); ++k) slot[inst.hub_ids()[k]] = k;
  for (std::size_t p = 0; p < x.rows(); ++p) {
    json row = json::array();
    for (std::size_t e = 0; e < x.cols(); ++e) row.push_back(x(p, slot[e]));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? " " : "") + std::to_string(v[k]);
  return s;
}

std::vector<starhub::CorpusEntry> load_corpus(const std::string& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<starhub::CorpusEntry> corpus;
  for (std::size_t k = 0; k < files.size(); ++k)
    corpus.push_back({k, starhub::derive_seed(0, k), starhub::load_instance(files[k].string())});
  return corpus;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Star-star hub network design: relaxation, dependent rounding, exact oracle, experiments"};
  app.require_subcommand(1);

  std::string out_path;
  std::string format = "csv";
  double r = starhub::default_ratio_base;
  std::size_t trials = 2000;
  std::uint64_t seed = 1;
  bool no_truncate_u = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out", out_path, "Output file (default: stdout)");
    cmd->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  };
  auto add_rounding = [&](CLI::App* cmd) {
    cmd->add_option("--r", r, "Classification base r > 1")->check(CLI::PositiveNumber);
    cmd->add_option("--trials", trials, "Rounding trials")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", seed, "Master seed");
    cmd->add_flag("--no-truncate-u", no_truncate_u, "Draw U from [0,1) in every intra-class phase");
  };

  // gen
  starhub::ExperimentConfig gen_cfg;
  std::string gen_dir;
  auto* gen = app.add_subcommand("gen", "Generate a random instance corpus");
  gen->add_option("--count", gen_cfg.instances, "Number of instances");
  gen->add_option("--n-min", gen_cfg.n_min);
  gen->add_option("--n-max", gen_cfg.n_max);
  gen->add_option("--h-min", gen_cfg.h_min);
  gen->add_option("--h-max", gen_cfg.h_max);
  gen->add_option("--ell-max", gen_cfg.ell_max);
  gen->add_option("--c-max", gen_cfg.c_max);
  gen->add_option("--w-max", gen_cfg.w_max);
  gen->add_option("--density", gen_cfg.density);
  gen->add_option("--seed", gen_cfg.seed);
  gen->add_option("--out", gen_dir, "Directory for instance_NNN.json (stdout when generating one instance)");

  // solve-lp
  std::string instance_path;
  std::string dump_lp;
  auto* solve_lp = app.add_subcommand("solve-lp", "Solve the linear relaxation");
  solve_lp->add_option("instance", instance_path)->required()->check(CLI::ExistingFile);
  solve_lp->add_option("--dump-lp", dump_lp, "Also write the relaxation in CPLEX LP text format");
  add_common(solve_lp);

  // round
  auto* round = app.add_subcommand("round", "Relaxation + dependent rounding, best of --trials");
  round->add_option("instance", instance_path)->required()->check(CLI::ExistingFile);
  add_common(round);
  add_rounding(round);

  // exact
  std::uint64_t limit = starhub::default_enumeration_limit;
  auto* exact = app.add_subcommand("exact", "Exhaustive optimum (small instances)");
  exact->add_option("instance", instance_path)->required()->check(CLI::ExistingFile);
  exact->add_option("--limit", limit, "Maximum h^n");
  add_common(exact);

  // experiment
  starhub::ExperimentConfig exp_cfg;
  std::string corpus_dir;
  auto* experiment = app.add_subcommand("experiment", "Corpus experiment with statistical and invariant checks");
  experiment->add_option("--corpus", corpus_dir, "Directory of instance JSON files (default: generate)")
      ->check(CLI::ExistingDirectory);
  experiment->add_option("--instances", exp_cfg.instances, "Generated corpus size");
  experiment->add_option("--n-min", exp_cfg.n_min);
  experiment->add_option("--n-max", exp_cfg.n_max);
  experiment->add_option("--h-min", exp_cfg.h_min);
  experiment->add_option("--h-max", exp_cfg.h_max);
  experiment->add_option("--marginal-trials", exp_cfg.marginal_trials);
  experiment->add_option("--threads", exp_cfg.threads);
  add_common(experiment);
  add_rounding(experiment);

  // ratio-curve
  double r_min = 1.1, r_max = 4.0;
  std::size_t steps = 30;
  auto* curve = app.add_subcommand("ratio-curve", "Tabulate the guarantee f(r) and its minimizer");
  curve->add_option("--r-min", r_min)->check(CLI::PositiveNumber);
  curve->add_option("--r-max", r_max)->check(CLI::PositiveNumber);
  curve->add_option("--steps", steps)->check(CLI::PositiveNumber);
  add_common(curve);

  CLI11_PARSE(app, argc, argv);

  starhub::RoundingOptions rounding;
  rounding.truncate_u = !no_truncate_u;

  try {
    if (*gen) {
      const auto corpus = starhub::make_corpus(gen_cfg);
      if (gen_dir.empty()) {
        if (corpus.size() != 1) {
          std::cerr << "gen: --out DIR is required for more than one instance\n";
          return exit_error;
        }
        std::cout << starhub::write_instance(corpus.front().instance);
        return exit_ok;
      }
      fs::create_directories(gen_dir);
      for (const auto& e : corpus) {
        char name[32];
        std::snprintf(name, sizeof name, "instance_%03zu.json", e.id);
        emit(starhub::write_instance(e.instance), (fs::path(gen_dir) / name).string());
      }
      std::cerr << "wrote " << corpus.size() << " instances to " << gen_dir << '\n';
      return exit_ok;
    }

    if (*solve_lp) {
      const auto inst = starhub::load_instance(instance_path);
      const auto lp = starhub::build_lrp(inst);
      if (!dump_lp.empty()) emit(starhub::write_lp_text(lp), dump_lp);
      const auto sol = starhub::solve(lp);
      if (format == "json") {
        json doc{{"status", starhub::to_string(sol.status)},
                 {"objective", sol.objective_value},
                 {"iterations", sol.iterations},
                 {"x", matrix_json(inst, sol.x)}};
        emit(doc.dump(2) + "\n", out_path);
      } else {
        std::ostringstream out;
        out << "# status=" << starhub::to_string(sol.status) << " objective=" << fmt(sol.objective_value) << '\n';
        out << "nonhub";
        for (std::size_t e = 0; e < inst.hub_count(); ++e) out << ",hub_" << e;
        out << '\n';
        const auto rows = matrix_json(inst, sol.x);
        for (std::size_t p = 0; p < rows.size(); ++p) {
          out << p;
          for (const auto& v : rows[p]) out << ',' << fmt(v.get<double>());
          out << '\n';
        }
        emit(out.str(), out_path);
      }
      return sol.status == starhub::SolveStatus::optimal ? exit_ok : exit_check_failed;
    }

    if (*round) {
      const auto inst = starhub::load_instance(instance_path);
      const auto res = starhub::run_pipeline(inst, r, trials, seed, rounding);
      const auto hubs = starhub::to_external(inst, res.best);
      double mean = 0.0;
      for (double c : res.costs) mean += c;
      mean /= static_cast<double>(res.costs.size());
      if (format == "json") {
        json doc{{"lp_value", res.relaxation.objective_value},
                 {"best_cost", res.best_cost},
                 {"best_trial", res.best_trial},
                 {"mean_cost", mean},
                 {"assignment", hubs},
                 {"costs", res.costs},
                 {"r", r},
                 {"seed", seed}};
        emit(doc.dump(2) + "\n", out_path);
      } else {
        std::ostringstream out;
        out << "lp_value,best_cost,mean_cost,best_trial,trials,r,seed,assignment\n"
            << fmt(res.relaxation.objective_value) << ',' << fmt(res.best_cost) << ',' << fmt(mean) << ','
            << res.best_trial << ',' << res.costs.size() << ',' << fmt(r) << ',' << seed << ',' << join(hubs) << '\n';
        emit(out.str(), out_path);
      }
      return exit_ok;
    }

    if (*exact) {
      const auto inst = starhub::load_instance(instance_path);
      const auto res = starhub::solve_exact(inst, limit);
      const auto hubs = starhub::to_external(inst, res.assignment);
      if (format == "json") {
        json doc{{"value", res.value}, {"assignment", hubs}, {"leaves", res.leaves}};
        emit(doc.dump(2) + "\n", out_path);
      } else {
        emit("value,leaves,assignment\n" + fmt(res.value) + "," + std::to_string(res.leaves) + "," + join(hubs) + "\n",
             out_path);
      }
      return exit_ok;
    }

    if (*experiment) {
      exp_cfg.trials = trials;
      exp_cfg.seed = seed;
      exp_cfg.r = r;
      exp_cfg.truncate_u = rounding.truncate_u;
      const auto corpus = corpus_dir.empty() ? starhub::make_corpus(exp_cfg) : load_corpus(corpus_dir);
      const auto report = starhub::run_experiment(exp_cfg, corpus);
      emit(format == "json" ? starhub::write_json(report) : starhub::write_csv(report), out_path);
      for (const auto& c : report.checks)
        std::cerr << (c.passed ? "PASS " : "FAIL ") << c.name << " (" << c.cases << " cases)"
                  << (c.passed ? "" : ": " + c.detail) << '\n';
      const bool ok = report.all_passed();
      std::cerr << (ok ? "all checks passed" : "acceptance check failed") << '\n';
      return ok ? exit_ok : exit_check_failed;
    }

    if (*curve) {
      if (!(r_min > 1.0) || !(r_max > r_min)) {
        std::cerr << "ratio-curve: need 1 < r-min < r-max\n";
        return exit_error;
      }
      std::vector<double> grid;
      for (std::size_t k = 0; k <= steps; ++k)
        grid.push_back(r_min + (r_max - r_min) * static_cast<double>(k) / static_cast<double>(steps));
      const auto points = starhub::ratio_curve(grid);
      const auto best = starhub::minimize_ratio();
      if (format == "json") {
        json doc;
        doc["curve"] = json::array();
        for (const auto& pt : points) doc["curve"].push_back({{"r", pt.r}, {"f", pt.value}});
        doc["minimum"] = {{"r", best.r}, {"f", best.value}};
        emit(doc.dump(2) + "\n", out_path);
      } else {
        std::ostringstream out;
        out << "r,f\n";
        for (const auto& pt : points) out << fmt(pt.r) << ',' << fmt(pt.value) << '\n';
        out << "# minimum r=" << fmt(best.r) << " f=" << fmt(best.value) << '\n';
        emit(out.str(), out_path);
      }
      return exit_ok;
    }
  } catch (const starhub::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_error;
  }
  return exit_ok;
}
