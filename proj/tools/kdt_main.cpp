// kdt: build trees, run queries, and drive the Monte-Carlo experiment
// harness from the command line.
//
// Exit codes: 0 success (and all checks passed), 1 a check failed,
// 2 usage or validation error.
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "kdt/experiments.hpp"
#include "kdt/search.hpp"
#include "kdt/tree_io.hpp"

#include "CLI11.hpp"
#include "json.hpp"

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  json j;
  in >> j;
  return j;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
}

/// --distribution accepts "uniform", "corner", or a path to a config file
/// ({type, d?, intervals|breakpoints, masses, seed?}); the config may carry
/// defaults for the dimension and master seed.
struct DistArg {
  kdt::DistributionFamily family;
  std::optional<int> d;
  std::optional<std::uint64_t> seed;
};

DistArg parse_family(const std::string& arg) {
  if (arg == "uniform") return {kdt::DistributionFamily::uniform(), std::nullopt, std::nullopt};
  if (arg == "corner") return {kdt::DistributionFamily::corner(), std::nullopt, std::nullopt};
  const json j = load_json_file(arg);
  DistArg out{kdt::DistributionFamily::from_json(j), std::nullopt, std::nullopt};
  if (j.contains("d")) out.d = j.at("d").get<int>();
  if (j.contains("seed")) out.seed = j.at("seed").get<std::uint64_t>();
  return out;
}

int report_and_write(const kdt::ExperimentResult& result, const std::string& out_dir,
                     const std::optional<std::string>& expectations_path) {
  kdt::ExperimentResult final = result;
  if (expectations_path) {
    const auto extra = kdt::apply_expectations(load_json_file(*expectations_path), final);
    final.checks.insert(final.checks.end(), extra.begin(), extra.end());
  }

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    const std::string base = out_dir + "/" + final.experiment;
    write_text_file(base + "-trials.jsonl", kdt::records_to_jsonl(final));
    write_text_file(base + "-summary.csv", kdt::summary_to_csv(final));
    std::cout << "wrote " << base << "-trials.jsonl (" << final.records.size() << " records) and "
              << base << "-summary.csv\n";
  }

  std::cout << kdt::summary_to_csv(final);
  for (const auto& note : final.notes) std::cout << "note: " << note << "\n";
  bool all_ok = true;
  for (const auto& check : final.checks) {
    std::cout << (check.passed ? "[ok]   " : "[FAIL] ") << check.name << ": " << check.detail
              << "\n";
    all_ok &= check.passed;
  }
  return all_ok ? 0 : 1;
}

std::string describe_outcome(const kdt::SearchOutcome& outcome) {
  ordered_json j;
  j["index"] = outcome.index;
  j["distance"] = outcome.distance;
  j["visited_leaves"] = outcome.visited_leaves;
  j["distance_computations"] = outcome.distance_computations;
  j["backtracks"] = outcome.backtracks;
  return j.dump(2);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"k-d tree nearest neighbor library and experiment harness"};
  app.require_subcommand(1);

  // ---- build ----
  auto* build = app.add_subcommand("build", "build a tree and write it as JSON");
  std::string build_points, build_dist, build_out = "tree.json";
  std::int64_t build_n = 0, build_n0 = 0;
  int build_d = 0;
  std::uint64_t build_seed = 0;
  bool build_seeded = false;
  build->add_option("--points", build_points, "points file (JSON; see data/figure2.json)");
  build->add_option("--distribution", build_dist, "uniform | corner | config path");
  build->add_option("--n", build_n, "number of points to sample");
  build->add_option("--d", build_d, "dimension when sampling");
  build->add_option("--n0", build_n0, "minimum leaf size (default 1, or the points file's value)");
  build->add_option("--seed", build_seed, "sampler seed (required when sampling)")
      ->each([&](const std::string&) { build_seeded = true; });
  build->add_option("--out", build_out, "output tree path");

  // ---- query ----
  auto* query = app.add_subcommand("query", "run one nearest-neighbor query on a tree file");
  std::string query_tree, query_mode = "comprehensive";
  std::vector<double> query_point;
  query->add_option("--tree", query_tree, "tree file from `kdt build`")->required();
  query->add_option("--point", query_point, "query coordinates")->delimiter(',')->required();
  query->add_option("--mode", query_mode, "defeatist | comprehensive | brute")
      ->check(CLI::IsMember({"defeatist", "comprehensive", "brute"}));

  // ---- experiment ----
  auto* experiment = app.add_subcommand("experiment", "run a named Monte-Carlo experiment");
  const std::vector<std::string> experiment_names = {
      "defeatist-success", "comprehensive-visits", "cell-regularity",
      "diameter",          "median-concentration", "example1"};
  std::string exp_name;
  experiment->add_option("name", exp_name, "one of: defeatist-success | comprehensive-visits | "
                                           "cell-regularity | diameter | median-concentration | "
                                           "example1")
      ->required();
  std::string exp_dist = "uniform", exp_out, exp_expectations;
  std::int64_t exp_n = -1, exp_n0 = -1, exp_trials = -1, exp_trees = -1, exp_queries = -1;
  std::int64_t exp_budget = -1;
  double exp_t = 1.0;
  int exp_d = -1, exp_parallel = 1;
  std::uint64_t exp_seed = 0;
  bool exp_seeded = false;
  std::vector<int> exp_d_grid;
  std::vector<std::int64_t> exp_n_grid, exp_k_grid;
  std::vector<double> exp_delta_grid, exp_query;
  experiment->add_option("--seed", exp_seed, "master seed (required; all randomness derives "
                                             "from it)")
      ->each([&](const std::string&) { exp_seeded = true; });
  experiment->add_option("--distribution", exp_dist, "uniform | corner | config path");
  experiment->add_option("--n", exp_n, "points per trial");
  experiment->add_option("--n0", exp_n0, "minimum leaf size (example1: override the formula)");
  experiment->add_option("--d", exp_d, "dimension");
  experiment->add_option("--d-grid", exp_d_grid, "dimension grid")->delimiter(',');
  experiment->add_option("--n-grid", exp_n_grid, "point-count grid")->delimiter(',');
  experiment->add_option("--k-grid", exp_k_grid, "fixed-point counts (median-concentration)")
      ->delimiter(',');
  experiment->add_option("--delta-grid", exp_delta_grid, "deviation grid (median-concentration)")
      ->delimiter(',');
  experiment->add_option("--t", exp_t, "interval length (median-concentration)");
  experiment->add_option("--trials", exp_trials, "trials per grid cell");
  experiment->add_option("--trees", exp_trees, "trees (cell-regularity, diameter)");
  experiment->add_option("--queries-per-tree", exp_queries, "queries per tree (diameter)");
  experiment->add_option("--query", exp_query, "fixed query point (default: sampled per trial)")
      ->delimiter(',');
  experiment->add_option("--budget", exp_budget, "coordinate budget n*d (example1 memory guard)");
  experiment->add_option("--parallel", exp_parallel, "worker threads (output is identical for "
                                                     "any value)");
  experiment->add_option("--out-dir", exp_out, "directory for trials.jsonl + summary.csv");
  experiment->add_option("--expectations", exp_expectations,
                         "expectations file with pilot-derived thresholds");

  CLI11_PARSE(app, argc, argv);

  try {
    if (build->parsed()) {
      std::shared_ptr<const kdt::DataSet> data;
      kdt::TreeConfig config;
      ordered_json manifest_params;
      if (!build_points.empty()) {
        auto pf = kdt::read_points_file(build_points);
        data = std::make_shared<const kdt::DataSet>(std::move(pf.data));
        config.bounding_box = pf.box;
        config.min_leaf_size = build_n0 > 0 ? build_n0 : pf.min_leaf_size.value_or(1);
        manifest_params["points"] = build_points;
      } else if (!build_dist.empty()) {
        const DistArg dist = parse_family(build_dist);
        if (build_d < 1 && dist.d) build_d = *dist.d;
        if (!build_seeded && dist.seed) {
          build_seed = *dist.seed;
          build_seeded = true;
        }
        if (build_n < 1 || build_d < 1)
          throw std::invalid_argument("build: sampling needs --n >= 1 and --d >= 1");
        if (!build_seeded)
          throw std::invalid_argument("build: sampling needs --seed (flag or config file)");
        kdt::Sampler sampler(dist.family.instantiate(build_d), build_seed);
        data = std::make_shared<const kdt::DataSet>(sampler.sample(build_n));
        config.min_leaf_size = build_n0 > 0 ? build_n0 : 1;
        manifest_params["distribution"] = build_dist;
        manifest_params["seed"] = build_seed;
      } else {
        throw std::invalid_argument("build: need --points or --distribution");
      }
      manifest_params["n"] = data->size();
      manifest_params["d"] = data->dim();
      manifest_params["n0"] = config.min_leaf_size;

      const kdt::KdTree tree = kdt::build_tree(data, config);
      const std::string doc = kdt::write_tree(tree);
      write_text_file(build_out, doc);

      ordered_json manifest;
      manifest["created_by"] = "kdt build";
      manifest["params"] = manifest_params;
      manifest["leaves"] = tree.leaf_count();
      manifest["depth"] = tree.depth();
      manifest["content_hash"] = "fnv1a64:" + kdt::fnv1a64_hex(doc);
      write_text_file(build_out + ".manifest.json", manifest.dump(2) + "\n");

      std::cout << "built tree: n=" << data->size() << " d=" << data->dim()
                << " n0=" << config.min_leaf_size << " leaves=" << tree.leaf_count()
                << " depth=" << tree.depth() << " -> " << build_out << "\n";
      return 0;
    }

    if (query->parsed()) {
      const kdt::KdTree tree = kdt::read_tree_file(query_tree);
      kdt::SearchOutcome outcome;
      if (query_mode == "brute") {
        outcome = kdt::brute_force_nn(tree.data(), query_point);
      } else if (query_mode == "defeatist") {
        outcome = kdt::defeatist_search(tree, query_point);
      } else {
        outcome = kdt::comprehensive_search(tree, query_point);
      }
      std::cout << describe_outcome(outcome) << "\n";
      return 0;
    }

    // experiment
    const DistArg dist = parse_family(exp_dist);
    if (exp_d < 1 && exp_d_grid.empty() && dist.d) exp_d = *dist.d;
    if (!exp_seeded && dist.seed) {
      exp_seed = *dist.seed;
      exp_seeded = true;
    }
    if (!exp_seeded)
      throw std::invalid_argument("experiment: --seed is required (flag or config file)");
    const std::optional<std::string> expectations =
        exp_expectations.empty() ? std::nullopt : std::optional<std::string>(exp_expectations);
    const std::optional<std::vector<double>> fixed_query =
        exp_query.empty() ? std::nullopt : std::optional<std::vector<double>>(exp_query);

    if (exp_name == "defeatist-success") {
      kdt::DefeatistSuccessParams p;
      p.family = dist.family;
      if (exp_n > 0) p.n = exp_n;
      if (exp_n0 > 0) p.n0 = exp_n0;
      if (!exp_d_grid.empty()) p.d_grid = exp_d_grid;
      else if (exp_d > 0) p.d_grid = {exp_d};
      if (exp_trials > 0) p.trials = exp_trials;
      p.seed = exp_seed;
      p.parallelism = exp_parallel;
      p.fixed_query = fixed_query;
      return report_and_write(kdt::run_defeatist_success(p), exp_out, expectations);
    }
    if (exp_name == "comprehensive-visits") {
      kdt::ComprehensiveVisitsParams p;
      p.family = dist.family;
      if (!exp_n_grid.empty()) p.n_grid = exp_n_grid;
      else if (exp_n > 0) p.n_grid = {exp_n};
      if (!exp_d_grid.empty()) p.d_grid = exp_d_grid;
      else if (exp_d > 0) p.d_grid = {exp_d};
      if (exp_n0 > 0) p.n0 = exp_n0;
      if (exp_trials > 0) p.trials = exp_trials;
      p.seed = exp_seed;
      p.parallelism = exp_parallel;
      p.fixed_query = fixed_query;
      return report_and_write(kdt::run_comprehensive_visits(p), exp_out, expectations);
    }
    if (exp_name == "cell-regularity") {
      kdt::CellRegularityParams p;
      if (exp_n > 0) p.n = exp_n;
      if (exp_n0 > 0) p.n0 = exp_n0;
      if (exp_d > 0) p.d = exp_d;
      if (exp_trees > 0) p.trees = exp_trees;
      p.seed = exp_seed;
      p.parallelism = exp_parallel;
      return report_and_write(kdt::run_cell_regularity_audit(p), exp_out, expectations);
    }
    if (exp_name == "diameter") {
      kdt::DiameterParams p;
      p.family = dist.family;
      if (exp_n > 0) p.n = exp_n;
      if (exp_n0 > 0) p.n0 = exp_n0;
      if (!exp_d_grid.empty()) p.d_grid = exp_d_grid;
      else if (exp_d > 0) p.d_grid = {exp_d};
      if (exp_trees > 0) p.trees = exp_trees;
      if (exp_queries > 0) p.queries_per_tree = exp_queries;
      p.seed = exp_seed;
      p.parallelism = exp_parallel;
      return report_and_write(kdt::run_diameter_experiment(p), exp_out, expectations);
    }
    if (exp_name == "median-concentration") {
      kdt::MedianConcentrationParams p;
      if (!exp_n_grid.empty()) p.n_grid = exp_n_grid;
      if (!exp_k_grid.empty()) p.k_grid = exp_k_grid;
      if (!exp_delta_grid.empty()) p.delta_grid = exp_delta_grid;
      p.t = exp_t;
      if (exp_trials > 0) p.trials = exp_trials;
      p.seed = exp_seed;
      p.parallelism = exp_parallel;
      return report_and_write(kdt::run_median_concentration(p), exp_out, expectations);
    }
    if (exp_name == "example1") {
      kdt::Example1Params p;
      if (exp_d > 0) p.d = exp_d;
      if (exp_trials > 0) p.trials = exp_trials;
      if (exp_n0 > 0) p.n0_override = exp_n0;
      if (exp_budget > 0) p.max_coord_budget = exp_budget;
      p.seed = exp_seed;
      p.parallelism = exp_parallel;
      return report_and_write(kdt::run_example1(p), exp_out, expectations);
    }

    std::string names;
    for (const auto& n : experiment_names) names += (names.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown experiment \"" + exp_name + "\" (valid: " + names + ")");
  } catch (const kdt::ExperimentAbort& e) {
    std::cerr << "abort: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
