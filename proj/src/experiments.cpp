#include "kdt/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "kdt/search.hpp"
#include "kdt/tree.hpp"

namespace kdt {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

/// Runs body(0..count-1) on `degree` threads. Trials own their state, so the
/// schedule cannot affect results; the first exception wins and is rethrown.
void run_parallel(std::int64_t count, int degree, const std::function<void(std::int64_t)>& body) {
  degree = static_cast<int>(std::min<std::int64_t>(std::max(degree, 1), count));
  if (degree <= 1) {
    for (std::int64_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  auto worker = [&]() {
    for (;;) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= count || failed.load()) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(degree));
  for (int t = 0; t < degree; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

class SummaryBuilder {
 public:
  void add(const std::string& group, const nlohmann::ordered_json& measurements) {
    Group& g = group_entry(group);
    for (const auto& [key, value] : measurements.items()) {
      if (!value.is_number()) continue;  // profiles etc. stay in the JSONL only
      accumulator(g, key).add(value.get<double>());
    }
  }

  double mean(const std::string& group, const std::string& measurement) const {
    for (const auto& g : groups_) {
      if (g.name != group) continue;
      for (const auto& [key, acc] : g.measurements) {
        if (key == measurement) return acc.mean();
      }
    }
    throw std::logic_error("summary: unknown group/measurement " + group + "/" + measurement);
  }

  std::optional<WilsonInterval> wilson(const std::string& group,
                                       const std::string& measurement) const {
    for (const auto& g : groups_) {
      if (g.name != group) continue;
      for (const auto& [key, acc] : g.measurements) {
        if (key == measurement) return acc.wilson();
      }
    }
    return std::nullopt;
  }

  std::vector<SummaryRow> rows() const {
    std::vector<SummaryRow> out;
    for (const auto& g : groups_) {
      for (const auto& [key, acc] : g.measurements) {
        SummaryRow row;
        row.group = g.name;
        row.measurement = key;
        row.count = acc.count();
        row.mean = acc.mean();
        row.min = acc.min();
        row.max = acc.max();
        row.wilson = acc.wilson();
        out.push_back(std::move(row));
      }
    }
    return out;
  }

 private:
  struct Group {
    std::string name;
    std::vector<std::pair<std::string, Accumulator>> measurements;
  };

  Group& group_entry(const std::string& name) {
    for (auto& g : groups_) {
      if (g.name == name) return g;
    }
    groups_.push_back({name, {}});
    return groups_.back();
  }

  static Accumulator& accumulator(Group& g, const std::string& key) {
    for (auto& [k, acc] : g.measurements) {
      if (k == key) return acc;
    }
    g.measurements.emplace_back(key, Accumulator{});
    return g.measurements.back().second;
  }

  std::vector<Group> groups_;
};

std::string group_key(std::initializer_list<std::pair<const char*, std::string>> parts) {
  std::string out;
  for (const auto& [k, v] : parts) {
    if (!out.empty()) out += ';';
    out += k;
    out += '=';
    out += v;
  }
  return out;
}

std::string itoa64(std::int64_t v) { return std::to_string(v); }

void assert_oracle_agreement(const SearchOutcome& comprehensive, const SearchOutcome& oracle,
                             const std::string& experiment, std::int64_t trial,
                             std::uint64_t seed) {
  if (comprehensive.index == oracle.index) return;
  std::ostringstream os;
  os << experiment << ": comprehensive search disagrees with the brute-force oracle (trial "
     << trial << ", seed " << seed << "): got index " << comprehensive.index << ", oracle "
     << oracle.index;
  throw ExperimentAbort(os.str());
}

bool is_power_of_two(std::int64_t v) { return v > 0 && (v & (v - 1)) == 0; }

}  // namespace

bool ExperimentResult::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::string records_to_jsonl(const ExperimentResult& result) {
  std::string out;
  for (const auto& rec : result.records) {
    nlohmann::ordered_json line;
    line["experiment"] = result.experiment;
    line["trial"] = rec.trial;
    line["seed"] = rec.seed;
    line["params"] = rec.params;
    line["measurements"] = rec.measurements;
    out += line.dump();
    out += '\n';
  }
  return out;
}

std::string summary_to_csv(const ExperimentResult& result) {
  std::string out = "experiment,group,measurement,count,mean,min,max,wilson_lo,wilson_hi\n";
  for (const auto& row : result.summary) {
    out += result.experiment;
    out += ',';
    out += row.group;
    out += ',';
    out += row.measurement;
    out += ',';
    out += itoa64(row.count);
    out += ',';
    out += format_double(row.mean);
    out += ',';
    out += format_double(row.min);
    out += ',';
    out += format_double(row.max);
    out += ',';
    if (row.wilson) {
      out += format_double(row.wilson->lo);
      out += ',';
      out += format_double(row.wilson->hi);
    } else {
      out += ',';
    }
    out += '\n';
  }
  return out;
}

DistributionFamily DistributionFamily::uniform() { return {"uniform", std::nullopt}; }
DistributionFamily DistributionFamily::corner() { return {"corner", std::nullopt}; }

DistributionFamily DistributionFamily::product(MarginalSpec shared) {
  shared.finalize();
  return {"product", std::move(shared)};
}

DistributionFamily DistributionFamily::from_json(const nlohmann::json& j) {
  require(j.is_object() && j.contains("type"), "distribution family: missing \"type\"");
  const std::string type = j.at("type").get<std::string>();
  if (type == "uniform") return uniform();
  if (type == "corner") return corner();
  if (type == "product") return product(MarginalSpec::from_json(j));
  throw std::invalid_argument("distribution family: unknown type \"" + type + "\"");
}

DistributionSpec DistributionFamily::instantiate(int d) const {
  if (type == "uniform") return DistributionSpec::uniform(d);
  if (type == "corner") return DistributionSpec::corner(d);
  if (type == "product") return DistributionSpec::product(d, *shared);
  throw std::logic_error("distribution family: unknown type \"" + type + "\"");
}

namespace {

nlohmann::ordered_json family_params(const DistributionFamily& family) {
  nlohmann::ordered_json j;
  j["type"] = family.type;
  if (family.shared) {
    j["breakpoints"] = family.shared->breakpoints;
    j["masses"] = family.shared->masses;
  }
  return j;
}

}  // namespace

ExperimentResult run_defeatist_success(const DefeatistSuccessParams& p) {
  require(p.n >= 1 && p.n0 >= 1, "defeatist-success: need n >= 1 and n0 >= 1");
  require(!p.d_grid.empty(), "defeatist-success: empty d grid");
  require(p.trials >= 1, "defeatist-success: trials must be >= 1");
  if (p.fixed_query) {
    for (int d : p.d_grid)
      require(static_cast<int>(p.fixed_query->size()) == d,
              "defeatist-success: fixed query dimension must match every d in the grid");
  }

  ExperimentResult result;
  result.experiment = "defeatist-success";
  result.params = {{"distribution", family_params(p.family)},
                   {"n", p.n},
                   {"n0", p.n0},
                   {"d_grid", p.d_grid},
                   {"trials", p.trials},
                   {"seed", p.seed},
                   {"query", p.fixed_query ? nlohmann::ordered_json(*p.fixed_query)
                                           : nlohmann::ordered_json("sampled")}};

  std::vector<DistributionSpec> specs;
  specs.reserve(p.d_grid.size());
  for (int d : p.d_grid) specs.push_back(p.family.instantiate(d));

  const std::int64_t total = static_cast<std::int64_t>(p.d_grid.size()) * p.trials;
  result.records.resize(static_cast<std::size_t>(total));
  run_parallel(total, p.parallelism, [&](std::int64_t t) {
    const std::size_t cell = static_cast<std::size_t>(t / p.trials);
    const int d = p.d_grid[cell];
    TrialRecord& rec = result.records[static_cast<std::size_t>(t)];
    rec.trial = t;
    rec.seed = derive_seed(p.seed, static_cast<std::uint64_t>(t));
    rec.params = {{"n", p.n}, {"n0", p.n0}, {"d", d}, {"distribution", p.family.type}};

    Sampler sampler(specs[cell], rec.seed);
    auto data = std::make_shared<const DataSet>(sampler.sample(p.n));
    const std::vector<double> q = p.fixed_query ? *p.fixed_query : sampler.sample_point();
    const KdTree tree = build_tree(data, TreeConfig{p.n0, std::nullopt});

    const SearchOutcome defeatist = defeatist_search(tree, q);
    const SearchOutcome oracle = brute_force_nn(*data, q);
    const auto leaf_points = tree.node_points(locate_leaf(tree, q));
    const bool in_leaf = std::binary_search(leaf_points.begin(), leaf_points.end(),
                                            std::int64_t{0});

    rec.measurements = {{"defeatist_correct", defeatist.index == oracle.index ? 1 : 0},
                        {"fixed_index_in_leaf", in_leaf ? 1 : 0},
                        {"defeatist_distance", defeatist.distance},
                        {"oracle_distance", oracle.distance},
                        {"leaf_size", static_cast<std::int64_t>(leaf_points.size())}};
  });

  SummaryBuilder summary;
  for (const auto& rec : result.records) {
    summary.add(group_key({{"d", rec.params.at("d").dump()}}), rec.measurements);
  }
  result.summary = summary.rows();

  // Baseline sanity: in the regular regime every leaf holds exactly n0
  // points, so a fixed index lands in q's leaf with probability n0/n.
  const bool regular = p.n % p.n0 == 0 && is_power_of_two(p.n / p.n0);
  if (regular) {
    const double p0 = static_cast<double>(p.n0) / static_cast<double>(p.n);
    const double sigma = std::sqrt(p0 * (1.0 - p0) / static_cast<double>(p.trials));
    for (int d : p.d_grid) {
      const std::string g = group_key({{"d", std::to_string(d)}});
      const double rate = summary.mean(g, "fixed_index_in_leaf");
      const bool pass = std::abs(rate - p0) <= 3.0 * sigma;
      result.checks.push_back({"baseline_rate(" + g + ")", pass,
                               "rate " + format_double(rate) + " vs n0/n " + format_double(p0) +
                                   " (3 sigma = " + format_double(3.0 * sigma) + ")"});
    }
  } else {
    result.notes.push_back(
        "n / n0 is not a power of two; fixed-index baseline n0/n does not apply exactly");
  }

  if (p.d_grid.size() >= 2) {
    std::vector<double> rates;
    for (int d : p.d_grid) {
      rates.push_back(summary.mean(group_key({{"d", std::to_string(d)}}), "defeatist_correct"));
    }
    bool monotone = true;
    for (std::size_t i = 1; i < rates.size(); ++i) monotone &= rates[i] < rates[i - 1];
    std::string shown;
    for (double r : rates) shown += (shown.empty() ? "" : " > ") + format_double(r);
    result.checks.push_back({"success_rate_monotone_decreasing", monotone, shown});

    const auto first = summary.wilson(group_key({{"d", std::to_string(p.d_grid.front())}}),
                                      "defeatist_correct");
    const auto last = summary.wilson(group_key({{"d", std::to_string(p.d_grid.back())}}),
                                     "defeatist_correct");
    const bool separated = first && last && last->hi < first->lo;
    result.checks.push_back(
        {"ci_separation_first_vs_last_d", separated,
         first && last ? "[" + format_double(first->lo) + ", " + format_double(first->hi) +
                             "] vs [" + format_double(last->lo) + ", " + format_double(last->hi) +
                             "]"
                       : "intervals unavailable"});
  }
  return result;
}

ExperimentResult run_comprehensive_visits(const ComprehensiveVisitsParams& p) {
  require(!p.n_grid.empty() && !p.d_grid.empty(), "comprehensive-visits: empty grid");
  require(p.n0 >= 1 && p.trials >= 1, "comprehensive-visits: need n0 >= 1 and trials >= 1");
  for (std::int64_t n : p.n_grid) require(n >= 1, "comprehensive-visits: n must be >= 1");
  if (p.fixed_query) {
    for (int d : p.d_grid)
      require(static_cast<int>(p.fixed_query->size()) == d,
              "comprehensive-visits: fixed query dimension must match every d in the grid");
  }

  ExperimentResult result;
  result.experiment = "comprehensive-visits";
  result.params = {{"distribution", family_params(p.family)},
                   {"n_grid", p.n_grid},
                   {"d_grid", p.d_grid},
                   {"n0", p.n0},
                   {"trials", p.trials},
                   {"seed", p.seed},
                   {"query", p.fixed_query ? nlohmann::ordered_json(*p.fixed_query)
                                           : nlohmann::ordered_json("sampled")}};

  struct Cell {
    std::int64_t n;
    int d;
  };
  std::vector<Cell> cells;
  for (std::int64_t n : p.n_grid) {
    for (int d : p.d_grid) cells.push_back({n, d});
  }
  std::vector<DistributionSpec> specs;
  specs.reserve(cells.size());
  for (const Cell& c : cells) specs.push_back(p.family.instantiate(c.d));

  const std::int64_t total = static_cast<std::int64_t>(cells.size()) * p.trials;
  result.records.resize(static_cast<std::size_t>(total));
  run_parallel(total, p.parallelism, [&](std::int64_t t) {
    const std::size_t ci = static_cast<std::size_t>(t / p.trials);
    const Cell cell = cells[ci];
    TrialRecord& rec = result.records[static_cast<std::size_t>(t)];
    rec.trial = t;
    rec.seed = derive_seed(p.seed, static_cast<std::uint64_t>(t));
    rec.params = {
        {"n", cell.n}, {"n0", p.n0}, {"d", cell.d}, {"distribution", p.family.type}};

    Sampler sampler(specs[ci], rec.seed);
    auto data = std::make_shared<const DataSet>(sampler.sample(cell.n));
    const std::vector<double> q = p.fixed_query ? *p.fixed_query : sampler.sample_point();
    const KdTree tree = build_tree(data, TreeConfig{p.n0, std::nullopt});

    const SearchOutcome comp = comprehensive_search(tree, q);
    const SearchOutcome oracle = brute_force_nn(*data, q);
    assert_oracle_agreement(comp, oracle, result.experiment, t, rec.seed);

    rec.measurements = {{"visited_leaves", comp.visited_leaves},
                        {"total_leaves", tree.leaf_count()},
                        {"all_leaves_visited", comp.visited_leaves == tree.leaf_count() ? 1 : 0},
                        {"backtracks", comp.backtracks},
                        {"distance_computations", comp.distance_computations}};
  });

  SummaryBuilder summary;
  for (const auto& rec : result.records) {
    summary.add(group_key({{"n", rec.params.at("n").dump()}, {"d", rec.params.at("d").dump()}}),
                rec.measurements);
  }
  result.summary = summary.rows();

  // For uniform data with d >= log2(n/n0), every leaf is visited with
  // probability at least 1 - n (2 pi e log2(n/n0) / d)^(d/2); report the
  // closed form next to the measured rate.
  if (p.family.type == "uniform") {
    for (const Cell& cell : cells) {
      if (cell.n % p.n0 != 0 || !is_power_of_two(cell.n / p.n0)) continue;
      const double levels = std::log2(static_cast<double>(cell.n / p.n0));
      if (static_cast<double>(cell.d) < levels || levels <= 0.0) continue;
      const double log_term = 0.5 * static_cast<double>(cell.d) *
                              std::log(2.0 * M_PI * M_E * levels / static_cast<double>(cell.d));
      const double failure = std::exp(std::log(static_cast<double>(cell.n)) + log_term);
      result.notes.push_back("closed-form all-leaves-visited lower bound at n=" +
                             std::to_string(cell.n) + ", d=" + std::to_string(cell.d) + ": " +
                             format_double(std::max(0.0, 1.0 - failure)));
    }
  }

  // n-independence: visited counts must not grow with n (the ceiling depends
  // on d alone). Tested against 2x the smallest-n mean per dimension.
  if (p.n_grid.size() >= 2) {
    const std::int64_t n_min = *std::min_element(p.n_grid.begin(), p.n_grid.end());
    for (int d : p.d_grid) {
      const double base = summary.mean(
          group_key({{"n", std::to_string(n_min)}, {"d", std::to_string(d)}}), "visited_leaves");
      bool pass = true;
      std::string shown;
      for (std::int64_t n : p.n_grid) {
        const double mean = summary.mean(
            group_key({{"n", std::to_string(n)}, {"d", std::to_string(d)}}), "visited_leaves");
        pass &= mean <= 2.0 * base;
        shown += (shown.empty() ? "" : ", ") + format_double(mean);
      }
      result.checks.push_back({"visited_mean_plateau(d=" + std::to_string(d) + ")", pass,
                               "means across n grid: " + shown + " (ceiling 2 x smallest-n mean " +
                                   format_double(base) + ")"});
    }
  }
  return result;
}

ExperimentResult run_cell_regularity_audit(const CellRegularityParams& p) {
  require(p.n0 >= 11, "cell-regularity: the audit requires n0 >= 11");
  require(p.n >= 1 && p.d >= 1 && p.trees >= 1, "cell-regularity: invalid parameters");

  ExperimentResult result;
  result.experiment = "cell-regularity";
  result.params = {{"distribution", nlohmann::ordered_json{{"type", "uniform"}}},
                   {"n", p.n},
                   {"n0", p.n0},
                   {"d", p.d},
                   {"trees", p.trees},
                   {"seed", p.seed}};

  const double mass_lo = static_cast<double>(p.n0) / (2.0 * static_cast<double>(p.n));
  const double mass_hi = 2.0 * static_cast<double>(p.n0) / static_cast<double>(p.n);
  const DistributionSpec spec = DistributionSpec::uniform(p.d);

  result.records.resize(static_cast<std::size_t>(p.trees));
  run_parallel(p.trees, p.parallelism, [&](std::int64_t t) {
    TrialRecord& rec = result.records[static_cast<std::size_t>(t)];
    rec.trial = t;
    rec.seed = derive_seed(p.seed, static_cast<std::uint64_t>(t));
    rec.params = {{"n", p.n}, {"n0", p.n0}, {"d", p.d}, {"distribution", "uniform"}};

    Sampler sampler(spec, rec.seed);
    auto data = std::make_shared<const DataSet>(sampler.sample(p.n));
    const KdTree tree = build_tree(data, TreeConfig{p.n0, std::nullopt});

    double max_aspect = 0.0, min_mass = 1.0, max_mass = 0.0;
    std::int64_t aspect_violations = 0, mass_violations = 0;
    for (NodeId leaf : tree.leaves()) {
      const Rect& cell = tree.cell_of_node(leaf);
      double smallest = cell.side(0), largest = cell.side(0);
      for (int i = 1; i < p.d; ++i) {
        smallest = std::min(smallest, cell.side(i));
        largest = std::max(largest, cell.side(i));
      }
      const double aspect =
          smallest > 0.0 ? largest / smallest : std::numeric_limits<double>::infinity();
      const double mass = spec.cell_mass(cell);
      max_aspect = std::max(max_aspect, aspect);
      min_mass = std::min(min_mass, mass);
      max_mass = std::max(max_mass, mass);
      if (aspect > 4.0) ++aspect_violations;
      if (mass < mass_lo || mass > mass_hi) ++mass_violations;
    }
    rec.measurements = {{"leaf_count", tree.leaf_count()},
                        {"max_aspect_ratio", max_aspect},
                        {"min_leaf_mass", min_mass},
                        {"max_leaf_mass", max_mass},
                        {"aspect_violations", aspect_violations},
                        {"mass_violations", mass_violations}};
  });

  SummaryBuilder summary;
  for (const auto& rec : result.records) summary.add("all", rec.measurements);
  result.summary = summary.rows();

  std::int64_t aspect_total = 0, mass_total = 0;
  for (const auto& rec : result.records) {
    aspect_total += rec.measurements.at("aspect_violations").get<std::int64_t>();
    mass_total += rec.measurements.at("mass_violations").get<std::int64_t>();
  }
  result.checks.push_back({"zero_aspect_violations", aspect_total == 0,
                           itoa64(aspect_total) + " leaves with aspect ratio > 4"});
  result.checks.push_back({"zero_mass_violations", mass_total == 0,
                           itoa64(mass_total) + " leaves with mass outside [" +
                               format_double(mass_lo) + ", " + format_double(mass_hi) + "]"});
  return result;
}

ExperimentResult run_diameter_experiment(const DiameterParams& p) {
  require(!p.d_grid.empty(), "diameter: empty d grid");
  require(p.n >= 1 && p.n0 >= 1, "diameter: need n >= 1 and n0 >= 1");
  require(p.trees >= 1 && p.queries_per_tree >= 1,
          "diameter: need trees >= 1 and queries_per_tree >= 1");

  ExperimentResult result;
  result.experiment = "diameter";
  result.params = {{"distribution", family_params(p.family)},
                   {"n", p.n},
                   {"n0", p.n0},
                   {"d_grid", p.d_grid},
                   {"trees", p.trees},
                   {"queries_per_tree", p.queries_per_tree},
                   {"seed", p.seed}};

  std::vector<DistributionSpec> specs;
  specs.reserve(p.d_grid.size());
  for (int d : p.d_grid) specs.push_back(p.family.instantiate(d));

  const std::int64_t total = static_cast<std::int64_t>(p.d_grid.size()) * p.trees;
  result.records.resize(static_cast<std::size_t>(total));
  run_parallel(total, p.parallelism, [&](std::int64_t t) {
    const std::size_t cell = static_cast<std::size_t>(t / p.trees);
    const int d = p.d_grid[cell];
    TrialRecord& rec = result.records[static_cast<std::size_t>(t)];
    rec.trial = t;
    rec.seed = derive_seed(p.seed, static_cast<std::uint64_t>(t));
    rec.params = {{"n", p.n}, {"n0", p.n0}, {"d", d}, {"distribution", p.family.type}};

    Sampler sampler(specs[cell], rec.seed);
    auto data = std::make_shared<const DataSet>(sampler.sample(p.n));
    const KdTree tree = build_tree(data, TreeConfig{p.n0, std::nullopt});

    // Mass-weighted diameter profile: cells at level l are the nodes at that
    // level plus every leaf that stopped earlier.
    std::vector<double> profile(static_cast<std::size_t>(tree.depth()) + 1, 0.0);
    for (NodeId id = 0; id < tree.node_count(); ++id) {
      const KdNode& u = tree.node(id);
      const Rect& cell_rect = tree.cell_of_node(id);
      const double term = specs[cell].cell_mass(cell_rect) * l1_diameter(cell_rect);
      const std::size_t last =
          u.is_leaf() ? static_cast<std::size_t>(tree.depth()) : static_cast<std::size_t>(u.level);
      for (std::size_t l = static_cast<std::size_t>(u.level); l <= last; ++l) profile[l] += term;
    }
    bool monotone = true;
    for (std::size_t l = 1; l < profile.size(); ++l)
      monotone &= profile[l] <= profile[l - 1] + 1e-12;

    Accumulator diam;
    for (std::int64_t qi = 0; qi < p.queries_per_tree; ++qi) {
      const std::vector<double> q = sampler.sample_point();
      diam.add(l1_diameter(tree.cell_of_node(locate_leaf(tree, q))));
    }

    rec.measurements = {{"mean_leaf_l1_diameter", diam.mean()},
                        {"min_leaf_l1_diameter", diam.min()},
                        {"max_leaf_l1_diameter", diam.max()},
                        {"a0", profile.front()},
                        {"profile_monotone", monotone ? 1 : 0},
                        {"depth", tree.depth()},
                        {"level_profile", profile}};
  });

  SummaryBuilder summary;
  for (const auto& rec : result.records) {
    summary.add(group_key({{"d", rec.params.at("d").dump()}}), rec.measurements);
  }
  result.summary = summary.rows();

  for (std::size_t cell = 0; cell < p.d_grid.size(); ++cell) {
    const int d = p.d_grid[cell];
    const std::string g = group_key({{"d", std::to_string(d)}});
    const double mean = summary.mean(g, "mean_leaf_l1_diameter");
    const double bound = 6.0 * static_cast<double>(d) *
                         std::pow(static_cast<double>(p.n0) / static_cast<double>(p.n),
                                  1.0 / static_cast<double>(d));
    result.checks.push_back({"mean_diameter_bound(" + g + ")", mean <= bound,
                             format_double(mean) + " vs 6 d (n0/n)^(1/d) = " +
                                 format_double(bound)});
    bool a0_exact = true, all_monotone = true;
    for (std::int64_t t = static_cast<std::int64_t>(cell) * p.trees;
         t < static_cast<std::int64_t>(cell + 1) * p.trees; ++t) {
      const auto& m = result.records[static_cast<std::size_t>(t)].measurements;
      a0_exact &= m.at("a0").get<double>() == static_cast<double>(d);
      all_monotone &= m.at("profile_monotone").get<int>() == 1;
    }
    result.checks.push_back({"a0_equals_d(" + g + ")", a0_exact, "A(0) = d exactly in every tree"});
    result.checks.push_back(
        {"profile_monotone(" + g + ")", all_monotone, "A(l) nonincreasing in every tree"});
  }
  return result;
}

ExperimentResult run_median_concentration(const MedianConcentrationParams& p) {
  require(!p.n_grid.empty() && !p.k_grid.empty() && !p.delta_grid.empty(),
          "median-concentration: empty grid");
  require(p.t > 0.0, "median-concentration: t must be > 0");
  require(p.trials >= 1, "median-concentration: trials must be >= 1");

  struct Cell {
    std::int64_t n, k;
    double delta;
    double margin;  // delta/t - k / (2 (n - k))
  };
  std::vector<Cell> cells;
  for (std::int64_t n : p.n_grid) {
    for (std::int64_t k : p.k_grid) {
      for (double delta : p.delta_grid) {
        std::ostringstream os;
        os << "median-concentration: cell (n=" << n << ", k=" << k << ", delta=" << delta << "): ";
        require(n >= 1, os.str() + "n must be >= 1");
        require(k >= 0, os.str() + "k must be >= 0");
        if (k >= n)
          throw std::invalid_argument(os.str() +
                                      "hypothesis needs k < n (no random points otherwise)");
        const double margin =
            delta / p.t - static_cast<double>(k) / (2.0 * static_cast<double>(n - k));
        if (margin <= 0.0) {
          std::ostringstream detail;
          detail << os.str() << "hypothesis delta/t > k/(2(n-k)) fails: " << delta / p.t
                 << " <= " << static_cast<double>(k) / (2.0 * static_cast<double>(n - k));
          throw std::invalid_argument(detail.str());
        }
        cells.push_back({n, k, delta, margin});
      }
    }
  }

  ExperimentResult result;
  result.experiment = "median-concentration";
  result.params = {{"n_grid", p.n_grid},
                   {"k_grid", p.k_grid},
                   {"t", p.t},
                   {"delta_grid", p.delta_grid},
                   {"trials", p.trials},
                   {"seed", p.seed}};

  struct Unit {
    Cell cell;
    const char* placement;  // where the k fixed points sit
  };
  std::vector<Unit> units;
  for (const Cell& c : cells) {
    if (c.k == 0) {
      units.push_back({c, "none"});
    } else {
      units.push_back({c, "upper"});
      units.push_back({c, "lower"});
    }
  }

  result.records.resize(units.size());
  run_parallel(static_cast<std::int64_t>(units.size()), p.parallelism, [&](std::int64_t t) {
    const Unit& unit = units[static_cast<std::size_t>(t)];
    const Cell& c = unit.cell;
    TrialRecord& rec = result.records[static_cast<std::size_t>(t)];
    rec.trial = t;
    rec.seed = derive_seed(p.seed, static_cast<std::uint64_t>(t));
    rec.params = {{"n", c.n}, {"k", c.k}, {"delta", c.delta}, {"t", p.t},
                  {"placement", unit.placement}};

    const double fixed_at = unit.placement[0] == 'l' ? p.t / 2.0 - c.delta : p.t / 2.0 + c.delta;
    Rng rng(rec.seed);
    std::vector<double> values(static_cast<std::size_t>(c.n));
    std::int64_t deviations = 0;
    for (std::int64_t i = 0; i < p.trials; ++i) {
      for (std::int64_t j = 0; j < c.k; ++j) values[static_cast<std::size_t>(j)] = fixed_at;
      for (std::int64_t j = c.k; j < c.n; ++j)
        values[static_cast<std::size_t>(j)] = p.t * rng.next_double();
      const double median = median_order_statistic(values);
      if (std::abs(median - p.t / 2.0) >= c.delta) ++deviations;
    }
    const double bound =
        2.0 * std::exp(-2.0 * static_cast<double>(c.n - c.k) * c.margin * c.margin);
    rec.measurements = {{"deviations", deviations},
                        {"trials", p.trials},
                        {"empirical_rate", static_cast<double>(deviations) /
                                               static_cast<double>(p.trials)},
                        {"bound", bound}};
  });

  SummaryBuilder summary;
  for (std::size_t i = 0; i < units.size(); ++i) {
    const auto& rec = result.records[i];
    summary.add(group_key({{"n", rec.params.at("n").dump()},
                           {"k", rec.params.at("k").dump()},
                           {"delta", rec.params.at("delta").dump()},
                           {"placement", units[i].placement}}),
                rec.measurements);
  }
  result.summary = summary.rows();

  for (std::size_t i = 0; i < units.size(); ++i) {
    const auto& rec = result.records[i];
    const double rate = rec.measurements.at("empirical_rate").get<double>();
    const double bound = rec.measurements.at("bound").get<double>();
    const std::string g = group_key({{"n", rec.params.at("n").dump()},
                                     {"k", rec.params.at("k").dump()},
                                     {"delta", rec.params.at("delta").dump()},
                                     {"placement", units[i].placement}});
    result.checks.push_back({"deviation_bound(" + g + ")", rate <= bound,
                             format_double(rate) + " <= " + format_double(bound)});
  }
  return result;
}

ExperimentResult run_example1(const Example1Params& p) {
  const CornerDistributionParams ep = example1_params(p.d);
  const std::int64_t n0 = p.n0_override.value_or(ep.suggested_n0);
  require(n0 >= 1, "example1: n0 must be >= 1");
  require(p.trials >= 1, "example1: trials must be >= 1");

  const double n_estimate = static_cast<double>(n0) * std::exp2(static_cast<double>(p.d));
  const double coords = n_estimate * static_cast<double>(p.d);
  if (coords > static_cast<double>(p.max_coord_budget)) {
    std::ostringstream os;
    os << "example1: n * d = " << coords << " exceeds the coordinate budget "
       << p.max_coord_budget << "; lower d or override n0 (n is always n0 * 2^d)";
    throw std::invalid_argument(os.str());
  }
  const std::int64_t n = n0 * (std::int64_t{1} << p.d);

  ExperimentResult result;
  result.experiment = "example1";
  result.params = {{"d", p.d},
                   {"n0", n0},
                   {"n", n},
                   {"trials", p.trials},
                   {"seed", p.seed},
                   {"epsilon", ep.epsilon},
                   {"m_center", ep.m_center},
                   {"eta", ep.eta},
                   {"distribution", nlohmann::ordered_json{{"type", "corner"}}}};
  if (p.d == 2) result.notes.push_back("d = 2 is outside the asymptotic regime of the analysis");

  const DistributionSpec spec = DistributionSpec::corner(p.d);
  // Each in-flight trial holds an n x d dataset; cap concurrency by the same
  // coordinate budget that gates a single trial.
  const int degree = static_cast<int>(std::max<std::int64_t>(
      1, std::min<std::int64_t>(p.parallelism,
                                p.max_coord_budget / std::max<std::int64_t>(1, n * p.d))));

  result.records.resize(static_cast<std::size_t>(p.trials));
  run_parallel(p.trials, degree, [&](std::int64_t t) {
    TrialRecord& rec = result.records[static_cast<std::size_t>(t)];
    rec.trial = t;
    rec.seed = derive_seed(p.seed, static_cast<std::uint64_t>(t));
    rec.params = {{"n", n}, {"n0", n0}, {"d", p.d}, {"distribution", "corner"}};

    Sampler sampler(spec, rec.seed);
    auto data = std::make_shared<const DataSet>(sampler.sample(n));
    const std::vector<double> q = sampler.sample_point();
    const KdTree tree = build_tree(data, TreeConfig{n0, std::nullopt});

    bool splits_in_band = true;
    for (NodeId id = 0; id < tree.node_count(); ++id) {
      const KdNode& u = tree.node(id);
      if (u.is_leaf()) continue;
      splits_in_band &= u.rule.threshold >= 0.5 - ep.eta && u.rule.threshold <= 0.5 + ep.eta;
    }

    auto side_of = [&](double c) -> int {
      if (c <= ep.epsilon) return 0;
      if (c >= 1.0 - ep.epsilon) return 1;
      return -1;  // center band
    };
    bool q_corner = true;
    for (double c : q) q_corner &= side_of(c) >= 0;

    std::vector<char> occupied(static_cast<std::size_t>(std::int64_t{1} << p.d), 0);
    for (std::int64_t i = 0; i < n; ++i) {
      const auto pt = data->point(i);
      std::size_t corner_id = 0;
      bool corner_point = true;
      for (int j = 0; j < p.d && corner_point; ++j) {
        const int side = side_of(pt[static_cast<std::size_t>(j)]);
        if (side < 0) corner_point = false;
        else corner_id |= static_cast<std::size_t>(side) << j;
      }
      if (corner_point) occupied[corner_id] = 1;
    }
    const bool corners_occupied =
        std::all_of(occupied.begin(), occupied.end(), [](char c) { return c != 0; });

    const SearchOutcome defeatist = defeatist_search(tree, q);
    const SearchOutcome oracle = brute_force_nn(*data, q);
    const SearchOutcome comp = comprehensive_search(tree, q);
    assert_oracle_agreement(comp, oracle, result.experiment, t, rec.seed);
    const bool defeatist_correct = defeatist.index == oracle.index;
    const bool single_leaf = comp.visited_leaves == 1;

    if (splits_in_band && q_corner && corners_occupied && !(defeatist_correct && single_leaf)) {
      std::ostringstream os;
      os << "example1: events (a), (b), (c) hold but defeatist_correct=" << defeatist_correct
         << " visited_leaves=" << comp.visited_leaves << " (trial " << t << ", seed " << rec.seed
         << ")";
      throw ExperimentAbort(os.str());
    }

    rec.measurements = {{"splits_in_band", splits_in_band ? 1 : 0},
                        {"q_corner", q_corner ? 1 : 0},
                        {"corners_occupied", corners_occupied ? 1 : 0},
                        {"defeatist_correct", defeatist_correct ? 1 : 0},
                        {"single_leaf_visit", single_leaf ? 1 : 0},
                        {"visited_leaves", comp.visited_leaves},
                        {"total_leaves", tree.leaf_count()},
                        {"depth", tree.depth()}};
  });

  SummaryBuilder summary;
  for (const auto& rec : result.records) summary.add("all", rec.measurements);
  result.summary = summary.rows();

  result.checks.push_back(
      {"hard_assertion_abc_implies_success", true,
       "every trial with (a), (b), (c) had a correct defeatist answer and a single-leaf "
       "comprehensive search"});
  return result;
}

std::vector<CheckResult> apply_expectations(const nlohmann::json& expectations,
                                            const ExperimentResult& result) {
  std::vector<CheckResult> checks;
  if (!expectations.contains("entries")) return checks;
  for (const auto& entry : expectations.at("entries")) {
    if (entry.at("experiment").get<std::string>() != result.experiment) continue;
    bool matches = true;
    if (entry.contains("match")) {
      for (const auto& [key, value] : entry.at("match").items()) {
        matches &= result.params.contains(key) && result.params.at(key) == value;
      }
    }
    if (!matches) continue;
    for (const auto& check : entry.at("checks")) {
      const std::string type = check.at("type").get<std::string>();
      const std::string group = check.at("group").get<std::string>();
      const std::string measurement = check.at("measurement").get<std::string>();
      const double value = check.at("value").get<double>();
      const std::string name = "expectation:" + group + ":" + measurement;

      const SummaryRow* row = nullptr;
      for (const auto& r : result.summary) {
        if (r.group == group && r.measurement == measurement) {
          row = &r;
          break;
        }
      }
      if (!row) {
        checks.push_back({name, false, "no summary row for this group/measurement"});
        continue;
      }
      bool passed = false;
      if (type == "min_mean") {
        passed = row->mean >= value;
      } else if (type == "max_mean") {
        passed = row->mean <= value;
      } else {
        checks.push_back({name, false, "unknown expectation type \"" + type + "\""});
        continue;
      }
      checks.push_back({name, passed,
                        "mean " + format_double(row->mean) + (type == "min_mean" ? " >= " : " <= ") +
                            format_double(value)});
    }
  }
  return checks;
}

}  // namespace kdt
