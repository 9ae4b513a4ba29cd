// Seeded Monte-Carlo runners that measure, at desk scale, the events and
// quantities behind the tree's performance bounds: defeatist accuracy,
// comprehensive visit counts, leaf-cell regularity, leaf diameters, and
// median concentration. Every trial derives its RNG stream from
// (master seed, trial index), so results are bit-identical under any
// parallelism degree.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kdt/distribution.hpp"
#include "kdt/stats.hpp"

#include "json.hpp"

namespace kdt {

struct TrialRecord {
  std::int64_t trial = 0;
  std::uint64_t seed = 0;
  nlohmann::ordered_json params;        // the trial's cell of the parameter grid
  nlohmann::ordered_json measurements;  // named numbers (arrays allowed for profiles)
};

struct SummaryRow {
  std::string group;
  std::string measurement;
  std::int64_t count = 0;
  double mean = 0.0, min = 0.0, max = 0.0;
  std::optional<WilsonInterval> wilson;  // binary measurements only
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ExperimentResult {
  std::string experiment;
  nlohmann::ordered_json params;  // run-level parameters (excluding parallelism)
  std::vector<TrialRecord> records;
  std::vector<SummaryRow> summary;
  std::vector<CheckResult> checks;
  std::vector<std::string> notes;

  bool ok() const;
};

/// Thrown when a trial violates an always-true invariant (e.g. comprehensive
/// search disagreeing with the brute-force oracle). Carries the offending seed.
struct ExperimentAbort : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string records_to_jsonl(const ExperimentResult& result);
std::string summary_to_csv(const ExperimentResult& result);

/// A distribution family that can be instantiated at any dimension of a grid.
struct DistributionFamily {
  std::string type;                     // uniform | product | corner
  std::optional<MarginalSpec> shared;   // product only: one marginal for all axes

  static DistributionFamily uniform();
  static DistributionFamily corner();
  static DistributionFamily product(MarginalSpec shared);
  static DistributionFamily from_json(const nlohmann::json& j);

  DistributionSpec instantiate(int d) const;
};

struct DefeatistSuccessParams {
  DistributionFamily family = DistributionFamily::uniform();
  std::int64_t n = 1024;
  std::int64_t n0 = 4;
  std::vector<int> d_grid = {2, 8, 32, 128, 512};
  std::int64_t trials = 2000;  // per grid entry
  std::uint64_t seed = 1;
  int parallelism = 1;
  std::optional<std::vector<double>> fixed_query;  // default: q sampled per trial
};

/// Per trial: fresh dataset + query, defeatist vs. brute force, plus the
/// fixed-index baseline (does point 0 land in q's leaf).
ExperimentResult run_defeatist_success(const DefeatistSuccessParams& p);

struct ComprehensiveVisitsParams {
  DistributionFamily family = DistributionFamily::uniform();
  std::vector<std::int64_t> n_grid = {1024};
  std::vector<int> d_grid = {512};
  std::int64_t n0 = 16;
  std::int64_t trials = 500;  // per (n, d) cell
  std::uint64_t seed = 1;
  int parallelism = 1;
  std::optional<std::vector<double>> fixed_query;
};

/// Per trial: visited-leaf count of comprehensive search (asserted against
/// the oracle), with the all-leaves-visited event tracked per cell.
ExperimentResult run_comprehensive_visits(const ComprehensiveVisitsParams& p);

struct CellRegularityParams {
  std::int64_t n = std::int64_t{1} << 16;
  std::int64_t n0 = 64;  // the audit requires n0 >= 11
  int d = 8;
  std::int64_t trees = 20;
  std::uint64_t seed = 1;
  int parallelism = 1;
};

/// Uniform data only: audits every leaf's aspect ratio (<= 4) and exact
/// probability mass (within [n0/2n, 2n0/n]).
ExperimentResult run_cell_regularity_audit(const CellRegularityParams& p);

struct DiameterParams {
  DistributionFamily family = DistributionFamily::uniform();
  std::int64_t n = std::int64_t{1} << 15;
  std::int64_t n0 = 64;
  std::vector<int> d_grid = {2, 4, 8};
  std::int64_t trees = 10;           // per grid entry
  std::int64_t queries_per_tree = 100;
  std::uint64_t seed = 1;
  int parallelism = 1;
};

/// Mean L1 diameter of the query's leaf cell against the 6 d (n0/n)^(1/d)
/// ceiling, plus the per-level mass-weighted diameter profile
/// A(l) = sum over cells at level l of mass(C) * l1_diameter(C).
ExperimentResult run_diameter_experiment(const DiameterParams& p);

struct MedianConcentrationParams {
  std::vector<std::int64_t> n_grid = {100, 200, 400};
  std::vector<std::int64_t> k_grid = {0, 10};
  double t = 1.0;
  std::vector<double> delta_grid = {0.15, 0.2};
  std::int64_t trials = 100000;  // medians per (cell, placement)
  std::uint64_t seed = 1;
  int parallelism = 1;
};

/// Simulates the median of n points where k are adversarially fixed (at
/// t/2 + delta for the upper tail, t/2 - delta for the lower) and n - k are
/// uniform on [0, t]; compares the empirical deviation rate against
/// 2 exp(-2 (n-k) (delta/t - k/(2(n-k)))^2). Requires delta/t > k/(2(n-k)).
ExperimentResult run_median_concentration(const MedianConcentrationParams& p);

struct Example1Params {
  int d = 8;
  std::int64_t trials = 25;
  std::optional<std::int64_t> n0_override;  // n is always n0 * 2^d
  std::int64_t max_coord_budget = 200'000'000;  // refuse when n * d exceeds this
  std::uint64_t seed = 1;
  int parallelism = 1;
};

/// Corner-distribution end-to-end run. Records, per trial: (a) all splits in
/// the center band, (b) query is a corner point, (c) every corner occupied,
/// plus defeatist correctness and the comprehensive visited-leaf count.
/// Whenever (a), (b), (c) all hold, defeatist must be correct and
/// comprehensive must visit exactly one leaf; a violation aborts the run.
ExperimentResult run_example1(const Example1Params& p);

/// Threshold checks loaded from an expectations document. Entries whose
/// "experiment" and "match" subset agree with the run's parameters contribute
/// checks against the summary rows.
std::vector<CheckResult> apply_expectations(const nlohmann::json& expectations,
                                            const ExperimentResult& result);

}  // namespace kdt
