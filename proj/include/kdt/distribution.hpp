// Product distributions on [0,1]^d with piecewise-constant marginals, the
// families the experiment harness samples from: uniform, general product
// specs, and the corner distribution (two edge intervals plus a thin center
// band). Piecewise-constant marginals keep cell probability masses exact,
// which the mass and diameter audits rely on.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kdt/dataset.hpp"
#include "kdt/rect.hpp"
#include "kdt/rng.hpp"

#include "json.hpp"

namespace kdt {

/// One piecewise-constant density on [0,1]: breakpoints b0 < ... < bk inside
/// [0,1] and one mass per interval [b_{i-1}, b_i]. Zero-mass intervals model
/// gaps in the support.
struct MarginalSpec {
  std::vector<double> breakpoints;
  std::vector<double> masses;

  static MarginalSpec uniform();

  /// Builds from disjoint ascending [lo, hi] intervals with one mass each;
  /// uncovered stretches become zero-mass gaps.
  static MarginalSpec from_intervals(const std::vector<std::pair<double, double>>& intervals,
                                     const std::vector<double>& masses);

  /// Accepts either {"breakpoints": [...], "masses": [...]} or
  /// {"intervals": [[lo, hi], ...], "masses": [...]}.
  static MarginalSpec from_json(const nlohmann::json& j);

  /// Validates shape (increasing breakpoints within [0,1], nonnegative masses
  /// summing to 1 within 1e-12) and freezes the normalized cumulative table.
  void finalize();

  double cdf(double x) const;
  double quantile(double u) const;  // inverse CDF, u in [0,1)
  double mass_between(double lo, double hi) const;

  /// Infimum of the density over all of [0,1]; zero when the breakpoints do
  /// not cover [0,1] or any interval has zero mass.
  double density_lower_bound() const;
  double density_upper_bound() const;

  bool finalized() const { return !cum_.empty(); }

 private:
  std::vector<double> cum_;  // size k+1, cum_[0] = 0, cum_[k] = 1 exactly
};

struct CornerDistributionParams {
  int d = 0;
  double epsilon = 0.0;   // 1 / (10 sqrt(d))
  double m_center = 0.0;  // 1 / (d log2 d)
  double eta = 0.0;       // d^-10, widened to stay representable around 1/2
  std::int64_t suggested_n0 = 0;  // ceil(d^3 log2(d)^3)
  std::int64_t suggested_n = 0;   // suggested_n0 * 2^d
};

/// Corner-distribution parameters for dimension d >= 2 (for d < 2 the three
/// marginal intervals would overlap).
CornerDistributionParams example1_params(int d);

class DistributionSpec {
 public:
  /// `id` is a short label recorded in trial records and file manifests.
  DistributionSpec(std::string id, std::vector<MarginalSpec> marginals);

  static DistributionSpec uniform(int d);
  static DistributionSpec product(int d, MarginalSpec shared, std::string id = "product");
  static DistributionSpec corner(int d);

  /// Config document: {"type": "uniform"|"product"|"corner", "d": ...,
  /// "breakpoints": [...], "masses": [...]} ("marginals" for per-dimension
  /// specs). See README for the full schema.
  static DistributionSpec from_json(const nlohmann::json& j);
  nlohmann::ordered_json to_json() const;

  const std::string& id() const { return id_; }
  int dim() const { return static_cast<int>(marginals_.size()); }
  const MarginalSpec& marginal(int i) const { return marginals_[static_cast<std::size_t>(i)]; }

  double marginal_cdf(int i, double x) const;

  /// Exact probability mass of a box (mass factorizes over dimensions).
  double cell_mass(const Rect& r) const;

 private:
  std::string id_;
  std::vector<MarginalSpec> marginals_;
};

/// Seeded sampling stream. One uniform draw per coordinate, mapped through
/// the marginal's inverse CDF; identical (spec, seed) gives a bit-identical
/// sequence on every platform.
class Sampler {
 public:
  Sampler(DistributionSpec spec, std::uint64_t seed) : spec_(std::move(spec)), rng_(seed) {}

  const DistributionSpec& spec() const { return spec_; }

  DataSet sample(std::int64_t count);
  std::vector<double> sample_point();

 private:
  DistributionSpec spec_;
  Rng rng_;
};

}  // namespace kdt
