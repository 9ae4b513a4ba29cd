#include "kdt/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace kdt {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

MarginalSpec MarginalSpec::uniform() {
  MarginalSpec m;
  m.breakpoints = {0.0, 1.0};
  m.masses = {1.0};
  m.finalize();
  return m;
}

MarginalSpec MarginalSpec::from_intervals(const std::vector<std::pair<double, double>>& intervals,
                                          const std::vector<double>& masses) {
  require(!intervals.empty(), "MarginalSpec: need at least one interval");
  require(intervals.size() == masses.size(), "MarginalSpec: one mass per interval");
  MarginalSpec m;
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    const auto [lo, hi] = intervals[i];
    require(lo < hi, "MarginalSpec: intervals must have positive width");
    if (i == 0) {
      m.breakpoints.push_back(lo);
    } else {
      require(lo >= intervals[i - 1].second, "MarginalSpec: intervals must be disjoint ascending");
      if (lo > intervals[i - 1].second) {  // gap carries zero mass
        m.breakpoints.push_back(lo);
        m.masses.push_back(0.0);
      }
    }
    m.breakpoints.push_back(hi);
    m.masses.push_back(masses[i]);
  }
  m.finalize();
  return m;
}

MarginalSpec MarginalSpec::from_json(const nlohmann::json& j) {
  MarginalSpec m;
  if (j.contains("intervals")) {
    std::vector<std::pair<double, double>> intervals;
    for (const auto& ij : j.at("intervals")) {
      require(ij.is_array() && ij.size() == 2, "MarginalSpec: each interval is a [lo, hi] pair");
      intervals.emplace_back(ij.at(0).get<double>(), ij.at(1).get<double>());
    }
    return from_intervals(intervals, j.at("masses").get<std::vector<double>>());
  }
  m.breakpoints = j.at("breakpoints").get<std::vector<double>>();
  m.masses = j.at("masses").get<std::vector<double>>();
  m.finalize();
  return m;
}

void MarginalSpec::finalize() {
  require(breakpoints.size() >= 2, "MarginalSpec: need at least one interval");
  require(masses.size() + 1 == breakpoints.size(),
          "MarginalSpec: need exactly one mass per interval");
  for (std::size_t i = 0; i < breakpoints.size(); ++i) {
    require(std::isfinite(breakpoints[i]) && breakpoints[i] >= 0.0 && breakpoints[i] <= 1.0,
            "MarginalSpec: breakpoints must lie in [0, 1]");
    if (i > 0) require(breakpoints[i] > breakpoints[i - 1],
                       "MarginalSpec: breakpoints must be strictly increasing");
  }
  double total = 0.0;
  for (double m : masses) {
    require(std::isfinite(m) && m >= 0.0, "MarginalSpec: masses must be nonnegative");
    total += m;
  }
  require(std::abs(total - 1.0) <= 1e-12, "MarginalSpec: masses must sum to 1");

  cum_.assign(breakpoints.size(), 0.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < masses.size(); ++i) {
    acc += masses[i];
    cum_[i + 1] = acc / total;
  }
  cum_.back() = 1.0;  // pin the top so CDF(1) = 1 exactly
}

double MarginalSpec::cdf(double x) const {
  if (x <= breakpoints.front()) return 0.0;
  if (x >= breakpoints.back()) return 1.0;
  const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
  const std::size_t piece = static_cast<std::size_t>(it - breakpoints.begin()) - 1;
  const double width = breakpoints[piece + 1] - breakpoints[piece];
  const double frac = (x - breakpoints[piece]) / width;
  return cum_[piece] + (cum_[piece + 1] - cum_[piece]) * frac;
}

double MarginalSpec::quantile(double u) const {
  // Single interval spanning [0,1] is the uniform marginal; skip the lookup.
  if (masses.size() == 1 && breakpoints.front() == 0.0 && breakpoints.back() == 1.0) return u;
  const auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
  const std::size_t piece =
      it == cum_.end() ? cum_.size() - 2 : static_cast<std::size_t>(it - cum_.begin()) - 1;
  const double span = cum_[piece + 1] - cum_[piece];
  const double frac = span > 0.0 ? (u - cum_[piece]) / span : 0.0;
  return breakpoints[piece] + (breakpoints[piece + 1] - breakpoints[piece]) * frac;
}

double MarginalSpec::mass_between(double lo, double hi) const {
  if (hi <= lo) return 0.0;
  return std::max(0.0, cdf(hi) - cdf(lo));
}

double MarginalSpec::density_lower_bound() const {
  if (breakpoints.front() > 0.0 || breakpoints.back() < 1.0) return 0.0;
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < masses.size(); ++i) {
    lo = std::min(lo, masses[i] / (breakpoints[i + 1] - breakpoints[i]));
  }
  return lo;
}

double MarginalSpec::density_upper_bound() const {
  double hi = 0.0;
  for (std::size_t i = 0; i < masses.size(); ++i) {
    hi = std::max(hi, masses[i] / (breakpoints[i + 1] - breakpoints[i]));
  }
  return hi;
}

namespace {

// The corner construction's geometry, independent of the suggested sample
// sizes (which stop being representable around d = 40).
CornerDistributionParams corner_geometry(int d) {
  require(d >= 2, "example1_params: requires d >= 2 (marginal intervals overlap below that)");
  CornerDistributionParams p;
  p.d = d;
  p.epsilon = 1.0 / (10.0 * std::sqrt(static_cast<double>(d)));
  p.m_center = 1.0 / (static_cast<double>(d) * std::log2(static_cast<double>(d)));
  // The construction only needs eta > 0; widen past double granularity at 1/2
  // so the center band [1/2 - eta, 1/2 + eta] stays a real interval.
  p.eta = std::max(std::pow(static_cast<double>(d), -10.0),
                   4.0 * std::numeric_limits<double>::epsilon());
  return p;
}

}  // namespace

CornerDistributionParams example1_params(int d) {
  CornerDistributionParams p = corner_geometry(d);
  const double log2d = std::log2(static_cast<double>(d));
  p.suggested_n0 =
      static_cast<std::int64_t>(std::ceil(std::pow(static_cast<double>(d), 3) * log2d * log2d * log2d));
  const double n_exact = static_cast<double>(p.suggested_n0) * std::exp2(static_cast<double>(d));
  require(n_exact <= 9.0e18, "example1_params: n = n0 * 2^d overflows for this d");
  p.suggested_n = p.suggested_n0 * (std::int64_t{1} << d);
  return p;
}

DistributionSpec::DistributionSpec(std::string id, std::vector<MarginalSpec> marginals)
    : id_(std::move(id)), marginals_(std::move(marginals)) {
  require(!marginals_.empty(), "DistributionSpec: need d >= 1");
  for (auto& m : marginals_) {
    if (!m.finalized()) m.finalize();
  }
}

DistributionSpec DistributionSpec::uniform(int d) {
  require(d >= 1, "DistributionSpec::uniform: need d >= 1");
  return DistributionSpec(
      "uniform", std::vector<MarginalSpec>(static_cast<std::size_t>(d), MarginalSpec::uniform()));
}

DistributionSpec DistributionSpec::product(int d, MarginalSpec shared, std::string id) {
  require(d >= 1, "DistributionSpec::product: need d >= 1");
  shared.finalize();
  return DistributionSpec(std::move(id),
                          std::vector<MarginalSpec>(static_cast<std::size_t>(d), shared));
}

DistributionSpec DistributionSpec::corner(int d) {
  const CornerDistributionParams p = corner_geometry(d);
  MarginalSpec m;
  m.breakpoints = {0.0, p.epsilon, 0.5 - p.eta, 0.5 + p.eta, 1.0 - p.epsilon, 1.0};
  const double edge = (1.0 - p.m_center) / 2.0;
  m.masses = {edge, 0.0, p.m_center, 0.0, edge};
  m.finalize();
  return DistributionSpec("corner",
                          std::vector<MarginalSpec>(static_cast<std::size_t>(d), m));
}

DistributionSpec DistributionSpec::from_json(const nlohmann::json& j) {
  require(j.is_object() && j.contains("type"), "distribution config: missing \"type\"");
  const std::string type = j.at("type").get<std::string>();
  const int d = j.contains("d") ? j.at("d").get<int>() : 0;
  if (type == "uniform") {
    require(d >= 1, "distribution config: uniform needs \"d\" >= 1");
    return uniform(d);
  }
  if (type == "corner") {
    require(d >= 2, "distribution config: corner needs \"d\" >= 2");
    return corner(d);
  }
  if (type == "product") {
    if (j.contains("marginals")) {
      std::vector<MarginalSpec> ms;
      for (const auto& mj : j.at("marginals")) ms.push_back(MarginalSpec::from_json(mj));
      require(d == 0 || d == static_cast<int>(ms.size()),
              "distribution config: \"d\" disagrees with \"marginals\" length");
      return DistributionSpec("product", std::move(ms));
    }
    require(d >= 1, "distribution config: product needs \"d\" >= 1");
    return product(d, MarginalSpec::from_json(j), "product");
  }
  throw std::invalid_argument("distribution config: unknown type \"" + type +
                              "\" (expected uniform | product | corner)");
}

nlohmann::ordered_json DistributionSpec::to_json() const {
  nlohmann::ordered_json j;
  j["type"] = "product";
  j["d"] = dim();
  nlohmann::ordered_json ms = nlohmann::ordered_json::array();
  for (const auto& m : marginals_) {
    ms.push_back({{"breakpoints", m.breakpoints}, {"masses", m.masses}});
  }
  j["marginals"] = std::move(ms);
  return j;
}

double DistributionSpec::marginal_cdf(int i, double x) const {
  require(i >= 0 && i < dim(), "marginal_cdf: dimension index out of range");
  return marginals_[static_cast<std::size_t>(i)].cdf(x);
}

double DistributionSpec::cell_mass(const Rect& r) const {
  require(r.dim() == dim(), "cell_mass: dimension mismatch");
  double mass = 1.0;
  for (int i = 0; i < dim(); ++i) {
    mass *= marginals_[static_cast<std::size_t>(i)].mass_between(r.lo(i), r.hi(i));
    if (mass == 0.0) break;
  }
  return mass;
}

DataSet Sampler::sample(std::int64_t count) {
  require(count >= 1, "Sampler::sample: count must be >= 1");
  const int d = spec_.dim();
  std::vector<double> coords;
  coords.reserve(static_cast<std::size_t>(count) * static_cast<std::size_t>(d));
  for (std::int64_t i = 0; i < count; ++i) {
    for (int j = 0; j < d; ++j) {
      coords.push_back(spec_.marginal(j).quantile(rng_.next_double()));
    }
  }
  return DataSet(std::move(coords), count, d);
}

std::vector<double> Sampler::sample_point() {
  const int d = spec_.dim();
  std::vector<double> q(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) q[static_cast<std::size_t>(j)] = spec_.marginal(j).quantile(rng_.next_double());
  return q;
}

}  // namespace kdt
