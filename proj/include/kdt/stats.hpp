// Summary statistics for experiment measurements: running accumulators,
// Wilson score intervals for binary rates, and round-trip-exact number
// formatting for CSV/JSON output.
#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace kdt {

struct WilsonInterval {
  double lo = 0.0, hi = 1.0;
};

/// 95% Wilson score interval by default (z = Phi^-1(0.975)).
WilsonInterval wilson_interval(std::int64_t successes, std::int64_t trials,
                               double z = 1.959963984540054);

/// Mean / min / max accumulator that also tracks whether every observation
/// was 0 or 1, in which case a Wilson interval is available.
class Accumulator {
 public:
  void add(double value);

  std::int64_t count() const { return count_; }
  double mean() const;
  double min() const { return min_; }
  double max() const { return max_; }
  bool binary() const { return binary_; }
  std::int64_t successes() const { return successes_; }
  std::optional<WilsonInterval> wilson() const;

 private:
  std::int64_t count_ = 0;
  double sum_ = 0.0;
  double min_ = 0.0, max_ = 0.0;
  bool binary_ = true;
  std::int64_t successes_ = 0;
};

/// Shortest representation that parses back to the same double.
std::string format_double(double value);

}  // namespace kdt
