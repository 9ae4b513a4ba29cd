#include "kdt/stats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace kdt {

WilsonInterval wilson_interval(std::int64_t successes, std::int64_t trials, double z) {
  if (trials <= 0) throw std::invalid_argument("wilson_interval: trials must be >= 1");
  if (successes < 0 || successes > trials)
    throw std::invalid_argument("wilson_interval: successes out of range");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  // The endpoints are exact at the extremes; do not leave rounding dust there.
  const double lo = successes == 0 ? 0.0 : std::max(0.0, center - half);
  const double hi = successes == trials ? 1.0 : std::min(1.0, center + half);
  return {lo, hi};
}

void Accumulator::add(double value) {
  if (count_ == 0) {
    min_ = max_ = value;
  } else {
    min_ = std::min(min_, value);
    max_ = std::max(max_, value);
  }
  sum_ += value;
  ++count_;
  if (value == 1.0) {
    ++successes_;
  } else if (value != 0.0) {
    binary_ = false;
  }
}

double Accumulator::mean() const {
  if (count_ == 0) throw std::logic_error("Accumulator::mean: no observations");
  return sum_ / static_cast<double>(count_);
}

std::optional<WilsonInterval> Accumulator::wilson() const {
  if (!binary_ || count_ == 0) return std::nullopt;
  return wilson_interval(successes_, count_);
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

}  // namespace kdt
