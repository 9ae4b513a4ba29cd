// Immutable point set: n rows of d coordinates, row-major.
#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace kdt {

class DataSet {
 public:
  DataSet(std::vector<double> coords, std::int64_t n, int d)
      : coords_(std::move(coords)), n_(n), d_(d) {
    if (n_ < 1 || d_ < 1) throw std::invalid_argument("DataSet: need n >= 1 and d >= 1");
    if (coords_.size() != static_cast<std::size_t>(n_) * static_cast<std::size_t>(d_))
      throw std::invalid_argument("DataSet: coordinate buffer size does not match n * d");
    for (double c : coords_) {
      if (!std::isfinite(c)) throw std::invalid_argument("DataSet: coordinates must be finite");
    }
  }

  static DataSet from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw std::invalid_argument("DataSet: need at least one point");
    const int d = static_cast<int>(rows.front().size());
    std::vector<double> coords;
    coords.reserve(rows.size() * static_cast<std::size_t>(d));
    for (const auto& row : rows) {
      if (static_cast<int>(row.size()) != d)
        throw std::invalid_argument("DataSet: ragged rows");
      coords.insert(coords.end(), row.begin(), row.end());
    }
    return DataSet(std::move(coords), static_cast<std::int64_t>(rows.size()), d);
  }

  std::int64_t size() const { return n_; }
  int dim() const { return d_; }

  std::span<const double> point(std::int64_t i) const {
    return {coords_.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(d_),
            static_cast<std::size_t>(d_)};
  }

  double coord(std::int64_t i, int j) const {
    return coords_[static_cast<std::size_t>(i) * static_cast<std::size_t>(d_) +
                   static_cast<std::size_t>(j)];
  }

  std::span<const double> raw() const { return coords_; }

 private:
  std::vector<double> coords_;
  std::int64_t n_;
  int d_;
};

inline double dist_sq_points(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    sum += diff * diff;
  }
  return sum;
}

}  // namespace kdt
