#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace deds {

// Dense units x slots array, row-major by unit so that a unit's horizon is contiguous.
class UnitSlotArray {
 public:
  UnitSlotArray() = default;
  UnitSlotArray(std::size_t units, std::size_t slots, double fill = 0.0)
      : units_(units), slots_(slots), data_(units * slots, fill) {}

  std::size_t units() const { return units_; }
  std::size_t slots() const { return slots_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t k) { return data_[i * slots_ + k]; }
  double operator()(std::size_t i, std::size_t k) const { return data_[i * slots_ + k]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * slots_, slots_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * slots_, slots_}; }

  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }

  bool same_shape(const UnitSlotArray& other) const {
    return units_ == other.units_ && slots_ == other.slots_;
  }

  // Sums in ascending unit order.
  double column_sum(std::size_t k) const {
    double s = 0.0;
    for (std::size_t i = 0; i < units_; ++i) s += (*this)(i, k);
    return s;
  }

  double max_abs() const {
    double m = 0.0;
    for (double x : data_) m = std::max(m, std::abs(x));
    return m;
  }

  bool all_finite() const {
    for (double x : data_)
      if (!std::isfinite(x)) return false;
    return true;
  }

  void fill(double value) { std::fill(data_.begin(), data_.end(), value); }

  friend bool operator==(const UnitSlotArray&, const UnitSlotArray&) = default;

 private:
  std::size_t units_ = 0;
  std::size_t slots_ = 0;
  std::vector<double> data_;
};

double max_abs_difference(const UnitSlotArray& a, const UnitSlotArray& b);

enum class ExecPolicy { serial, parallel };

class ShapeMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a run would violate a convergence hypothesis (gain condition, v(0) column sums).
class HypothesisRejected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline void require_shape(const UnitSlotArray& a, std::size_t units, std::size_t slots,
                          const char* what) {
  if (a.units() != units || a.slots() != slots)
    throw ShapeMismatch(std::string(what) + ": expected " + std::to_string(units) + "x" +
                        std::to_string(slots) + ", got " + std::to_string(a.units()) + "x" +
                        std::to_string(a.slots()));
}

}  // namespace deds
