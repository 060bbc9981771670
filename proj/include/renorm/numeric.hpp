#pragma once

#include <cmath>
#include <span>

namespace renorm {

/// Neumaier-compensated accumulator. Summation order is fixed by the
/// caller, so results are reproducible bit-for-bit.
class CompensatedSum {
 public:
  CompensatedSum& operator+=(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
    return *this;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) {
  CompensatedSum s;
  for (double x : xs) s += x;
  return s.value();
}

inline constexpr double kE = 2.718281828459045235360287471352662498;

}  // namespace renorm
