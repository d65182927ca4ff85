#pragma once

#include <cmath>
#include <cstdint>

namespace hoppe {

/// Streaming central moments up to order four (Welford update, pairwise
/// merge after Pebay). Holds no samples.
class Moments {
 public:
  void push(double x) {
    const double n1 = static_cast<double>(count_);
    ++count_;
    const double n = static_cast<double>(count_);
    const double delta = x - mean_;
    const double delta_n = delta / n;
    const double delta_n2 = delta_n * delta_n;
    const double term1 = delta * delta_n * n1;
    mean_ += delta_n;
    m4_ += term1 * delta_n2 * (n * n - 3 * n + 3) + 6 * delta_n2 * m2_ - 4 * delta_n * m3_;
    m3_ += term1 * delta_n * (n - 2) - 3 * delta_n * m2_;
    m2_ += term1;
  }

  void merge(const Moments& other) {
    if (other.count_ == 0) return;
    if (count_ == 0) {
      *this = other;
      return;
    }
    const double na = static_cast<double>(count_);
    const double nb = static_cast<double>(other.count_);
    const double n = na + nb;
    const double delta = other.mean_ - mean_;
    const double d2 = delta * delta;

    const double m4 = m4_ + other.m4_ + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n) +
                      6 * d2 * (na * na * other.m2_ + nb * nb * m2_) / (n * n) +
                      4 * delta * (na * other.m3_ - nb * m3_) / n;
    const double m3 = m3_ + other.m3_ + d2 * delta * na * nb * (na - nb) / (n * n) +
                      3 * delta * (na * other.m2_ - nb * m2_) / n;
    const double m2 = m2_ + other.m2_ + d2 * na * nb / n;

    mean_ += delta * nb / n;
    m2_ = m2;
    m3_ = m3;
    m4_ = m4;
    count_ += other.count_;
  }

  std::uint64_t count() const { return count_; }
  double mean() const { return mean_; }

  /// Unbiased sample variance.
  double variance() const {
    return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0;
  }

  double stderr_mean() const {
    return count_ > 1 ? std::sqrt(variance() / static_cast<double>(count_)) : 0.0;
  }

  /// Large-sample standard error of variance(): sqrt((mu4 - sigma^4 (n-3)/(n-1)) / n).
  double stderr_variance() const {
    if (count_ < 4) return 0.0;
    const double n = static_cast<double>(count_);
    const double mu4 = m4_ / n;
    const double s2 = variance();
    const double v = (mu4 - s2 * s2 * (n - 3) / (n - 1)) / n;
    return v > 0 ? std::sqrt(v) : 0.0;
  }

  double central_m2() const { return m2_; }
  double central_m4() const { return m4_; }

 private:
  std::uint64_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
  double m3_ = 0.0;
  double m4_ = 0.0;
};

}  // namespace hoppe
