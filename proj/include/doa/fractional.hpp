#pragma once

// Grunwald-Letnikov fractional differintegral with short-memory truncation.
// order > 0 is a derivative s^order, order < 0 an integral 1/s^|order|.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "doa/error.hpp"

namespace doa {

/// w_0 .. w_count of (1 - z^-1)^order, i.e. (-1)^j * binom(order, j).
inline std::vector<double> gl_weights(double order, std::size_t count) {
  if (count < 1) throw std::invalid_argument("gl_weights: count must be >= 1");
  std::vector<double> w(count + 1);
  w[0] = 1.0;
  for (std::size_t j = 1; j <= count; ++j)
    w[j] = w[j - 1] * (1.0 - (order + 1.0) / static_cast<double>(j));
  return w;
}

class GlOperator {
 public:
  static constexpr std::size_t kDefaultMemory = 600;

  GlOperator() : GlOperator(0.0, 1.0 / 60.0) {}

  GlOperator(double order, double sample_time, std::size_t memory_len = kDefaultMemory)
      : order_(order), sample_time_(sample_time), memory_len_(memory_len) {
    if (!(order >= -2.0 && order <= 2.0))
      throw std::invalid_argument("GlOperator: order must lie in [-2, 2]");
    if (!(sample_time > 0.0)) throw std::invalid_argument("GlOperator: sample_time must be > 0");
    if (memory_len < 1) throw std::invalid_argument("GlOperator: memory_len must be >= 1");
    weights_ = gl_weights(order, memory_len);
    scale_ = std::pow(sample_time, -order);
    buf_.assign(memory_len + 1, 0.0);
  }

  double order() const { return order_; }
  double sample_time() const { return sample_time_; }
  std::size_t memory_len() const { return memory_len_; }
  const std::vector<double>& weights() const { return weights_; }
  std::size_t history_size() const { return count_; }

  /// Output the operator would produce for `sample`, without consuming it.
  double peek(double sample) const {
    check(sample);
    return scale_ * (weights_[0] * sample + past_sum());
  }

  double step(double sample) {
    const double out = peek(sample);
    buf_[pos_] = sample;
    pos_ = (pos_ + 1) % buf_.size();
    if (count_ < buf_.size()) ++count_;
    return out;
  }

  void reset() {
    std::fill(buf_.begin(), buf_.end(), 0.0);
    pos_ = 0;
    count_ = 0;
  }

 private:
  static void check(double sample) {
    if (!std::isfinite(sample))
      throw NumericInputError("GlOperator: non-finite input sample");
  }

  // sum_{j=1..min(k, L)} w_j * x[k-j], newest stored sample is x[k-1].
  double past_sum() const {
    const std::size_t n = std::min(count_, memory_len_);
    const std::size_t cap = buf_.size();
    double acc = 0.0;
    std::size_t idx = (pos_ + cap - 1) % cap;
    for (std::size_t j = 1; j <= n; ++j) {
      acc += weights_[j] * buf_[idx];
      idx = idx == 0 ? cap - 1 : idx - 1;
    }
    return acc;
  }

  double order_;
  double sample_time_;
  std::size_t memory_len_;
  double scale_ = 1.0;
  std::vector<double> weights_;
  std::vector<double> buf_;
  std::size_t pos_ = 0;
  std::size_t count_ = 0;
};

}  // namespace doa
