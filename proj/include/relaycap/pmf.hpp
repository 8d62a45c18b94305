// Finite probability mass functions and dense joint distributions.
#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace relaycap {

// Probabilities below this are treated as exact zeros (0 log 0 = 0).
inline constexpr double kProbZeroTol = 1e-15;
// Distributions must carry unit mass within this tolerance.
inline constexpr double kMassTol = 1e-12;

class Pmf {
 public:
  explicit Pmf(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw std::invalid_argument("Pmf: needs at least one entry");
    double mass = 0.0;
    for (double p : probs_) {
      if (p < 0.0) throw std::invalid_argument("Pmf: negative probability " + std::to_string(p));
      mass += p;
    }
    if (std::abs(mass - 1.0) > kMassTol)
      throw std::invalid_argument("Pmf: total mass " + std::to_string(mass) + " is not 1");
  }

  static Pmf uniform(std::size_t n) {
    return Pmf(std::vector<double>(n, 1.0 / static_cast<double>(n)));
  }

  static Pmf point_mass(std::size_t n, std::size_t at) {
    if (at >= n) throw std::invalid_argument("Pmf: point mass index out of range");
    std::vector<double> p(n, 0.0);
    p[at] = 1.0;
    return Pmf(std::move(p));
  }

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  const std::vector<double>& probs() const { return probs_; }

 private:
  std::vector<double> probs_;
};

// Dense joint distribution over a tuple of finite alphabets, row-major with
// axis 0 slowest. Alphabets in scope are small, so no sparsity.
class JointPmf {
 public:
  JointPmf(std::vector<std::size_t> dims, std::vector<double> probs)
      : dims_(std::move(dims)), probs_(std::move(probs)) {
    if (dims_.empty()) throw std::invalid_argument("JointPmf: needs at least one axis");
    std::size_t total = 1;
    for (std::size_t d : dims_) {
      if (d == 0) throw std::invalid_argument("JointPmf: zero-size axis");
      total *= d;
    }
    if (probs_.size() != total)
      throw std::invalid_argument("JointPmf: tensor size does not match dims");
    double mass = 0.0;
    for (double p : probs_) {
      if (p < 0.0) throw std::invalid_argument("JointPmf: negative probability");
      mass += p;
    }
    if (std::abs(mass - 1.0) > kMassTol)
      throw std::invalid_argument("JointPmf: total mass " + std::to_string(mass) + " is not 1");
    strides_.assign(dims_.size(), 1);
    for (std::size_t a = dims_.size(); a-- > 1;) strides_[a - 1] = strides_[a] * dims_[a];
  }

  std::size_t rank() const { return dims_.size(); }
  std::size_t size() const { return probs_.size(); }
  const std::vector<std::size_t>& dims() const { return dims_; }
  const std::vector<double>& probs() const { return probs_; }

  double at(std::span<const std::size_t> idx) const {
    if (idx.size() != dims_.size()) throw std::invalid_argument("JointPmf: index rank mismatch");
    std::size_t flat = 0;
    for (std::size_t a = 0; a < idx.size(); ++a) {
      if (idx[a] >= dims_[a]) throw std::invalid_argument("JointPmf: index out of range");
      flat += idx[a] * strides_[a];
    }
    return probs_[flat];
  }

  // Marginal over the given axes, kept in the given order.
  JointPmf marginal(const std::vector<std::size_t>& axes) const {
    if (axes.empty()) throw std::invalid_argument("JointPmf: empty marginal");
    std::vector<std::size_t> out_dims(axes.size());
    for (std::size_t k = 0; k < axes.size(); ++k) {
      if (axes[k] >= dims_.size()) throw std::invalid_argument("JointPmf: marginal axis out of range");
      out_dims[k] = dims_[axes[k]];
    }
    std::vector<std::size_t> out_strides(axes.size(), 1);
    for (std::size_t k = axes.size(); k-- > 1;) out_strides[k - 1] = out_strides[k] * out_dims[k];
    std::vector<double> out(out_strides[0] * out_dims[0], 0.0);
    for (std::size_t flat = 0; flat < probs_.size(); ++flat) {
      if (probs_[flat] == 0.0) continue;
      std::size_t reduced = 0;
      for (std::size_t k = 0; k < axes.size(); ++k)
        reduced += ((flat / strides_[axes[k]]) % dims_[axes[k]]) * out_strides[k];
      out[reduced] += probs_[flat];
    }
    return JointPmf(std::move(out_dims), std::move(out));
  }

 private:
  std::vector<std::size_t> dims_;
  std::vector<std::size_t> strides_;
  std::vector<double> probs_;
};

}  // namespace relaycap
