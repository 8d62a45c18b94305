// Discrete relay channels with a noiseless relay-to-receiver link.
//
// A channel p(y,y1|x) belongs to the supported class when the relay output is
// a deterministic function y1 = f(x,y) of the input and the receiver output;
// validate() machine-checks that property and extracts f.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "relaycap/info.hpp"
#include "relaycap/pmf.hpp"
#include "relaycap/random.hpp"

namespace relaycap {

class RowNotNormalizedError : public std::runtime_error {
 public:
  RowNotNormalizedError(std::size_t x, double mass)
      : std::runtime_error("channel row x=" + std::to_string(x) + " has mass " +
                           std::to_string(mass) + ", expected 1"),
        x(x),
        mass(mass) {}
  std::size_t x;
  double mass;
};

class NotDeterministicError : public std::runtime_error {
 public:
  NotDeterministicError(std::size_t x, std::size_t y, std::size_t y1_first, std::size_t y1_second)
      : std::runtime_error("relay output is not deterministic at (x=" + std::to_string(x) +
                           ", y=" + std::to_string(y) + "): both y1=" + std::to_string(y1_first) +
                           " and y1=" + std::to_string(y1_second) + " have positive probability"),
        x(x),
        y(y),
        y1_first(y1_first),
        y1_second(y1_second) {}
  std::size_t x, y, y1_first, y1_second;
};

class DiscreteRelayChannel {
 public:
  // transition is p(y,y1|x) flattened x-major: index = (x*sizeY + y)*sizeY1 + y1.
  DiscreteRelayChannel(std::size_t size_x, std::size_t size_y, std::size_t size_y1,
                       std::vector<double> transition)
      : nx_(size_x), ny_(size_y), ny1_(size_y1), t_(std::move(transition)) {
    if (nx_ == 0 || ny_ == 0 || ny1_ == 0)
      throw std::invalid_argument("channel: alphabet sizes must be positive");
    if (t_.size() != nx_ * ny_ * ny1_)
      throw std::invalid_argument("channel: transition tensor size mismatch");
    for (double p : t_)
      if (p < 0.0) throw std::invalid_argument("channel: negative probability");
    for (std::size_t x = 0; x < nx_; ++x) {
      double mass = 0.0;
      for (std::size_t i = 0; i < ny_ * ny1_; ++i) mass += t_[x * ny_ * ny1_ + i];
      if (std::abs(mass - 1.0) > kMassTol) throw RowNotNormalizedError(x, mass);
    }
  }

  std::size_t size_x() const { return nx_; }
  std::size_t size_y() const { return ny_; }
  std::size_t size_y1() const { return ny1_; }

  double prob(std::size_t x, std::size_t y, std::size_t y1) const {
    return t_[(x * ny_ + y) * ny1_ + y1];
  }

  // p(y,y1|x) for fixed x, as a flat (y,y1) row.
  std::span<const double> row(std::size_t x) const {
    return std::span<const double>(t_).subspan(x * ny_ * ny1_, ny_ * ny1_);
  }

  const std::vector<double>& transition() const { return t_; }

 private:
  std::size_t nx_, ny_, ny1_;
  std::vector<double> t_;
};

// Partial map (x,y) -> y1, defined exactly on the positive-probability pairs.
struct RelayFunction {
  std::size_t size_x = 0;
  std::size_t size_y = 0;
  std::vector<int> table;  // -1 where undefined

  std::optional<int> operator()(std::size_t x, std::size_t y) const {
    const int v = table[x * size_y + y];
    if (v < 0) return std::nullopt;
    return v;
  }
};

// Checks the deterministic-relay hypothesis and extracts f(x,y).
inline RelayFunction validate(const DiscreteRelayChannel& ch) {
  RelayFunction f{ch.size_x(), ch.size_y(), std::vector<int>(ch.size_x() * ch.size_y(), -1)};
  for (std::size_t x = 0; x < ch.size_x(); ++x) {
    for (std::size_t y = 0; y < ch.size_y(); ++y) {
      int found = -1;
      for (std::size_t y1 = 0; y1 < ch.size_y1(); ++y1) {
        if (ch.prob(x, y, y1) > kProbZeroTol) {
          if (found >= 0)
            throw NotDeterministicError(x, y, static_cast<std::size_t>(found), y1);
          found = static_cast<int>(y1);
        }
      }
      f.table[x * ch.size_y() + y] = found;
    }
  }
  return f;
}

// Binary symmetric channel Y = X xor S with S ~ Bern(p) observed by the
// relay: p(y, y1=s | x) = Bern(p)(s) * 1{y = x xor s}, so f(x,y) = x xor y.
inline DiscreteRelayChannel bsc_state_channel(double p) {
  if (p < 0.0 || p > 1.0)
    throw std::invalid_argument("bsc_state_channel: crossover probability out of [0,1]");
  std::vector<double> t(8, 0.0);
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t s = 0; s < 2; ++s) t[(x * 2 + (x ^ s)) * 2 + s] = (s == 1) ? p : 1.0 - p;
  return DiscreteRelayChannel(2, 2, 2, std::move(t));
}

// p(x,y,y1) = px(x) p(y,y1|x), axes (X, Y, Y1).
inline JointPmf induced_joint(const Pmf& px, const DiscreteRelayChannel& ch) {
  if (px.size() != ch.size_x())
    throw std::invalid_argument("induced_joint: input dimension mismatch");
  std::vector<double> j(ch.size_x() * ch.size_y() * ch.size_y1());
  for (std::size_t x = 0; x < ch.size_x(); ++x) {
    const auto row = ch.row(x);
    for (std::size_t i = 0; i < row.size(); ++i) j[x * row.size() + i] = px[x] * row[i];
  }
  return JointPmf({ch.size_x(), ch.size_y(), ch.size_y1()}, std::move(j));
}

// I.i.d. per-position draws of (y, y1) from p(y,y1|x_i); deterministic in the
// seed. For valid channels the outputs always satisfy y1_i = f(x_i, y_i).
inline std::pair<std::vector<int>, std::vector<int>> sample(const DiscreteRelayChannel& ch,
                                                            std::span<const int> xs,
                                                            std::uint64_t seed) {
  detail::Rng rng(seed);
  std::vector<int> ys(xs.size()), y1s(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] < 0 || static_cast<std::size_t>(xs[i]) >= ch.size_x())
      throw std::invalid_argument("sample: input symbol out of range");
    const std::size_t k = rng.categorical(ch.row(static_cast<std::size_t>(xs[i])));
    ys[i] = static_cast<int>(k / ch.size_y1());
    y1s[i] = static_cast<int>(k % ch.size_y1());
  }
  return {std::move(ys), std::move(y1s)};
}

}  // namespace relaycap
