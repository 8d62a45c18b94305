// Rate and capacity evaluators for deterministic relay channels with a
// rate-limited noiseless relay link.
//
// The capacity is the cut-set value max_{p(x)} min{ I(X;Y) + R0, I(X;Y,Y1) }.
// Both terms are concave in p(x), so the max-min is a concave program:
// cutset_capacity runs projected supergradient ascent (the configured scheme)
// and then closes the duality gap with a Blahut-Arimoto search over the
// scalarization min_{l in [0,1]} max_p [ l (I(X;Y)+R0) + (1-l) I(X;Y,Y1) ],
// which equals the max-min by minimax duality.
//
// cf_rate / chf_rate / ah_rate evaluate the compress-and-forward,
// compress-hash-and-forward and rate-limited-state-information expressions
// for a given test channel; the *_optimal searches are nonconvex and are
// certified against the cut-set capacity.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "relaycap/channel.hpp"
#include "relaycap/info.hpp"
#include "relaycap/parallel.hpp"
#include "relaycap/pmf.hpp"
#include "relaycap/random.hpp"

namespace relaycap {

// Two min-terms closer than this count as a tie.
inline constexpr double kTieTol = 1e-9;
// A description channel is accepted as feasible when its link cost exceeds
// the budget by no more than this.
inline constexpr double kLinkFeasTol = 1e-9;
// Declared search gap for the nonconvex cf/ah optimizers.
inline constexpr double kDescriptionSearchGap = 1e-2;

// Conditional law p(yhat1 | y1): rows indexed by y1, columns by yhat1.
class TestChannel {
 public:
  TestChannel(std::size_t size_y1, std::size_t size_y1hat, std::vector<double> rows)
      : ny1_(size_y1), nyhat_(size_y1hat), rows_(std::move(rows)) {
    if (ny1_ == 0 || nyhat_ == 0)
      throw std::invalid_argument("TestChannel: sizes must be positive");
    if (rows_.size() != ny1_ * nyhat_)
      throw std::invalid_argument("TestChannel: matrix size mismatch");
    for (double p : rows_)
      if (p < 0.0) throw std::invalid_argument("TestChannel: negative probability");
    for (std::size_t r = 0; r < ny1_; ++r) {
      double mass = 0.0;
      for (std::size_t c = 0; c < nyhat_; ++c) mass += rows_[r * nyhat_ + c];
      if (std::abs(mass - 1.0) > kMassTol)
        throw std::invalid_argument("TestChannel: row " + std::to_string(r) +
                                    " has mass " + std::to_string(mass));
    }
  }

  std::size_t size_y1() const { return ny1_; }
  std::size_t size_y1hat() const { return nyhat_; }
  double prob(std::size_t y1, std::size_t yhat) const { return rows_[y1 * nyhat_ + yhat]; }
  const std::vector<double>& rows() const { return rows_; }

  // Yhat1 = Y1, embedded into size_y1hat >= size_y1 columns.
  static TestChannel identity(std::size_t size_y1, std::size_t size_y1hat) {
    if (size_y1hat < size_y1)
      throw std::invalid_argument("TestChannel::identity: too few columns");
    std::vector<double> rows(size_y1 * size_y1hat, 0.0);
    for (std::size_t r = 0; r < size_y1; ++r) rows[r * size_y1hat + r] = 1.0;
    return TestChannel(size_y1, size_y1hat, std::move(rows));
  }

  // Yhat1 independent of Y1 (a useless description).
  static TestChannel uniform_rows(std::size_t size_y1, std::size_t size_y1hat) {
    std::vector<double> rows(size_y1 * size_y1hat, 1.0 / static_cast<double>(size_y1hat));
    return TestChannel(size_y1, size_y1hat, std::move(rows));
  }

 private:
  std::size_t ny1_, nyhat_;
  std::vector<double> rows_;
};

// Rate-distortion-optimal binary description of S ~ Bern(source_p): the
// backward channel S = Shat xor U with U ~ Bern(flip_q) independent of Shat,
// expressed forward as p(shat|s). Requires flip_q <= source_p <= 1 - flip_q.
inline TestChannel binary_backward_test_channel(double source_p, double flip_q) {
  if (source_p <= 0.0 || source_p >= 1.0)
    throw std::invalid_argument("binary_backward_test_channel: source_p must be in (0,1)");
  if (flip_q < 0.0 || flip_q >= 0.5)
    throw std::invalid_argument("binary_backward_test_channel: flip_q must be in [0, 0.5)");
  const double pi1 = (source_p - flip_q) / (1.0 - 2.0 * flip_q);
  if (pi1 < 0.0 || pi1 > 1.0)
    throw std::invalid_argument("binary_backward_test_channel: incompatible (source_p, flip_q)");
  const double ps[2] = {1.0 - source_p, source_p};
  const double psh[2] = {1.0 - pi1, pi1};
  std::vector<double> rows(4, 0.0);
  for (std::size_t s = 0; s < 2; ++s)
    for (std::size_t sh = 0; sh < 2; ++sh) {
      const double pu = ((s ^ sh) != 0) ? flip_q : 1.0 - flip_q;
      rows[s * 2 + sh] = psh[sh] * pu / ps[s];
    }
  return TestChannel(2, 2, std::move(rows));
}

struct OptimizerConfig {
  double tolerance = 1e-9;  // bits
  int max_iterations = 500;
  int restarts = 8;
  std::uint64_t seed = 0x52454C4159ull;

  void check() const {
    if (tolerance <= 0.0) throw std::invalid_argument("OptimizerConfig: tolerance must be > 0");
    if (max_iterations < 1 || restarts < 1)
      throw std::invalid_argument("OptimizerConfig: counts must be >= 1");
  }
};

enum class MinBranch { direct_plus_link, relay_joint, tie };

inline const char* to_string(MinBranch b) {
  switch (b) {
    case MinBranch::direct_plus_link: return "direct_plus_link";
    case MinBranch::relay_joint: return "relay_joint";
    default: return "tie";
  }
}

struct RatePoint {
  double r0;
  double rate;
  Pmf argmax_input;
  std::optional<TestChannel> witness;
  // Diagnostics: the two min-terms at the reported input, which one is
  // active, link cost of the witness (cf/ah only), and the search status.
  double term_direct_plus_link = 0.0;
  double term_relay_joint = 0.0;
  MinBranch active_branch = MinBranch::tie;
  std::optional<double> link_cost;
  std::optional<double> optimality_gap;
  bool converged = true;
};

struct RateCurve {
  std::vector<RatePoint> points;
};

// min{ I(X;Y) + r0, I(X;Y,Y1) } under p(x) p(y,y1|x).
inline double cutset_rate(const Pmf& px, const DiscreteRelayChannel& ch, double r0) {
  if (r0 < 0.0) throw std::invalid_argument("cutset_rate: r0 must be nonnegative");
  const JointPmf j = induced_joint(px, ch);
  const double ixy = mutual_information(j, {0}, {1});
  const double ixyy1 = mutual_information(j, {0}, {1, 2});
  return std::min(ixy + r0, ixyy1);
}

namespace detail {

inline constexpr double kScoreCap = 64.0;  // bits; caps KL scores near the simplex boundary

inline double safe_log2_ratio(double num, double den) {
  if (num <= kProbZeroTol && den <= kProbZeroTol) return 0.0;
  if (num <= kProbZeroTol) return -kScoreCap;
  if (den <= kProbZeroTol) return kScoreCap;
  return std::clamp(std::log2(num / den), -kScoreCap, kScoreCap);
}

// Euclidean projection onto the probability simplex.
inline std::vector<double> project_simplex(std::vector<double> v) {
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<>());
  double css = 0.0, tau = 0.0;
  std::size_t rho = 0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    css += u[j];
    const double t = (css - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) {
      rho = j + 1;
      tau = t;
    }
  }
  double sum = 0.0;
  (void)rho;
  for (auto& x : v) {
    x = std::max(x - tau, 0.0);
    sum += x;
  }
  for (auto& x : v) x /= sum;
  return v;
}

// Cached per-channel quantities for the cut-set objective.
class CutsetProblem {
 public:
  explicit CutsetProblem(const DiscreteRelayChannel& ch)
      : nx_(ch.size_x()), ny_(ch.size_y()), nz_(ch.size_y() * ch.size_y1()), ch_(&ch) {
    py_given_x_.assign(nx_ * ny_, 0.0);
    for (std::size_t x = 0; x < nx_; ++x) {
      const auto row = ch.row(x);
      for (std::size_t y = 0; y < ny_; ++y)
        for (std::size_t y1 = 0; y1 < ch.size_y1(); ++y1)
          py_given_x_[x * ny_ + y] += row[y * ch.size_y1() + y1];
    }
  }

  std::size_t size_x() const { return nx_; }

  // Evaluates I(X;Y) and I(X;Y,Y1); optionally fills the per-x relative
  // entropy scores that serve as (super)gradients on the simplex.
  void eval(std::span<const double> p, double& ixy, double& ixyy1, std::vector<double>* g1,
            std::vector<double>* g2) const {
    std::vector<double> qy(ny_, 0.0), qz(nz_, 0.0);
    for (std::size_t x = 0; x < nx_; ++x) {
      if (p[x] == 0.0) continue;
      const auto row = ch_->row(x);
      for (std::size_t y = 0; y < ny_; ++y) qy[y] += p[x] * py_given_x_[x * ny_ + y];
      for (std::size_t z = 0; z < nz_; ++z) qz[z] += p[x] * row[z];
    }
    ixy = 0.0;
    ixyy1 = 0.0;
    if (g1) g1->assign(nx_, 0.0);
    if (g2) g2->assign(nx_, 0.0);
    for (std::size_t x = 0; x < nx_; ++x) {
      double d1 = 0.0, d2 = 0.0;
      const auto row = ch_->row(x);
      for (std::size_t y = 0; y < ny_; ++y) {
        const double c = py_given_x_[x * ny_ + y];
        if (c > kProbZeroTol) d1 += c * safe_log2_ratio(c, qy[y]);
      }
      for (std::size_t z = 0; z < nz_; ++z) {
        const double c = row[z];
        if (c > kProbZeroTol) d2 += c * safe_log2_ratio(c, qz[z]);
      }
      if (g1) (*g1)[x] = d1;
      if (g2) (*g2)[x] = d2;
      ixy += p[x] * d1;
      ixyy1 += p[x] * d2;
    }
  }

  // One Blahut-Arimoto ascent pass for l*I(X;Y) + (1-l)*I(X;Y,Y1); returns
  // the mixture value at the input point and replaces p with the update.
  double ba_step(std::vector<double>& p, double lambda) const {
    std::vector<double> g1, g2;
    double ixy, ixyy1;
    eval(p, ixy, ixyy1, &g1, &g2);
    const double value = lambda * ixy + (1.0 - lambda) * ixyy1;
    double smax = -std::numeric_limits<double>::infinity();
    std::vector<double> s(nx_);
    for (std::size_t x = 0; x < nx_; ++x) {
      s[x] = lambda * g1[x] + (1.0 - lambda) * g2[x];
      if (p[x] > 0.0) smax = std::max(smax, s[x]);
    }
    double sum = 0.0;
    for (std::size_t x = 0; x < nx_; ++x) {
      p[x] = p[x] > 0.0 ? p[x] * std::exp2(s[x] - smax) : 0.0;
      sum += p[x];
    }
    for (auto& v : p) v /= sum;
    return value;
  }

 private:
  std::size_t nx_, ny_, nz_;
  const DiscreteRelayChannel* ch_;
  std::vector<double> py_given_x_;  // p(y|x)
};

struct ScalarMax {
  double value;
  std::vector<double> p;
};

// max_p [ l (I(X;Y)+r0) + (1-l) I(X;Y,Y1) ] by Blahut-Arimoto iteration.
inline ScalarMax ba_maximize(const CutsetProblem& prob, double lambda, double r0,
                             std::vector<double> start, int max_iters) {
  // Keep the start strictly positive so no support is lost prematurely.
  const double mix = 1e-3;
  for (auto& v : start) v = (1.0 - mix) * v + mix / static_cast<double>(start.size());
  double prev = -1.0;
  int stall = 0;
  for (int it = 0; it < max_iters; ++it) {
    const double value = prob.ba_step(start, lambda);
    if (value - prev <= 1e-13 * std::max(1.0, std::abs(value))) {
      if (++stall >= 2) break;
    } else {
      stall = 0;
    }
    prev = value;
  }
  double ixy, ixyy1;
  prob.eval(start, ixy, ixyy1, nullptr, nullptr);
  return {lambda * (ixy + r0) + (1.0 - lambda) * ixyy1, std::move(start)};
}

}  // namespace detail

// Capacity of a validated deterministic relay channel at link rate r0:
// max_{p(x)} min{ I(X;Y) + r0, I(X;Y,Y1) }.
inline RatePoint cutset_capacity(const DiscreteRelayChannel& ch, double r0,
                                 const OptimizerConfig& cfg = {}) {
  cfg.check();
  if (r0 < 0.0) throw std::invalid_argument("cutset_capacity: r0 must be nonnegative");
  (void)validate(ch);  // Theorem hypothesis is machine-checked up front.

  const detail::CutsetProblem prob(ch);
  const std::size_t nx = ch.size_x();
  detail::Rng rng(cfg.seed);

  std::vector<double> best_p(nx, 1.0 / static_cast<double>(nx));
  double best_val = -1.0;
  const auto consider = [&](std::span<const double> p) {
    double ixy, ixyy1;
    prob.eval(p, ixy, ixyy1, nullptr, nullptr);
    const double v = std::min(ixy + r0, ixyy1);
    if (v > best_val) {
      best_val = v;
      best_p.assign(p.begin(), p.end());
    }
  };

  // Phase 1: projected supergradient ascent from a uniform start plus
  // cfg.restarts random starts; diminishing step c/sqrt(t), supergradient of
  // the active term, both averaged at ties.
  constexpr double kStepC = 0.25;
  std::vector<double> g1, g2, g(nx);
  for (int s = 0; s <= cfg.restarts; ++s) {
    std::vector<double> p = (s == 0) ? std::vector<double>(nx, 1.0 / static_cast<double>(nx))
                                     : rng.simplex_point(nx);
    for (int t = 1; t <= cfg.max_iterations; ++t) {
      double ixy, ixyy1;
      prob.eval(p, ixy, ixyy1, &g1, &g2);
      const double v1 = ixy + r0;
      const double v = std::min(v1, ixyy1);
      if (v > best_val) {
        best_val = v;
        best_p = p;
      }
      if (std::abs(v1 - ixyy1) < kTieTol) {
        for (std::size_t x = 0; x < nx; ++x) g[x] = 0.5 * (g1[x] + g2[x]);
      } else if (v1 < ixyy1) {
        g = g1;
      } else {
        g = g2;
      }
      const double step = kStepC / std::sqrt(static_cast<double>(t));
      for (std::size_t x = 0; x < nx; ++x) p[x] += step * g[x];
      p = detail::project_simplex(std::move(p));
    }
    consider(p);
  }

  // Phase 2: golden-section over the scalarization weight closes the gap;
  // g(l) = max_p [...] is convex in l and min_l g(l) equals the capacity.
  const int ba_iters = cfg.max_iterations * 40;
  double upper = std::numeric_limits<double>::infinity();
  constexpr double kInvPhi = 0.6180339887498949;
  double a = 0.0, b = 1.0;
  double x1 = b - kInvPhi * (b - a), x2 = a + kInvPhi * (b - a);
  std::vector<double> warm = best_p;
  const auto eval_lambda = [&](double lambda) {
    auto res = detail::ba_maximize(prob, lambda, r0, warm, ba_iters);
    warm = res.p;
    consider(res.p);
    upper = std::min(upper, res.value);
    return res.value;
  };
  double f1 = eval_lambda(x1), f2 = eval_lambda(x2);
  for (int it = 0; it < 60; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = eval_lambda(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = eval_lambda(x2);
    }
  }
  eval_lambda(a);
  eval_lambda(b);

  double ixy, ixyy1;
  prob.eval(best_p, ixy, ixyy1, nullptr, nullptr);
  const double t1 = ixy + r0;
  const double gap = std::max(0.0, upper - best_val);
  MinBranch branch = std::abs(t1 - ixyy1) < kTieTol
                         ? MinBranch::tie
                         : (t1 < ixyy1 ? MinBranch::direct_plus_link : MinBranch::relay_joint);
  return RatePoint{r0,
                   best_val,
                   Pmf(std::move(best_p)),
                   std::nullopt,
                   t1,
                   ixyy1,
                   branch,
                   std::nullopt,
                   gap,
                   gap <= cfg.tolerance};
}

// Capacity at every grid point; the grid must be sorted and nonnegative.
// Points are independent and may be computed concurrently.
inline RateCurve capacity_curve(const DiscreteRelayChannel& ch, std::span<const double> r0_grid,
                                const OptimizerConfig& cfg = {}, unsigned threads = 1) {
  if (r0_grid.empty()) throw std::invalid_argument("capacity_curve: empty grid");
  for (std::size_t i = 0; i < r0_grid.size(); ++i) {
    if (r0_grid[i] < 0.0) throw std::invalid_argument("capacity_curve: grid must be nonnegative");
    if (i > 0 && r0_grid[i] < r0_grid[i - 1])
      throw std::invalid_argument("capacity_curve: grid must be sorted");
  }
  std::vector<std::optional<RatePoint>> slots(r0_grid.size());
  detail::parallel_for(r0_grid.size(), threads,
                       [&](std::size_t i) { slots[i] = cutset_capacity(ch, r0_grid[i], cfg); });
  RateCurve curve;
  curve.points.reserve(slots.size());
  for (auto& s : slots) curve.points.push_back(std::move(*s));
  return curve;
}

struct CfEvaluation {
  double rate;       // bits
  double link_cost;  // bits
};

namespace detail {
// p(x,y,y1,yhat1) = px(x) p(y,y1|x) tc(yhat1|y1), axes (X, Y, Y1, Yhat1).
inline JointPmf description_joint(const Pmf& px, const DiscreteRelayChannel& ch,
                                  const TestChannel& tc) {
  if (px.size() != ch.size_x())
    throw std::invalid_argument("description_joint: input dimension mismatch");
  if (tc.size_y1() != ch.size_y1())
    throw std::invalid_argument("description_joint: test channel row count mismatch");
  const std::size_t nh = tc.size_y1hat();
  std::vector<double> j(ch.size_x() * ch.size_y() * ch.size_y1() * nh);
  std::size_t idx = 0;
  for (std::size_t x = 0; x < ch.size_x(); ++x)
    for (std::size_t y = 0; y < ch.size_y(); ++y)
      for (std::size_t y1 = 0; y1 < ch.size_y1(); ++y1) {
        const double base = px[x] * ch.prob(x, y, y1);
        for (std::size_t h = 0; h < nh; ++h) j[idx++] = base * tc.prob(y1, h);
      }
  return JointPmf({ch.size_x(), ch.size_y(), ch.size_y1(), nh}, std::move(j));
}
}  // namespace detail

// Compress-and-forward operating point for a given description channel:
// rate I(X; Y, Yhat1) at Wyner-Ziv link cost I(Y1; Yhat1 | Y).
inline CfEvaluation cf_rate(const Pmf& px, const DiscreteRelayChannel& ch,
                            const TestChannel& tc) {
  const JointPmf j = detail::description_joint(px, ch, tc);
  return CfEvaluation{mutual_information(j, {0}, {1, 3}),
                      conditional_mutual_information(j, {2}, {3}, {1})};
}

// Compress-hash-and-forward rate: covering with tc plus hashing of the
// residual link budget. If the covering already exceeds the budget the
// description itself is hashed, otherwise the leftover Delta hashes Y1.
inline double chf_rate(const Pmf& px, const DiscreteRelayChannel& ch, const TestChannel& tc,
                       double r0) {
  if (r0 < 0.0) throw std::invalid_argument("chf_rate: r0 must be nonnegative");
  const JointPmf j = detail::description_joint(px, ch, tc);
  const double link = conditional_mutual_information(j, {2}, {3}, {1});
  const double ixyh = mutual_information(j, {0}, {1, 3});
  if (link >= r0) {
    const double ixy = mutual_information(j, {0}, {1});
    return std::min(ixy + r0, ixyh);
  }
  const double delta = r0 - link;
  const double ixyhy1 = mutual_information(j, {0}, {1, 2, 3});
  return std::min(ixyh + delta, ixyhy1);
}

// State-dependent channel p(y|x,s) with i.i.d. state p(s) revealed to the
// decoder over the rate-limited link. Identifying the relay output with the
// state turns it into a relay channel with p(y, y1=s | x) = p(s) p(y|x,s).
struct StateChannel {
  Pmf state;
  std::size_t size_x;
  std::size_t size_y;
  std::vector<double> trans;  // p(y|x,s), index (x*sizeS + s)*sizeY + y

  StateChannel(Pmf state_pmf, std::size_t size_x, std::size_t size_y,
               std::vector<double> transition)
      : state(std::move(state_pmf)), size_x(size_x), size_y(size_y), trans(std::move(transition)) {
    if (size_x == 0 || size_y == 0)
      throw std::invalid_argument("StateChannel: alphabet sizes must be positive");
    if (trans.size() != size_x * state.size() * size_y)
      throw std::invalid_argument("StateChannel: transition tensor size mismatch");
    for (double p : trans)
      if (p < 0.0) throw std::invalid_argument("StateChannel: negative probability");
    for (std::size_t x = 0; x < size_x; ++x)
      for (std::size_t s = 0; s < state.size(); ++s) {
        double mass = 0.0;
        for (std::size_t y = 0; y < size_y; ++y) mass += prob_y(x, s, y);
        if (std::abs(mass - 1.0) > kMassTol)
          throw std::invalid_argument("StateChannel: row (x=" + std::to_string(x) +
                                      ", s=" + std::to_string(s) + ") has mass " +
                                      std::to_string(mass));
      }
  }

  std::size_t size_s() const { return state.size(); }

  double prob_y(std::size_t x, std::size_t s, std::size_t y) const {
    return trans[(x * state.size() + s) * size_y + y];
  }

  DiscreteRelayChannel to_relay_channel() const {
    std::vector<double> t(size_x * size_y * state.size(), 0.0);
    for (std::size_t x = 0; x < size_x; ++x)
      for (std::size_t s = 0; s < state.size(); ++s)
        for (std::size_t y = 0; y < size_y; ++y)
          t[(x * size_y + y) * state.size() + s] = state[s] * prob_y(x, s, y);
    return DiscreteRelayChannel(size_x, size_y, state.size(), std::move(t));
  }
};

// Rate-limited state information operating point: rate I(X;Y|Shat) at link
// cost I(S;Shat|Y). The state is independent of the input, so I(X;Shat) = 0
// and the rate coincides with I(X; Y, Shat).
inline CfEvaluation ah_rate(const Pmf& px, const StateChannel& sc, const TestChannel& tc) {
  const DiscreteRelayChannel relay = sc.to_relay_channel();
  const JointPmf j = detail::description_joint(px, relay, tc);
  return CfEvaluation{conditional_mutual_information(j, {0}, {1}, {3}),
                      conditional_mutual_information(j, {2}, {3}, {1})};
}

namespace detail {

// Direct (allocation-light) evaluation and exact score gradients for the
// alternating description search. All logs base 2; additive log2(e) terms
// cancel or are constant on the relevant simplexes and are dropped.
class DescriptionProblem {
 public:
  DescriptionProblem(const DiscreteRelayChannel& ch, std::size_t nh)
      : ch_(&ch), nx_(ch.size_x()), ny_(ch.size_y()), ny1_(ch.size_y1()), nh_(nh) {}

  std::size_t nx() const { return nx_; }
  std::size_t ny1() const { return ny1_; }
  std::size_t nh() const { return nh_; }

  struct Eval {
    double rate;  // I(X; Y, Yhat1)
    double link;  // I(Y1; Yhat1 | Y)
  };

  Eval evaluate(std::span<const double> px, const std::vector<double>& tc) const {
    std::vector<double> myh, myy1h, my, myy1, pyhx;
    build(px, tc, myh, myy1h, my, myy1, pyhx);
    double rate = 0.0;
    for (std::size_t x = 0; x < nx_; ++x) {
      if (px[x] == 0.0) continue;
      double d = 0.0;
      for (std::size_t i = 0; i < ny_ * nh_; ++i) {
        const double c = pyhx[x * ny_ * nh_ + i];
        if (c > kProbZeroTol) d += c * safe_log2_ratio(c, myh[i]);
      }
      rate += px[x] * d;
    }
    // I(Y1;Yhat1|Y) = H(Y,Y1) + H(Y,Yhat1) - H(Y) - H(Y,Y1,Yhat1)
    double link = entropy_sum(myy1) + entropy_sum(myh) - entropy_sum(my) - entropy_sum(myy1h);
    return Eval{rate, clamp_info(link)};
  }

  // d(rate)/d(px), d(link)/d(px): per-x scores.
  void grad_px(std::span<const double> px, const std::vector<double>& tc,
               std::vector<double>& g_rate, std::vector<double>& g_link) const {
    std::vector<double> myh, myy1h, my, myy1, pyhx;
    build(px, tc, myh, myy1h, my, myy1, pyhx);
    g_rate.assign(nx_, 0.0);
    g_link.assign(nx_, 0.0);
    for (std::size_t x = 0; x < nx_; ++x) {
      double dr = 0.0;
      for (std::size_t i = 0; i < ny_ * nh_; ++i) {
        const double c = pyhx[x * ny_ * nh_ + i];
        if (c > kProbZeroTol) dr += c * safe_log2_ratio(c, myh[i]);
      }
      double dl = 0.0;
      for (std::size_t y = 0; y < ny_; ++y)
        for (std::size_t y1 = 0; y1 < ny1_; ++y1) {
          const double cyy1 = ch_->prob(x, y, y1);
          if (cyy1 <= kProbZeroTol) continue;
          for (std::size_t h = 0; h < nh_; ++h) {
            const double c = cyy1 * tc[y1 * nh_ + h];
            if (c <= kProbZeroTol) continue;
            // log [ p(y1,h|y) / (p(y1|y) p(h|y)) ]
            const double num = myy1h[(y * ny1_ + y1) * nh_ + h] * my[y];
            const double den = myy1[y * ny1_ + y1] * myh[y * nh_ + h];
            dl += c * safe_log2_ratio(num, den);
          }
        }
      g_rate[x] = dr;
      g_link[x] = dl;
    }
  }

  // d(rate)/d(tc), d(link)/d(tc): per-entry scores, row-major [y1][h].
  void grad_tc(std::span<const double> px, const std::vector<double>& tc,
               std::vector<double>& g_rate, std::vector<double>& g_link) const {
    std::vector<double> myh, myy1h, my, myy1, pyhx;
    build(px, tc, myh, myy1h, my, myy1, pyhx);
    g_rate.assign(ny1_ * nh_, 0.0);
    g_link.assign(ny1_ * nh_, 0.0);
    // b(x,y,y1) = px p(y,y1|x); accumulate per (y1,h).
    for (std::size_t y1 = 0; y1 < ny1_; ++y1)
      for (std::size_t h = 0; h < nh_; ++h) {
        double dr = 0.0, dl = 0.0;
        for (std::size_t y = 0; y < ny_; ++y) {
          double byy1 = 0.0;
          for (std::size_t x = 0; x < nx_; ++x) {
            const double base = px[x] * ch_->prob(x, y, y1);
            if (base <= kProbZeroTol) continue;
            byy1 += base;
            dr += base * safe_log2_ratio(pyhx[(x * ny_ + y) * nh_ + h], myh[y * nh_ + h]);
          }
          if (byy1 > kProbZeroTol)
            dl += byy1 * safe_log2_ratio(myy1h[(y * ny1_ + y1) * nh_ + h], myh[y * nh_ + h]);
        }
        g_rate[y1 * nh_ + h] = dr;
        g_link[y1 * nh_ + h] = dl;
      }
  }

 private:
  void build(std::span<const double> px, const std::vector<double>& tc, std::vector<double>& myh,
             std::vector<double>& myy1h, std::vector<double>& my, std::vector<double>& myy1,
             std::vector<double>& pyhx) const {
    myh.assign(ny_ * nh_, 0.0);
    myy1h.assign(ny_ * ny1_ * nh_, 0.0);
    my.assign(ny_, 0.0);
    myy1.assign(ny_ * ny1_, 0.0);
    pyhx.assign(nx_ * ny_ * nh_, 0.0);
    for (std::size_t x = 0; x < nx_; ++x)
      for (std::size_t y = 0; y < ny_; ++y)
        for (std::size_t y1 = 0; y1 < ny1_; ++y1) {
          const double c = ch_->prob(x, y, y1);
          if (c <= kProbZeroTol) continue;
          const double base = px[x] * c;
          my[y] += base;
          myy1[y * ny1_ + y1] += base;
          for (std::size_t h = 0; h < nh_; ++h) {
            const double w = tc[y1 * nh_ + h];
            if (w == 0.0) continue;
            pyhx[(x * ny_ + y) * nh_ + h] += c * w;
            myh[y * nh_ + h] += base * w;
            myy1h[(y * ny1_ + y1) * nh_ + h] += base * w;
          }
        }
  }

  const DiscreteRelayChannel* ch_;
  std::size_t nx_, ny_, ny1_, nh_;
};

struct DescriptionCandidate {
  std::vector<double> px;
  std::vector<double> tc;
  double rate = -1.0;
  double link = 0.0;
};

// Blend tc toward the uniform (useless) description until the link cost
// drops to the budget; the blend path is continuous with link -> 0.
inline std::vector<double> repair_link(const DescriptionProblem& prob,
                                       std::span<const double> px, std::vector<double> tc,
                                       double r0) {
  if (prob.evaluate(px, tc).link <= r0 + kLinkFeasTol) return tc;
  const std::size_t cells = tc.size();
  const double uniform = 1.0 / static_cast<double>(prob.nh());
  const auto blended = [&](double alpha) {
    std::vector<double> out(cells);
    for (std::size_t i = 0; i < cells; ++i) out[i] = (1.0 - alpha) * tc[i] + alpha * uniform;
    return out;
  };
  double lo = 0.0, hi = 1.0;  // link(lo) > r0 >= link(hi) = 0
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (prob.evaluate(px, blended(mid)).link > r0)
      lo = mid;
    else
      hi = mid;
  }
  auto out = blended(hi);
  if (prob.evaluate(px, out).link > r0 + kLinkFeasTol) return blended(1.0);
  return out;
}

// Alternating penalized ascent on (px, tc); keeps the best feasible iterate.
inline void alternating_ascent(const DescriptionProblem& prob, double r0,
                               const OptimizerConfig& cfg, DescriptionCandidate& cand) {
  constexpr double kPenalty = 64.0;
  const auto objective = [&](const DescriptionProblem::Eval& e) {
    const double viol = std::max(0.0, e.link - r0);
    return e.rate - kPenalty * viol * viol;
  };
  const auto track = [&](const std::vector<double>& px, const std::vector<double>& tc,
                         const DescriptionProblem::Eval& e) {
    if (e.link <= r0 + kLinkFeasTol && e.rate > cand.rate) {
      cand.px = px;
      cand.tc = tc;
      cand.rate = e.rate;
      cand.link = e.link;
    }
  };

  std::vector<double> px = cand.px, tc = cand.tc;
  auto eval = prob.evaluate(px, tc);
  track(px, tc, eval);
  std::vector<double> gr, gl;
  for (int t = 1; t <= cfg.max_iterations; ++t) {
    const double s0 = 0.5 / std::sqrt(static_cast<double>(t));
    const double viol = std::max(0.0, eval.link - r0);
    // Input-distribution step.
    prob.grad_px(px, tc, gr, gl);
    for (std::size_t x = 0; x < px.size(); ++x) gr[x] -= 2.0 * kPenalty * viol * gl[x];
    double phi = objective(eval);
    for (double s = s0; s > s0 / 16.0; s *= 0.5) {
      std::vector<double> trial = px;
      for (std::size_t x = 0; x < trial.size(); ++x) trial[x] += s * gr[x];
      trial = project_simplex(std::move(trial));
      const auto e = prob.evaluate(trial, tc);
      if (objective(e) > phi + 1e-15) {
        px = std::move(trial);
        eval = e;
        track(px, tc, eval);
        break;
      }
    }
    // Description-channel step, rows projected independently.
    const double viol2 = std::max(0.0, eval.link - r0);
    prob.grad_tc(px, tc, gr, gl);
    for (std::size_t i = 0; i < tc.size(); ++i) gr[i] -= 2.0 * kPenalty * viol2 * gl[i];
    phi = objective(eval);
    for (double s = s0; s > s0 / 16.0; s *= 0.5) {
      std::vector<double> trial = tc;
      for (std::size_t i = 0; i < trial.size(); ++i) trial[i] += s * gr[i];
      for (std::size_t r = 0; r < prob.ny1(); ++r) {
        std::vector<double> row(trial.begin() + r * prob.nh(),
                                trial.begin() + (r + 1) * prob.nh());
        row = project_simplex(std::move(row));
        std::copy(row.begin(), row.end(), trial.begin() + r * prob.nh());
      }
      const auto e = prob.evaluate(px, trial);
      if (objective(e) > phi + 1e-15) {
        tc = std::move(trial);
        eval = e;
        track(px, tc, eval);
        break;
      }
    }
  }
  // Final repair of the last iterate (it may be infeasible but high-rate).
  auto repaired = repair_link(prob, px, tc, r0);
  track(px, repaired, prob.evaluate(px, repaired));
}

enum class DescriptionKind { compress_forward, state_information };

// Shared search for cf_optimal / ah_optimal. The search space is nonconvex;
// structured starts derived from the cut-set optimizer make the known-optimal
// operating points reachable, and random restarts cover the rest.
inline RatePoint optimize_description(const DiscreteRelayChannel& ch, double r0,
                                      const OptimizerConfig& cfg, DescriptionKind kind,
                                      const StateChannel* sc) {
  cfg.check();
  if (r0 < 0.0) throw std::invalid_argument("optimize_description: r0 must be nonnegative");
  const std::size_t nh = ch.size_y1() + 1;  // cardinality bound |Y1| + 1
  const DescriptionProblem prob(ch, nh);
  const std::size_t nx = ch.size_x();

  std::optional<RatePoint> reference;
  try {
    reference = cutset_capacity(ch, r0, cfg);
  } catch (const NotDeterministicError&) {
    // No cut-set reference: the relay output is not recoverable from (X,Y).
    if (kind == DescriptionKind::compress_forward) throw;
  }

  DescriptionCandidate best;
  best.px.assign(nx, 1.0 / static_cast<double>(nx));
  best.tc = TestChannel::uniform_rows(ch.size_y1(), nh).rows();
  {
    const auto e = prob.evaluate(best.px, best.tc);
    best.rate = e.rate;
    best.link = e.link;
  }

  const auto run_start = [&](std::vector<double> px0, std::vector<double> tc0, bool ascend) {
    DescriptionCandidate cand;
    cand.px = px0;
    cand.tc = repair_link(prob, px0, std::move(tc0), r0);
    const auto e = prob.evaluate(cand.px, cand.tc);
    cand.rate = e.link <= r0 + kLinkFeasTol ? e.rate : -1.0;
    cand.link = e.link;
    if (ascend) alternating_ascent(prob, r0, cfg, cand);
    if (cand.rate > best.rate) best = cand;
  };

  const auto identity_rows = TestChannel::identity(ch.size_y1(), nh).rows();
  if (reference) run_start(reference->argmax_input.probs(), identity_rows, false);
  run_start(std::vector<double>(nx, 1.0 / static_cast<double>(nx)), identity_rows, false);

  detail::Rng rng(mix_seed(cfg.seed, 0xCF));
  for (int s = 0; s < cfg.restarts; ++s) {
    std::vector<double> px0 = rng.simplex_point(nx);
    std::vector<double> tc0(ch.size_y1() * nh);
    for (std::size_t r = 0; r < ch.size_y1(); ++r) {
      auto row = rng.simplex_point(nh);
      std::copy(row.begin(), row.end(), tc0.begin() + r * nh);
    }
    run_start(std::move(px0), std::move(tc0), true);
  }

  Pmf px(best.px);
  TestChannel tc(ch.size_y1(), nh, best.tc);
  double rate = best.rate, link = best.link;
  if (kind == DescriptionKind::state_information) {
    const auto e = ah_rate(px, *sc, tc);  // report the I(X;Y|Shat) form
    rate = e.rate;
    link = e.link_cost;
  } else {
    const auto e = cf_rate(px, ch, tc);
    rate = e.rate;
    link = e.link_cost;
  }

  const JointPmf j = induced_joint(px, ch);
  const double t1 = mutual_information(j, {0}, {1}) + r0;
  const double t2 = mutual_information(j, {0}, {1, 2});
  std::optional<double> gap;
  bool converged = true;
  if (reference) {
    gap = std::max(0.0, reference->rate - rate);
    converged = *gap <= kDescriptionSearchGap;
  }
  MinBranch branch = std::abs(t1 - t2) < kTieTol
                         ? MinBranch::tie
                         : (t1 < t2 ? MinBranch::direct_plus_link : MinBranch::relay_joint);
  return RatePoint{r0,      rate, std::move(px), std::move(tc), t1, t2, branch,
                   link,    gap,  converged};
}

}  // namespace detail

// Best compress-and-forward point: max I(X;Y,Yhat1) over p(x) and
// p(yhat1|y1) subject to I(Y1;Yhat1|Y) <= r0, |Yhat1| = |Y1| + 1.
inline RatePoint cf_optimal(const DiscreteRelayChannel& ch, double r0,
                            const OptimizerConfig& cfg = {}) {
  return detail::optimize_description(ch, r0, cfg, detail::DescriptionKind::compress_forward,
                                      nullptr);
}

// Best rate-limited-state-information point: max I(X;Y|Shat) over p(x) and
// p(shat|s) subject to I(S;Shat|Y) <= r0, |Shat| = |S| + 1.
inline RatePoint ah_optimal(const StateChannel& sc, double r0, const OptimizerConfig& cfg = {}) {
  const DiscreteRelayChannel relay = sc.to_relay_channel();
  return detail::optimize_description(relay, r0, cfg, detail::DescriptionKind::state_information,
                                      &sc);
}

}  // namespace relaycap
