// Exact finite-alphabet information measures, all in bits (base-2 logs),
// plus the strong joint-typicality test used by the decoder.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "relaycap/pmf.hpp"

namespace relaycap {

namespace detail {

inline double entropy_sum(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs)
    if (p > kProbZeroTol) h -= p * std::log2(p);
  return h;
}

inline void check_axes_disjoint(const JointPmf& j,
                                std::span<const std::vector<std::size_t>> sets) {
  std::vector<bool> seen(j.rank(), false);
  for (const auto& axes : sets) {
    if (axes.empty()) throw std::invalid_argument("info: empty axis set");
    for (std::size_t a : axes) {
      if (a >= j.rank()) throw std::invalid_argument("info: axis out of range");
      if (seen[a]) throw std::invalid_argument("info: overlapping axis sets");
      seen[a] = true;
    }
  }
}

inline double entropy_axes(const JointPmf& j, std::vector<std::size_t> axes) {
  return entropy_sum(j.marginal(axes).probs());
}

inline std::vector<std::size_t> axes_union(const std::vector<std::size_t>& a,
                                           const std::vector<std::size_t>& b) {
  std::vector<std::size_t> u = a;
  u.insert(u.end(), b.begin(), b.end());
  return u;
}

// Unclamped values, used by the nonnegativity property tests.
inline double mutual_information_raw(const JointPmf& j, const std::vector<std::size_t>& axes_a,
                                     const std::vector<std::size_t>& axes_b) {
  const std::vector<std::size_t> sets[] = {axes_a, axes_b};
  check_axes_disjoint(j, sets);
  return entropy_axes(j, axes_a) + entropy_axes(j, axes_b) -
         entropy_axes(j, axes_union(axes_a, axes_b));
}

inline double conditional_mutual_information_raw(const JointPmf& j,
                                                 const std::vector<std::size_t>& axes_a,
                                                 const std::vector<std::size_t>& axes_b,
                                                 const std::vector<std::size_t>& axes_c) {
  const std::vector<std::size_t> sets[] = {axes_a, axes_b, axes_c};
  check_axes_disjoint(j, sets);
  return entropy_axes(j, axes_union(axes_a, axes_c)) +
         entropy_axes(j, axes_union(axes_b, axes_c)) -
         entropy_axes(j, axes_union(axes_union(axes_a, axes_b), axes_c)) -
         entropy_axes(j, axes_c);
}

inline double clamp_info(double v) { return v < 0.0 ? 0.0 : v; }

}  // namespace detail

inline double entropy(const Pmf& p) { return detail::entropy_sum(p.probs()); }
inline double entropy(const JointPmf& j) { return detail::entropy_sum(j.probs()); }

// H(A | C) over the named axes.
inline double conditional_entropy(const JointPmf& j, const std::vector<std::size_t>& axes_a,
                                  const std::vector<std::size_t>& axes_c) {
  const std::vector<std::size_t> sets[] = {axes_a, axes_c};
  detail::check_axes_disjoint(j, sets);
  return detail::entropy_axes(j, detail::axes_union(axes_a, axes_c)) -
         detail::entropy_axes(j, axes_c);
}

// I(A; B) = H(A) + H(B) - H(A,B), tiny negative round-off clamped to 0.
inline double mutual_information(const JointPmf& j, const std::vector<std::size_t>& axes_a,
                                 const std::vector<std::size_t>& axes_b) {
  return detail::clamp_info(detail::mutual_information_raw(j, axes_a, axes_b));
}

inline double conditional_mutual_information(const JointPmf& j,
                                             const std::vector<std::size_t>& axes_a,
                                             const std::vector<std::size_t>& axes_b,
                                             const std::vector<std::size_t>& axes_c) {
  return detail::clamp_info(
      detail::conditional_mutual_information_raw(j, axes_a, axes_b, axes_c));
}

// Strong typicality in relative-deviation form: the empirical joint type must
// satisfy |emp(a,b) - p(a,b)| <= eps * p(a,b) on the support of p and be zero
// off the support. The 1e-12 additive slack guards floating-point noise at
// interval boundaries.
inline bool is_jointly_typical(std::span<const int> xs, std::span<const int> ys,
                               const JointPmf& pxy, double eps) {
  if (pxy.rank() != 2) throw std::invalid_argument("is_jointly_typical: joint must have 2 axes");
  if (xs.size() != ys.size()) throw std::invalid_argument("is_jointly_typical: length mismatch");
  if (xs.empty()) throw std::invalid_argument("is_jointly_typical: empty sequences");
  if (eps <= 0.0) throw std::invalid_argument("is_jointly_typical: eps must be positive");
  const std::size_t na = pxy.dims()[0];
  const std::size_t nb = pxy.dims()[1];
  std::vector<std::size_t> counts(na * nb, 0);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] < 0 || static_cast<std::size_t>(xs[i]) >= na || ys[i] < 0 ||
        static_cast<std::size_t>(ys[i]) >= nb)
      throw std::invalid_argument("is_jointly_typical: symbol out of range");
    ++counts[static_cast<std::size_t>(xs[i]) * nb + static_cast<std::size_t>(ys[i])];
  }
  const double n = static_cast<double>(xs.size());
  for (std::size_t a = 0; a < na; ++a) {
    for (std::size_t b = 0; b < nb; ++b) {
      const double p = pxy.at(std::array<std::size_t, 2>{a, b});
      const double emp = static_cast<double>(counts[a * nb + b]) / n;
      if (p <= kProbZeroTol) {
        if (counts[a * nb + b] != 0) return false;
      } else if (std::abs(emp - p) > eps * p + 1e-12) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace relaycap
