// Executable hash-and-forward scheme: random codebook, relay binning, list
// decoding with a hash check, and Monte Carlo error estimation.
//
// The relay's uniform random binning over all |Y1|^n sequences cannot be
// materialized as a table; BinHash realizes it as a seeded affine hash over a
// prime field, which is pairwise independent across distinct sequences --
// enough for the union-bound behavior of bin-collision errors, and the
// independence contract is auditable over seeds.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
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

inline constexpr std::size_t kMaxCodebookWords = std::size_t{1} << 24;
inline constexpr std::size_t kSimMaxBlockLength = 20;
inline constexpr std::size_t kSimMaxWords = std::size_t{1} << 20;
inline constexpr std::size_t kSimMaxTrials = 1000000;

struct Codebook {
  std::size_t n = 0;
  std::size_t num_words = 0;
  unsigned k_bits = 0;
  std::uint64_t gen_seed = 0;
  Pmf source_px;
  std::vector<int> words;  // num_words x n, row-major

  std::span<const int> word(std::size_t w) const {
    return std::span<const int>(words).subspan(w * n, n);
  }
};

// 2^ceil(n R) codewords drawn i.i.d. from px; bit-identical regeneration
// from (seed, n, rate, px). The 1e-9 slack keeps ceil stable when n*R is an
// integer up to rounding.
inline Codebook build_codebook(const Pmf& px, std::size_t n, double rate, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("build_codebook: n must be >= 1");
  if (rate <= 0.0) throw std::invalid_argument("build_codebook: rate must be positive");
  const double k_exact = static_cast<double>(n) * rate;
  const unsigned k_bits = static_cast<unsigned>(std::ceil(k_exact - 1e-9));
  if (k_bits >= 25)
    throw std::invalid_argument("build_codebook: 2^" + std::to_string(k_bits) +
                                " codewords exceeds the desk-scale guard");
  const std::size_t num_words = std::size_t{1} << k_bits;
  Codebook cb{n, num_words, k_bits, seed, px, {}};
  cb.words.resize(num_words * n);
  detail::Rng rng(seed);
  for (auto& sym : cb.words) sym = static_cast<int>(rng.categorical(px.probs()));
  return cb;
}

// Seeded affine hash ((sum_i a_i u_i + b) mod P) mod 2^bin_bits over the
// Mersenne prime P = 2^61 - 1. For fixed distinct sequences the pre-fold
// pair is uniform over Z_P^2, so bin collisions occur with probability
// 2^-bin_bits (1 + O(2^bin_bits / P)).
class BinHash {
 public:
  static constexpr std::uint64_t kPrime = (std::uint64_t{1} << 61) - 1;

  BinHash(std::uint64_t hash_seed, std::size_t n, unsigned bin_bits)
      : seed_(hash_seed), n_(n), bits_(bin_bits) {
    if (n < 1) throw std::invalid_argument("BinHash: n must be >= 1");
    if (bin_bits > 60) throw std::invalid_argument("BinHash: bin_bits must be <= 60");
    detail::Rng rng(hash_seed);
    coeffs_.resize(n);
    for (auto& a : coeffs_) a = draw_mod_p(rng);
    offset_ = draw_mod_p(rng);
  }

  std::uint64_t hash_seed() const { return seed_; }
  std::size_t n() const { return n_; }
  unsigned bin_bits() const { return bits_; }
  std::uint64_t num_bins() const { return std::uint64_t{1} << bits_; }

  std::uint64_t operator()(std::span<const int> y1s) const {
    if (y1s.size() != n_) throw std::invalid_argument("BinHash: sequence length mismatch");
    unsigned __int128 acc = offset_;
    for (std::size_t i = 0; i < n_; ++i) {
      acc += static_cast<unsigned __int128>(coeffs_[i]) * static_cast<std::uint64_t>(y1s[i]);
      acc %= kPrime;
    }
    return static_cast<std::uint64_t>(acc) & (num_bins() - 1);
  }

 private:
  static std::uint64_t draw_mod_p(detail::Rng& rng) {
    // Rejection keeps the draw exactly uniform over [0, P).
    constexpr std::uint64_t kLimit = kPrime * 8;  // == 2^64 - 8
    std::uint64_t v;
    do {
      v = rng.u64();
    } while (v >= kLimit);
    return v % kPrime;
  }

  std::uint64_t seed_;
  std::size_t n_;
  unsigned bits_;
  std::vector<std::uint64_t> coeffs_;
  std::uint64_t offset_ = 0;
};

inline std::uint64_t relay_forward(std::span<const int> y1s, const BinHash& h) { return h(y1s); }

struct DecodeResult {
  enum class Status { decoded, empty_list, empty_bin_match, ambiguous };
  Status status = Status::empty_list;
  std::size_t message = 0;  // valid only when status == decoded
  std::size_t list_size = 0;
  std::size_t bin_matches = 0;
  std::size_t undefined_lookups = 0;  // list members excluded by an undefined f(x,y)
};

// List decoder: collect codewords jointly typical with ys, map each through
// the relay function, and accept iff exactly one list member reproduces the
// received bin index.
inline DecodeResult haf_decode(std::span<const int> ys, std::uint64_t bin_idx, const Codebook& cb,
                               const RelayFunction& f, const JointPmf& pxy, double eps,
                               const BinHash& h) {
  if (ys.size() != cb.n) throw std::invalid_argument("haf_decode: output length mismatch");
  if (h.n() != cb.n) throw std::invalid_argument("haf_decode: hash length mismatch");
  DecodeResult res;
  std::vector<int> y1(cb.n);
  for (std::size_t w = 0; w < cb.num_words; ++w) {
    const auto xw = cb.word(w);
    if (!is_jointly_typical(xw, ys, pxy, eps)) continue;
    ++res.list_size;
    bool defined = true;
    for (std::size_t i = 0; i < cb.n; ++i) {
      const auto v = f(static_cast<std::size_t>(xw[i]), static_cast<std::size_t>(ys[i]));
      if (!v) {
        defined = false;
        break;
      }
      y1[i] = *v;
    }
    if (!defined) {
      // A zero-probability (x,y) pair leaves f undefined there; such a
      // codeword cannot be the transmitted one.
      ++res.undefined_lookups;
      continue;
    }
    if (h(y1) == bin_idx) {
      ++res.bin_matches;
      res.message = w;
    }
  }
  if (res.list_size == 0)
    res.status = DecodeResult::Status::empty_list;
  else if (res.bin_matches == 0)
    res.status = DecodeResult::Status::empty_bin_match;
  else if (res.bin_matches > 1)
    res.status = DecodeResult::Status::ambiguous;
  else
    res.status = DecodeResult::Status::decoded;
  return res;
}

struct WilsonInterval {
  double lo = 0.0;
  double hi = 0.0;
};

inline WilsonInterval wilson95(std::size_t successes, std::size_t trials) {
  if (trials == 0) throw std::invalid_argument("wilson95: trials must be positive");
  constexpr double z = 1.959963984540054;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double denom = 1.0 + z * z / n;
  const double center = (p + z * z / (2.0 * n)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n));
  return WilsonInterval{std::max(0.0, center - half), std::min(1.0, center + half)};
}

struct SimCounts {
  std::size_t err_a = 0;         // true pair atypical
  std::size_t err_b = 0;         // bin collision with a different relay sequence
  std::size_t err_c = 0;         // distinct codeword with the same relay sequence
  std::size_t err_none = 0;      // residual errors outside the three events
  std::size_t decoded_ok = 0;
  std::size_t decoded_wrong = 0;
  std::size_t empty_list = 0;
  std::size_t empty_bin_match = 0;
  std::size_t ambiguous = 0;

  SimCounts& operator+=(const SimCounts& o) {
    err_a += o.err_a;
    err_b += o.err_b;
    err_c += o.err_c;
    err_none += o.err_none;
    decoded_ok += o.decoded_ok;
    decoded_wrong += o.decoded_wrong;
    empty_list += o.empty_list;
    empty_bin_match += o.empty_bin_match;
    ambiguous += o.ambiguous;
    return *this;
  }
};

struct SimReport {
  // Parameter echo; together with the master seed this reproduces the run.
  std::size_t n = 0;
  double rate = 0.0;
  double r0 = 0.0;
  double eps = 0.0;
  std::size_t trials = 0;
  std::uint64_t master_seed = 0;
  bool fixed_codebook = false;
  Pmf px = Pmf::point_mass(1, 0);
  unsigned k_bits = 0;
  unsigned bin_bits = 0;
  std::size_t num_words = 0;
  double rate_effective = 0.0;  // k_bits / n

  SimCounts counts;
  std::size_t errors = 0;
  double pe_hat = 0.0;
  WilsonInterval wilson;
};

namespace detail {
// Seed streams per trial, all derived from the master seed.
enum : std::uint64_t { kStreamCodebook = 1, kStreamHash = 2, kStreamMessage = 3, kStreamNoise = 4 };
}  // namespace detail

// Monte Carlo over independent trials: fresh codebook and hash per trial
// unless fixed_codebook pins the codebook to trial 0. Error attribution
// precedence is a > b > c, with ground truth inspected directly.
inline SimReport simulate_haf(const DiscreteRelayChannel& ch, const Pmf& px, std::size_t n,
                              double rate, double r0, double eps, std::size_t trials,
                              std::uint64_t master_seed, bool fixed_codebook = false,
                              unsigned threads = 1) {
  if (n < 1 || n > kSimMaxBlockLength)
    throw std::invalid_argument("simulate_haf: n out of desk-scale range [1, 20]");
  if (trials < 1 || trials > kSimMaxTrials)
    throw std::invalid_argument("simulate_haf: trials out of range [1, 1e6]");
  if (r0 < 0.0) throw std::invalid_argument("simulate_haf: r0 must be nonnegative");
  if (eps <= 0.0) throw std::invalid_argument("simulate_haf: eps must be positive");
  const RelayFunction f = validate(ch);
  const JointPmf pxy = induced_joint(px, ch).marginal({0, 1});
  const unsigned bin_bits =
      static_cast<unsigned>(std::floor(static_cast<double>(n) * r0 + 1e-9));
  if (bin_bits > 60) throw std::invalid_argument("simulate_haf: n * r0 exceeds 60 bin bits");
  if (rate <= 0.0) throw std::invalid_argument("simulate_haf: rate must be positive");
  const unsigned k_bits =
      static_cast<unsigned>(std::ceil(static_cast<double>(n) * rate - 1e-9));
  if (k_bits > 20)
    throw std::invalid_argument("simulate_haf: codebook exceeds the desk-scale guard 2^20");
  const std::size_t num_words = std::size_t{1} << k_bits;

  std::optional<Codebook> fixed;
  if (fixed_codebook)
    fixed = build_codebook(px, n, rate, detail::mix_seed(master_seed, detail::kStreamCodebook, 0));

  // Aggregate per-trial into per-block counters; counts are order-independent.
  std::vector<SimCounts> per_trial_block(64);
  detail::parallel_for(64, threads, [&](std::size_t block) {
    SimCounts local;
    std::vector<int> y1_true(n), y1_w(n);
    for (std::size_t t = block; t < trials; t += 64) {
      const Codebook cb =
          fixed ? *fixed
                : build_codebook(px, n, rate,
                                 detail::mix_seed(master_seed, detail::kStreamCodebook, t));
      const BinHash h(detail::mix_seed(master_seed, detail::kStreamHash, t), n, bin_bits);
      detail::Rng msg_rng(detail::mix_seed(master_seed, detail::kStreamMessage, t));
      const std::size_t w_true = msg_rng.index_pow2(cb.k_bits);
      const auto xw = cb.word(w_true);
      const auto [ys, y1s] =
          sample(ch, xw, detail::mix_seed(master_seed, detail::kStreamNoise, t));
      const std::uint64_t bin_idx = h(y1s);
      const DecodeResult res = haf_decode(ys, bin_idx, cb, f, pxy, eps, h);

      switch (res.status) {
        case DecodeResult::Status::empty_list: ++local.empty_list; break;
        case DecodeResult::Status::empty_bin_match: ++local.empty_bin_match; break;
        case DecodeResult::Status::ambiguous: ++local.ambiguous; break;
        case DecodeResult::Status::decoded:
          ++(res.message == w_true ? local.decoded_ok : local.decoded_wrong);
          break;
      }
      const bool error = res.status != DecodeResult::Status::decoded || res.message != w_true;
      if (!error) continue;

      if (!is_jointly_typical(xw, ys, pxy, eps)) {
        ++local.err_a;
        continue;
      }
      // True pair typical: inspect the wrong list members for a bin
      // collision (b) or an identical relay sequence (c).
      bool has_b = false, has_c = false;
      for (std::size_t w = 0; w < cb.num_words && !has_b; ++w) {
        if (w == w_true) continue;
        const auto cand = cb.word(w);
        if (!is_jointly_typical(cand, ys, pxy, eps)) continue;
        bool defined = true;
        for (std::size_t i = 0; i < n; ++i) {
          const auto v = f(static_cast<std::size_t>(cand[i]), static_cast<std::size_t>(ys[i]));
          if (!v) {
            defined = false;
            break;
          }
          y1_w[i] = *v;
        }
        if (!defined) continue;
        if (std::equal(y1_w.begin(), y1_w.end(), y1s.begin()))
          has_c = true;
        else if (h(y1_w) == bin_idx)
          has_b = true;
      }
      if (has_b)
        ++local.err_b;
      else if (has_c)
        ++local.err_c;
      else
        ++local.err_none;
    }
    per_trial_block[block] = local;
  });

  SimReport rep;
  rep.n = n;
  rep.rate = rate;
  rep.r0 = r0;
  rep.eps = eps;
  rep.trials = trials;
  rep.master_seed = master_seed;
  rep.fixed_codebook = fixed_codebook;
  rep.px = px;
  rep.k_bits = k_bits;
  rep.bin_bits = bin_bits;
  rep.num_words = num_words;
  rep.rate_effective = static_cast<double>(k_bits) / static_cast<double>(n);
  for (const auto& c : per_trial_block) rep.counts += c;
  rep.errors = rep.counts.err_a + rep.counts.err_b + rep.counts.err_c + rep.counts.err_none;
  rep.pe_hat = static_cast<double>(rep.errors) / static_cast<double>(trials);
  rep.wilson = wilson95(rep.errors, trials);
  return rep;
}

}  // namespace relaycap
