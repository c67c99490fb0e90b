#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "linkdrain/bits.hpp"
#include "linkdrain/rng.hpp"

namespace linkdrain {

/// A set of links activated simultaneously; bit i set <=> link i is a member.
struct Group {
  mask_t mask;

  explicit Group(mask_t m) : mask(m) {
    if (m == 0) throw std::invalid_argument("Group: empty set");
  }

  int size() const { return popcount(mask); }
  bool contains_link(int i) const { return contains(mask, i); }

  friend bool operator==(const Group& a, const Group& b) { return a.mask == b.mask; }
};

/// Gains gain[i][j] from the transmitter of link i to the receiver of link j,
/// per-link transmit powers, and the noise variance.
struct ChannelMatrix {
  int n = 0;
  std::vector<std::vector<double>> gain;
  std::vector<double> power;
  double sigma2 = 0.0;

  void validate() const {
    if (n < 1 || n > kMaxLinks) throw std::invalid_argument("ChannelMatrix: bad link count");
    if (static_cast<int>(gain.size()) != n || static_cast<int>(power.size()) != n)
      throw std::invalid_argument("ChannelMatrix: dimension mismatch");
    for (int i = 0; i < n; ++i) {
      if (static_cast<int>(gain[i].size()) != n)
        throw std::invalid_argument("ChannelMatrix: gain matrix not square");
      for (int j = 0; j < n; ++j)
        if (!(gain[i][j] >= 0.0)) throw std::invalid_argument("ChannelMatrix: negative gain");
      if (!(gain[i][i] > 0.0)) throw std::invalid_argument("ChannelMatrix: zero direct gain");
      if (!(power[i] > 0.0)) throw std::invalid_argument("ChannelMatrix: nonpositive power");
    }
    if (!(sigma2 > 0.0)) throw std::invalid_argument("ChannelMatrix: nonpositive noise");
  }
};

/// Signal-to-interference-plus-noise ratio of link i when group c is active.
inline double sinr(int i, Group c, const ChannelMatrix& ch) {
  if (!c.contains_link(i)) throw std::domain_error("sinr: link not in group");
  if (i < 0 || i >= ch.n) throw std::domain_error("sinr: link index out of range");
  double interference = 0.0;
  for_each_bit(c.mask, [&](int k) {
    if (k != i) interference += ch.power[k] * ch.gain[k][i];
  });
  return ch.power[i] * ch.gain[i][i] / (interference + ch.sigma2);
}

/// Inverse of the Gaussian tail Q(x) = P(Z > x), for z in (0, 0.5].
/// Bisection bracket then Newton polish; relative accuracy ~1e-10.
inline double inverse_q(double z) {
  if (!(z > 0.0 && z <= 0.5)) throw std::invalid_argument("inverse_q: z outside (0, 0.5]");
  auto q = [](double x) { return 0.5 * std::erfc(x * M_SQRT1_2); };
  double lo = 0.0, hi = 1.0;
  while (q(hi) > z) hi *= 2.0;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    (q(mid) > z ? lo : hi) = mid;
  }
  double x = 0.5 * (lo + hi);
  constexpr double inv_sqrt_2pi = 0.3989422804014327;
  for (int it = 0; it < 8; ++it) {
    const double pdf = inv_sqrt_2pi * std::exp(-0.5 * x * x);
    if (pdf <= 0.0) break;
    const double step = (q(x) - z) / pdf;
    x += step;
    if (std::abs(step) <= 1e-12 * std::max(1.0, std::abs(x))) break;
  }
  return x;
}

enum class RateVariant { binary, shannon, bpsk, cardinality };

inline const char* to_string(RateVariant v) {
  switch (v) {
    case RateVariant::binary: return "binary";
    case RateVariant::shannon: return "shannon";
    case RateVariant::bpsk: return "bpsk";
    case RateVariant::cardinality: return "cardinality";
  }
  return "?";
}

inline RateVariant rate_variant_from_string(const std::string& s) {
  if (s == "binary") return RateVariant::binary;
  if (s == "shannon") return RateVariant::shannon;
  if (s == "bpsk") return RateVariant::bpsk;
  if (s == "cardinality") return RateVariant::cardinality;
  throw std::invalid_argument("unknown rate variant: " + s);
}

/// The rate function F: (link, group) -> service rate in bits/s per unit
/// bandwidth. Four variants:
///   binary       1 when every member of the group meets the SINR threshold,
///                else 0 (infeasible matchings are zero for all members)
///   shannon      log2(1 + SINR)
///   bpsk         min{ 2/Qinv(z)^2 * SINR, B }
///   cardinality  r_{|C|}, channel-free symmetric rates
class RateOracle {
 public:
  static RateOracle binary(ChannelMatrix ch, double gamma_star) {
    ch.validate();
    if (!(gamma_star > 0.0)) throw std::invalid_argument("binary: gamma_star must be positive");
    RateOracle o(RateVariant::binary, std::move(ch));
    o.gamma_star_ = gamma_star;
    return o;
  }

  static RateOracle shannon(ChannelMatrix ch) {
    ch.validate();
    return RateOracle(RateVariant::shannon, std::move(ch));
  }

  static RateOracle bpsk(ChannelMatrix ch, double z, double max_rate) {
    ch.validate();
    if (!(max_rate > 0.0)) throw std::invalid_argument("bpsk: max rate must be positive");
    RateOracle o(RateVariant::bpsk, std::move(ch));
    o.z_ = z;
    o.max_rate_ = max_rate;
    o.bpsk_coef_ = 2.0 / std::pow(inverse_q(z), 2);
    return o;
  }

  static RateOracle cardinality(std::vector<double> r) {
    if (r.empty() || r.size() > kMaxLinks)
      throw std::invalid_argument("cardinality: bad rate vector length");
    for (std::size_t m = 0; m < r.size(); ++m) {
      if (!(r[m] > 0.0)) throw std::invalid_argument("cardinality: rates must be positive");
      if (m > 0 && r[m] > r[m - 1])
        throw std::invalid_argument("cardinality: rates must be nonincreasing");
    }
    RateOracle o(RateVariant::cardinality, ChannelMatrix{});
    o.card_rates_ = std::move(r);
    return o;
  }

  RateVariant variant() const { return variant_; }
  const ChannelMatrix& channel() const { return channel_; }
  double gamma_star() const { return gamma_star_; }
  double bpsk_z() const { return z_; }
  double bpsk_max_rate() const { return max_rate_; }
  const std::vector<double>& cardinality_rates() const { return card_rates_; }

  int link_count() const {
    return variant_ == RateVariant::cardinality ? static_cast<int>(card_rates_.size())
                                                : channel_.n;
  }

  double rate(int i, Group c) const {
    if (!c.contains_link(i)) return 0.0;
    switch (variant_) {
      case RateVariant::cardinality: {
        const int m = c.size();
        if (m > static_cast<int>(card_rates_.size()))
          throw std::domain_error("cardinality oracle: group larger than rate vector");
        return card_rates_[m - 1];
      }
      case RateVariant::binary: {
        bool feasible = true;
        for_each_bit(c.mask, [&](int j) {
          if (feasible && sinr(j, c, channel_) < gamma_star_) feasible = false;
        });
        return feasible ? 1.0 : 0.0;
      }
      case RateVariant::shannon:
        return std::log2(1.0 + sinr(i, c, channel_));
      case RateVariant::bpsk:
        return std::min(bpsk_coef_ * sinr(i, c, channel_), max_rate_);
    }
    return 0.0;
  }

  /// Rates of the members of c, in ascending link order.
  std::vector<double> rate_vector(Group c) const {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(c.size()));
    for_each_bit(c.mask, [&](int i) { out.push_back(rate(i, c)); });
    return out;
  }

  double sum_rate(Group c) const {
    double s = 0.0;
    for_each_bit(c.mask, [&](int i) { s += rate(i, c); });
    return s;
  }

  /// Applies a relabeling of the links: new index k corresponds to old index
  /// perm[k]. Cardinality oracles are permutation-invariant.
  RateOracle permuted(const std::vector<int>& perm) const {
    if (variant_ == RateVariant::cardinality) return *this;
    const int n = channel_.n;
    if (static_cast<int>(perm.size()) != n)
      throw std::invalid_argument("permuted: bad permutation size");
    ChannelMatrix ch;
    ch.n = n;
    ch.sigma2 = channel_.sigma2;
    ch.gain.assign(n, std::vector<double>(n));
    ch.power.resize(n);
    for (int a = 0; a < n; ++a) {
      ch.power[a] = channel_.power[perm[a]];
      for (int b = 0; b < n; ++b) ch.gain[a][b] = channel_.gain[perm[a]][perm[b]];
    }
    RateOracle o(variant_, std::move(ch));
    o.gamma_star_ = gamma_star_;
    o.z_ = z_;
    o.max_rate_ = max_rate_;
    o.bpsk_coef_ = bpsk_coef_;
    return o;
  }

 private:
  RateOracle(RateVariant v, ChannelMatrix ch) : variant_(v), channel_(std::move(ch)) {}

  RateVariant variant_;
  ChannelMatrix channel_;
  double gamma_star_ = 0.0;
  double z_ = 0.0;
  double max_rate_ = 0.0;
  double bpsk_coef_ = 0.0;
  std::vector<double> card_rates_;
};

struct MonotonicityReport {
  bool pass = true;
  // Witness when pass == false: F(link, inner) < F(link, outer), inner ⊂ outer.
  int link = -1;
  mask_t inner = 0;
  mask_t outer = 0;
};

/// Checks the rate monotonicity property F(i, C1) >= F(i, C2) for nested
/// groups. Exhaustive for n <= 12 via single-link extensions (equivalent to
/// all nested pairs by transitivity); otherwise samples random nested pairs
/// within the budget. Witness selection is deterministic: lowest outer mask,
/// then lowest added link, then lowest member link.
inline MonotonicityReport verify_monotonicity(const RateOracle& oracle, int n,
                                              std::size_t sample_budget = 20000,
                                              std::uint64_t seed = 1) {
  if (n < 1 || n > kMaxLinks) throw std::invalid_argument("verify_monotonicity: bad n");
  MonotonicityReport rep;
  auto record = [&](int i, mask_t c1, mask_t c2) {
    rep.pass = false;
    rep.link = i;
    rep.inner = c1;
    rep.outer = c2;
  };

  if (n <= 12) {
    const mask_t all = full_mask(n);
    for (mask_t outer = 1; outer <= all; ++outer) {
      if (popcount(outer) < 2) continue;
      bool done = false;
      for_each_bit(outer, [&](int added) {
        if (done) return;
        const mask_t inner = outer & ~bit(added);
        const Group gi(inner), go(outer);
        for_each_bit(inner, [&](int i) {
          if (done) return;
          if (oracle.rate(i, gi) < oracle.rate(i, go)) {
            record(i, inner, outer);
            done = true;
          }
        });
      });
      if (done) return rep;
    }
    return rep;
  }

  Rng rng(seed);
  for (std::size_t s = 0; s < sample_budget; ++s) {
    mask_t outer = 0;
    while (popcount(outer) < 2) outer = rng.next_u64() & full_mask(n);
    const auto members = bits_of(outer);
    const int drop = members[rng.below(members.size())];
    mask_t inner = outer & ~bit(drop);
    // Occasionally shrink further so non-adjacent pairs are covered too.
    while (popcount(inner) > 1 && rng.uniform01() < 0.5) {
      const auto in_members = bits_of(inner);
      inner &= ~bit(in_members[rng.below(in_members.size())]);
    }
    const Group gi(inner), go(outer);
    bool done = false;
    for_each_bit(inner, [&](int i) {
      if (done) return;
      if (oracle.rate(i, gi) < oracle.rate(i, go)) {
        record(i, inner, outer);
        done = true;
      }
    });
    if (done) return rep;
  }
  return rep;
}

/// Per-run memo of oracle outputs keyed by group mask. Results are identical
/// to direct oracle calls; not internally synchronized, so each run owns one.
class RateCache {
 public:
  explicit RateCache(const RateOracle& oracle)
      : oracle_(&oracle), n_(oracle.link_count()) {
    if (n_ <= kDenseLimit)
      offsets_.assign(std::size_t{1} << n_, kUnset);
  }

  int link_count() const { return n_; }
  const RateOracle& oracle() const { return *oracle_; }

  /// Member rates of the group, ascending link order (ties to rate_vector).
  const double* rates(mask_t m) {
    if (offsets_.empty()) {
      scratch_ = oracle_->rate_vector(Group(m));
      return scratch_.data();
    }
    std::uint64_t off = offsets_[m];
    if (off == kUnset) {
      const auto v = oracle_->rate_vector(Group(m));
      off = pool_.size();
      pool_.insert(pool_.end(), v.begin(), v.end());
      offsets_[m] = off;
    }
    return pool_.data() + off;
  }

  double sum_rate(mask_t m) {
    const double* r = rates(m);
    const int k = popcount(m);
    double s = 0.0;
    for (int j = 0; j < k; ++j) s += r[j];
    return s;
  }

  double rate(int i, mask_t m) {
    if (!contains(m, i)) return 0.0;
    const int pos = popcount(m & (bit(i) - 1));
    return rates(m)[pos];
  }

 private:
  static constexpr int kDenseLimit = 22;
  static constexpr std::uint64_t kUnset = ~std::uint64_t{0};

  const RateOracle* oracle_;
  int n_;
  std::vector<std::uint64_t> offsets_;
  std::vector<double> pool_;
  std::vector<double> scratch_;
};

}  // namespace linkdrain
