#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "linkdrain/errors.hpp"
#include "linkdrain/rate_model.hpp"
#include "linkdrain/rng.hpp"

namespace linkdrain {

/// A scheduling instance (N, d, F). Links are relabeled internally so that
/// demands are ascending; the permutation back to the caller's link ids is
/// kept for reporting. All solver code works in internal indices.
class Instance {
 public:
  Instance(std::vector<double> demands, RateOracle oracle)
      : n_(static_cast<int>(demands.size())) {
    if (n_ < 1 || n_ > kMaxLinks) throw SchemaError("instance: link count out of range");
    if (oracle.link_count() != n_) throw SchemaError("instance: oracle dimension mismatch");
    for (double d : demands)
      if (!(d > 0.0)) throw SchemaError("instance: demands must be strictly positive");

    to_original_.resize(n_);
    std::iota(to_original_.begin(), to_original_.end(), 0);
    std::stable_sort(to_original_.begin(), to_original_.end(),
                     [&](int a, int b) { return demands[a] < demands[b]; });
    demands_.resize(n_);
    for (int k = 0; k < n_; ++k) demands_[k] = demands[to_original_[k]];
    oracle_.emplace(oracle.permuted(to_original_));
  }

  int n() const { return n_; }
  const std::vector<double>& demands() const { return demands_; }
  double demand(int k) const { return demands_[k]; }
  const RateOracle& oracle() const { return *oracle_; }
  mask_t all_links() const { return full_mask(n_); }

  int original_id(int k) const { return to_original_[k]; }

  mask_t mask_to_original(mask_t internal) const {
    mask_t out = 0;
    for_each_bit(internal, [&](int k) { out |= bit(to_original_[k]); });
    return out;
  }

  mask_t mask_from_original(mask_t original) const {
    mask_t out = 0;
    for (int k = 0; k < n_; ++k)
      if (contains(original, to_original_[k])) out |= bit(k);
    return out;
  }

  /// Demands in the caller's original link order.
  std::vector<double> original_demands() const {
    std::vector<double> out(n_);
    for (int k = 0; k < n_; ++k) out[to_original_[k]] = demands_[k];
    return out;
  }

 private:
  int n_;
  std::vector<double> demands_;     // ascending
  std::vector<int> to_original_;    // internal k -> original id
  std::optional<RateOracle> oracle_;  // internal index order
};

// ---------------------------------------------------------------------------
// JSON serialization. Files carry the original link order.

inline nlohmann::json to_json(const Instance& inst) {
  nlohmann::json j;
  j["n"] = inst.n();
  j["demands"] = inst.original_demands();
  nlohmann::json o;
  const RateOracle& oracle = inst.oracle();
  o["variant"] = to_string(oracle.variant());
  if (oracle.variant() == RateVariant::cardinality) {
    o["r"] = oracle.cardinality_rates();
  } else {
    if (oracle.variant() == RateVariant::binary) o["gamma_star"] = oracle.gamma_star();
    if (oracle.variant() == RateVariant::bpsk) {
      o["z"] = oracle.bpsk_z();
      o["B"] = oracle.bpsk_max_rate();
    }
    // Undo the internal ascending-demand relabeling.
    const ChannelMatrix& ch = oracle.channel();
    const int n = inst.n();
    std::vector<std::vector<double>> g(n, std::vector<double>(n));
    std::vector<double> p(n);
    for (int a = 0; a < n; ++a) {
      p[inst.original_id(a)] = ch.power[a];
      for (int b = 0; b < n; ++b) g[inst.original_id(a)][inst.original_id(b)] = ch.gain[a][b];
    }
    o["channel"] = {{"G", g}, {"P", p}, {"sigma2", ch.sigma2}};
  }
  j["oracle"] = std::move(o);
  return j;
}

inline Instance instance_from_json(const nlohmann::json& j) {
  try {
    const int n = j.at("n").get<int>();
    auto demands = j.at("demands").get<std::vector<double>>();
    if (static_cast<int>(demands.size()) != n)
      throw SchemaError("instance: demand vector length != n");
    const auto& o = j.at("oracle");
    const RateVariant variant = rate_variant_from_string(o.at("variant").get<std::string>());
    if (variant == RateVariant::cardinality) {
      auto r = o.at("r").get<std::vector<double>>();
      if (static_cast<int>(r.size()) != n) throw SchemaError("instance: rate vector length != n");
      return Instance(std::move(demands), RateOracle::cardinality(std::move(r)));
    }
    const auto& cj = o.at("channel");
    ChannelMatrix ch;
    ch.n = n;
    ch.gain = cj.at("G").get<std::vector<std::vector<double>>>();
    ch.power = cj.at("P").get<std::vector<double>>();
    ch.sigma2 = cj.at("sigma2").get<double>();
    switch (variant) {
      case RateVariant::binary:
        return Instance(std::move(demands),
                        RateOracle::binary(std::move(ch), o.at("gamma_star").get<double>()));
      case RateVariant::bpsk:
        return Instance(std::move(demands),
                        RateOracle::bpsk(std::move(ch), o.at("z").get<double>(),
                                         o.at("B").get<double>()));
      default:
        return Instance(std::move(demands), RateOracle::shannon(std::move(ch)));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("instance: malformed JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("instance: ") + e.what());
  }
}

inline void save_instance(const Instance& inst, std::ostream& out) {
  out << to_json(inst).dump(2) << '\n';
}

inline void save_instance(const Instance& inst, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw SchemaError("cannot open for writing: " + path);
  save_instance(inst, f);
}

inline Instance load_instance(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("instance: parse error: ") + e.what());
  }
  return instance_from_json(j);
}

inline Instance load_instance(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw SchemaError("cannot open: " + path);
  return load_instance(f);
}

// ---------------------------------------------------------------------------
// Random instance generation.

enum class DemandMode { uniform, random };

/// Parameters of the random topology generator: transmitters uniform in a
/// square area, each receiver at a uniform angle and uniform distance from
/// its transmitter, gains = distance^(-path_loss_exponent).
///
/// Default power/noise (1 W, 4e-11 W) put the median single-link SNR near
/// 20 dB for the default geometry; the worst case (250 m) is 6.4, so the
/// default binary threshold 4.0 keeps every singleton feasible.
struct GeneratorParams {
  int n = 15;
  double area_side = 1000.0;
  double min_dist = 3.0;
  double max_dist = 250.0;
  double path_loss_exponent = 4.0;

  DemandMode demand_mode = DemandMode::uniform;
  double demand_value = 1000.0;  // uniform mode
  double demand_lo = 100.0;      // random mode
  double demand_hi = 1500.0;

  RateVariant variant = RateVariant::shannon;
  double power = 1.0;
  double sigma2 = 4e-11;
  double gamma_star = 4.0;   // binary
  double bpsk_z = 1e-6;      // bpsk
  double bpsk_max_rate = 1.0;
  double card_rate_lo = 0.5;  // cardinality: sorted uniform draws
  double card_rate_hi = 6.0;

  std::uint64_t seed = 1;

  void validate() const {
    if (n < 1 || n > kMaxLinks) throw std::invalid_argument("generator: bad n");
    if (!(0.0 < min_dist && min_dist < max_dist && max_dist < area_side))
      throw std::invalid_argument("generator: need 0 < min_dist < max_dist < area_side");
    if (!(path_loss_exponent > 0.0)) throw std::invalid_argument("generator: bad exponent");
    if (demand_mode == DemandMode::uniform && !(demand_value > 0.0))
      throw std::invalid_argument("generator: bad demand value");
    if (demand_mode == DemandMode::random && !(0.0 < demand_lo && demand_lo < demand_hi))
      throw std::invalid_argument("generator: bad demand range");
    if (!(card_rate_lo > 0.0 && card_rate_lo < card_rate_hi))
      throw std::invalid_argument("generator: bad cardinality rate range");
  }
};

inline Instance generate(const GeneratorParams& params) {
  params.validate();
  Rng rng(params.seed);
  const int n = params.n;

  std::vector<double> demands;
  auto draw_demands = [&] {
    demands.resize(n);
    for (int i = 0; i < n; ++i)
      demands[i] = params.demand_mode == DemandMode::uniform
                       ? params.demand_value
                       : rng.uniform(params.demand_lo, params.demand_hi);
  };

  if (params.variant == RateVariant::cardinality) {
    std::vector<double> r(n);
    for (int i = 0; i < n; ++i) r[i] = rng.uniform(params.card_rate_lo, params.card_rate_hi);
    std::sort(r.begin(), r.end(), std::greater<>());
    draw_demands();
    return Instance(std::move(demands), RateOracle::cardinality(std::move(r)));
  }

  struct Point {
    double x, y;
  };
  std::vector<Point> tx(n), rx(n);
  for (int i = 0; i < n; ++i) {
    tx[i].x = rng.uniform(0.0, params.area_side);
    tx[i].y = rng.uniform(0.0, params.area_side);
  }
  constexpr int kRetryCap = 10000;
  for (int i = 0; i < n; ++i) {
    int tries = 0;
    for (;;) {
      if (++tries > kRetryCap)
        throw std::runtime_error("generator: receiver placement retry cap exceeded");
      const double angle = rng.uniform(0.0, 2.0 * M_PI);
      const double radius = rng.uniform(params.min_dist, params.max_dist);
      const double x = tx[i].x + radius * std::cos(angle);
      const double y = tx[i].y + radius * std::sin(angle);
      if (x >= 0.0 && x <= params.area_side && y >= 0.0 && y <= params.area_side) {
        rx[i] = {x, y};
        break;
      }
    }
  }

  ChannelMatrix ch;
  ch.n = n;
  ch.sigma2 = params.sigma2;
  ch.power.assign(n, params.power);
  ch.gain.assign(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      // Cross pairs can land arbitrarily close; clamp below 1 m to keep
      // gains finite.
      const double d = std::max(1.0, std::hypot(tx[i].x - rx[j].x, tx[i].y - rx[j].y));
      ch.gain[i][j] = std::pow(d, -params.path_loss_exponent);
    }

  draw_demands();
  switch (params.variant) {
    case RateVariant::binary:
      return Instance(std::move(demands), RateOracle::binary(std::move(ch), params.gamma_star));
    case RateVariant::bpsk:
      return Instance(std::move(demands),
                      RateOracle::bpsk(std::move(ch), params.bpsk_z, params.bpsk_max_rate));
    default:
      return Instance(std::move(demands), RateOracle::shannon(std::move(ch)));
  }
}

}  // namespace linkdrain
