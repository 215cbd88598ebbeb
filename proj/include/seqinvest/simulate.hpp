#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "seqinvest/profile.hpp"
#include "seqinvest/reward_rule.hpp"
#include "seqinvest/success_rate.hpp"

namespace seqinvest {

// SplitMix64. The state after n draws is seed + n * kGamma, so jumping to
// any position is O(1); shard s starts at position s * 2^40.
class SplitMix64 {
 public:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  static constexpr std::uint64_t kShardStride = std::uint64_t{1} << 40;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  static SplitMix64 ForShard(std::uint64_t seed, std::uint64_t shard) {
    return SplitMix64(seed + shard * kShardStride * kGamma);
  }

  std::uint64_t next();
  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

// Welford accumulator; merge() is Chan's parallel update.
class RunningStat {
 public:
  void add(double v);
  void merge(const RunningStat& other);
  std::uint64_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const;  // sample variance
  double std_error() const;

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct Episode {
  std::size_t terminal = 0;  // index of the first failing agent
  double investment = 0.0;   // sum of x_i over realized agents
  std::vector<double> payoffs;  // f(i,k) - x_i for i = 0..k
  bool discarded = false;       // chain exceeded max_chain_length
};

Episode run_episode(const SuccessRate& sr, const ConstantTailProfile& x,
                    const RewardRule& rule, SplitMix64& rng,
                    std::size_t max_chain_length = 10000);

struct SimulationConfig {
  std::uint64_t episodes = 1000000;
  std::uint64_t seed = 0;
  std::size_t max_chain_length = 10000;
  std::size_t report_agents = 3;  // U_i reported for i < report_agents
  unsigned shards = 16;           // fixes the stream layout
  unsigned threads = 0;           // 0: hardware concurrency
};

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t count = 0;
};

struct SimulationSummary {
  std::uint64_t episodes = 0;   // kept
  std::uint64_t discarded = 0;
  Estimate terminal_index;
  Estimate total_value;
  Estimate investment;
  Estimate welfare;
  std::vector<Estimate> payoffs;  // conditional on reaching agent i
  std::vector<std::uint64_t> histogram;  // episodes ending at each k
};

// Runs config.episodes episodes split over config.shards independent
// streams. The result depends only on (seed, shards), not on threads.
SimulationSummary summarize(const SuccessRate& sr,
                            const ConstantTailProfile& x,
                            const RewardRule& rule,
                            const SimulationConfig& config);

}  // namespace seqinvest
