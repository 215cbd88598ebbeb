#include "seqinvest/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "seqinvest/errors.hpp"

namespace seqinvest {

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += kGamma);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void RunningStat::add(double v) {
  ++n_;
  const double delta = v - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (v - mean_);
}

void RunningStat::merge(const RunningStat& o) {
  if (o.n_ == 0) return;
  if (n_ == 0) {
    *this = o;
    return;
  }
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(o.n_);
  const double n = na + nb;
  const double delta = o.mean_ - mean_;
  mean_ += delta * nb / n;
  m2_ += o.m2_ + delta * delta * na * nb / n;
  n_ += o.n_;
}

double RunningStat::variance() const {
  return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
}

double RunningStat::std_error() const {
  return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

namespace {

// p(x_j) for the prefix and the tail, computed once per run.
struct SuccessTable {
  std::vector<double> prefix;
  double tail = 0.0;
  double at(std::size_t j) const {
    return j < prefix.size() ? prefix[j] : tail;
  }
};

SuccessTable tabulate(const SuccessRate& sr, const ConstantTailProfile& x) {
  SuccessTable t;
  for (double v : x.prefix()) t.prefix.push_back(sr.p(v));
  t.tail = sr.p(x.tail());
  return t;
}

Episode episode_from(const SuccessTable& pt, const ConstantTailProfile& x,
                     const RewardRule& rule, SplitMix64& rng,
                     std::size_t max_chain_length, bool want_payoffs) {
  Episode ep;
  std::size_t k = 0;
  while (rng.uniform() < pt.at(k)) {
    if (++k > max_chain_length) {
      ep.discarded = true;
      ep.terminal = k;
      return ep;
    }
  }
  ep.terminal = k;
  for (std::size_t i = 0; i <= k; ++i) ep.investment += x.at(i);
  if (want_payoffs) {
    ep.payoffs.resize(k + 1);
    for (std::size_t i = 0; i <= k; ++i) {
      ep.payoffs[i] = rule.eval(i, k) - x.at(i);
    }
  }
  return ep;
}

struct ShardResult {
  RunningStat terminal, investment, welfare;
  std::vector<RunningStat> payoffs;
  std::vector<std::uint64_t> histogram;
  std::uint64_t discarded = 0;
};

void run_shard(const SuccessTable& pt, const ConstantTailProfile& x,
               const RewardRule& rule, const SimulationConfig& cfg,
               std::uint64_t shard, std::uint64_t episodes, ShardResult& out) {
  SplitMix64 rng = SplitMix64::ForShard(cfg.seed, shard);
  out.payoffs.assign(cfg.report_agents, RunningStat{});
  for (std::uint64_t e = 0; e < episodes; ++e) {
    Episode ep =
        episode_from(pt, x, rule, rng, cfg.max_chain_length, false);
    if (ep.discarded) {
      ++out.discarded;
      continue;
    }
    const std::size_t k = ep.terminal;
    out.terminal.add(static_cast<double>(k));
    out.investment.add(ep.investment);
    out.welfare.add(static_cast<double>(k + 1) - ep.investment);
    const std::size_t top = std::min(k + 1, cfg.report_agents);
    for (std::size_t i = 0; i < top; ++i) {
      out.payoffs[i].add(rule.eval(i, k) - x.at(i));
    }
    if (out.histogram.size() <= k) out.histogram.resize(k + 1, 0);
    ++out.histogram[k];
  }
}

Estimate to_estimate(const RunningStat& s) {
  return {s.mean(), s.std_error(), s.count()};
}

}  // namespace

Episode run_episode(const SuccessRate& sr, const ConstantTailProfile& x,
                    const RewardRule& rule, SplitMix64& rng,
                    std::size_t max_chain_length) {
  return episode_from(tabulate(sr, x), x, rule, rng, max_chain_length, true);
}

SimulationSummary summarize(const SuccessRate& sr,
                            const ConstantTailProfile& x,
                            const RewardRule& rule,
                            const SimulationConfig& cfg) {
  if (cfg.episodes < 1) throw DomainError("simulate: episodes must be >= 1");
  if (cfg.shards < 1) throw DomainError("simulate: shards must be >= 1");
  if (cfg.max_chain_length < 1) {
    throw DomainError("simulate: max_chain_length must be >= 1");
  }
  const SuccessTable pt = tabulate(sr, x);
  const unsigned shards = cfg.shards;
  std::vector<ShardResult> results(shards);

  unsigned threads = cfg.threads;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, shards);

  auto count_for = [&](unsigned s) {
    return cfg.episodes / shards + (s < cfg.episodes % shards ? 1 : 0);
  };
  auto worker = [&](unsigned first) {
    for (unsigned s = first; s < shards; s += threads) {
      run_shard(pt, x, rule, cfg, s, count_for(s), results[s]);
    }
  };
  if (threads <= 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }

  // Merge in shard order so the result is independent of scheduling.
  ShardResult total;
  total.payoffs.assign(cfg.report_agents, RunningStat{});
  for (const ShardResult& r : results) {
    total.terminal.merge(r.terminal);
    total.investment.merge(r.investment);
    total.welfare.merge(r.welfare);
    for (std::size_t i = 0; i < cfg.report_agents; ++i) {
      total.payoffs[i].merge(r.payoffs[i]);
    }
    if (total.histogram.size() < r.histogram.size()) {
      total.histogram.resize(r.histogram.size(), 0);
    }
    for (std::size_t k = 0; k < r.histogram.size(); ++k) {
      total.histogram[k] += r.histogram[k];
    }
    total.discarded += r.discarded;
  }

  SimulationSummary out;
  out.episodes = total.terminal.count();
  out.discarded = total.discarded;
  out.terminal_index = to_estimate(total.terminal);
  out.total_value = out.terminal_index;
  out.total_value.mean += 1.0;
  out.investment = to_estimate(total.investment);
  out.welfare = to_estimate(total.welfare);
  for (const auto& s : total.payoffs) out.payoffs.push_back(to_estimate(s));
  out.histogram = std::move(total.histogram);
  return out;
}

}  // namespace seqinvest
