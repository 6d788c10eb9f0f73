#pragma once
/**
 * @file pool.hpp
 * @brief Memory-resident pool of evolving computational domains.
 *
 * Entries start as empty (all-zero) domains with random sources. Training
 * samples a batch, predicts one step for each sampled entry and writes the
 * prediction back, so the pool's wavefields develop alongside the model. Each
 * written-back entry is independently re-drawn with probability reset_prob.
 */

#include "wavefdrc/grid.hpp"

#include <memory>
#include <span>
#include <vector>

namespace wavefdrc {

struct PoolEntry {
    WaveState state;
    std::vector<SourceSpec> sources;
    std::shared_ptr<const SigmaField> sigma;
    std::int64_t age = 0;  // write-backs since the last reset
};

class TrainingPool {
  public:
    TrainingPool(int n, const DomainSpec& spec, double reset_prob, Rng rng,
                 const SourceSampling& sampling = {});

    std::size_t size() const { return entries_.size(); }
    const PoolEntry& entry(std::size_t index) const { return entries_.at(index); }
    const DomainSpec& spec() const { return spec_; }
    const SourceSampling& sampling() const { return sampling_; }
    double reset_prob() const { return reset_prob_; }
    const Rng& rng() const { return rng_; }

    /// k distinct indices drawn uniformly without replacement.
    std::vector<std::size_t> sample_batch(std::size_t k);

    /// Replaces each indexed entry's state with its prediction, then resets
    /// it with probability reset_prob. Returns the number of resets.
    std::size_t write_back(std::span<const std::size_t> indices, std::vector<WaveState> new_states);

    /// Restores the complete pool (used when resuming training).
    void restore(std::vector<PoolEntry> entries, Rng rng);

  private:
    void reset_entry(PoolEntry& e);

    DomainSpec spec_;
    SourceSampling sampling_;
    double reset_prob_;
    Rng rng_;
    std::shared_ptr<const SigmaField> sigma_;
    std::vector<PoolEntry> entries_;
};

TrainingPool init_pool(int n, const DomainSpec& spec, double reset_prob, Rng rng,
                       const SourceSampling& sampling = {});

}  // namespace wavefdrc
