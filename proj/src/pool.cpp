#include "wavefdrc/pool.hpp"

#include <numeric>

namespace wavefdrc {

TrainingPool::TrainingPool(int n, const DomainSpec& spec, double reset_prob, Rng rng,
                           const SourceSampling& sampling)
    : spec_(spec), sampling_(sampling), reset_prob_(reset_prob), rng_(std::move(rng)) {
    if (n < 1) throw Error("init_pool: pool size must be >= 1");
    if (!(reset_prob >= 0.0 && reset_prob <= 1.0)) throw Error("init_pool: reset_prob must lie in [0, 1]");
    spec_.validate();
    sampling_.validate();
    sigma_ = std::make_shared<const SigmaField>(build_sigma(spec_));
    entries_.resize(static_cast<std::size_t>(n));
    for (auto& e : entries_) reset_entry(e);
}

void TrainingPool::reset_entry(PoolEntry& e) {
    Domain d = new_domain(spec_, rng_, sampling_);
    e.state = std::move(d.state);
    e.sources = std::move(d.sources);
    e.sigma = sigma_;
    e.age = 0;
}

std::vector<std::size_t> TrainingPool::sample_batch(std::size_t k) {
    if (k < 1 || k > entries_.size())
        throw Error("sample_batch: batch size " + std::to_string(k) + " outside [1, " +
                    std::to_string(entries_.size()) + "]");
    std::vector<std::size_t> idx(entries_.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    // partial Fisher-Yates
    for (std::size_t a = 0; a < k; ++a) {
        std::uniform_int_distribution<std::size_t> pick(a, idx.size() - 1);
        std::swap(idx[a], idx[pick(rng_)]);
    }
    idx.resize(k);
    return idx;
}

std::size_t TrainingPool::write_back(std::span<const std::size_t> indices, std::vector<WaveState> new_states) {
    if (indices.size() != new_states.size()) throw Error("write_back: index/state count mismatch");
    for (std::size_t a = 0; a < indices.size(); ++a) {
        if (indices[a] >= entries_.size())
            throw Error("write_back: index " + std::to_string(indices[a]) + " out of range");
        const auto& st = new_states[a];
        if (!st.consistent() || st.p.nx() != spec_.nx || st.p.ny() != spec_.ny)
            throw Error("write_back: state shape does not match the pool domain");
        for (std::size_t b = 0; b < a; ++b)
            if (indices[b] == indices[a]) throw Error("write_back: duplicate index " + std::to_string(indices[a]));
    }

    std::size_t resets = 0;
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (std::size_t a = 0; a < indices.size(); ++a) {
        auto& e = entries_[indices[a]];
        e.state = std::move(new_states[a]);
        if (coin(rng_) < reset_prob_) {
            reset_entry(e);
            ++resets;
        } else {
            ++e.age;
        }
    }
    return resets;
}

void TrainingPool::restore(std::vector<PoolEntry> entries, Rng rng) {
    if (entries.size() != entries_.size()) throw Error("pool restore: entry count mismatch");
    for (auto& e : entries) {
        if (!e.state.consistent() || e.state.p.nx() != spec_.nx || e.state.p.ny() != spec_.ny)
            throw Error("pool restore: entry shape does not match the domain");
        validate_sources(e.sources, spec_);
        e.sigma = sigma_;
    }
    entries_ = std::move(entries);
    rng_ = std::move(rng);
}

TrainingPool init_pool(int n, const DomainSpec& spec, double reset_prob, Rng rng,
                       const SourceSampling& sampling) {
    return TrainingPool(n, spec, reset_prob, std::move(rng), sampling);
}

}  // namespace wavefdrc
