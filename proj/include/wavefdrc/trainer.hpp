#pragma once
/**
 * @file trainer.hpp
 * @brief Label-free training loop: pool -> network -> FDRC loss -> Adam -> pool.
 *
 * Every batch samples k pool entries, predicts one step for each, averages
 * their FDRC losses, back-propagates, applies one Adam update and writes the
 * predictions back into the pool. A session (checkpoint + pool dump + JSON
 * sidecar) is written after every epoch and can be resumed bit-exactly.
 */

#include "wavefdrc/checkpoint.hpp"
#include "wavefdrc/fdrc_loss.hpp"
#include "wavefdrc/pool.hpp"

#include <filesystem>
#include <functional>
#include <optional>

namespace wavefdrc {

struct TrainConfig {
    DomainSpec domain;
    SourceSampling sampling;
    int pool_size = 1000;
    int batch_size = 50;
    int samples_per_epoch = 10000;
    int epochs = 200;
    double reset_prob = 0.005;
    std::uint64_t seed = 0;
    Precision precision = Precision::single;
    // Reproducible runs write wall_time_s = 0 so metrics files are byte-identical.
    bool reproducible = false;
    std::filesystem::path checkpoint_path;  // empty: no session files
    std::filesystem::path metrics_path;     // empty: no metrics CSV

    void validate() const;
    int batches_per_epoch() const { return samples_per_epoch / batch_size; }
};

struct MetricsRecord {
    int epoch = 0;
    int batch = 0;
    double L_u = 0.0;
    double L_v = 0.0;
    double L_p = 0.0;
    double total = 0.0;
    double lr = 0.0;
    double wall_time = 0.0;
};

inline constexpr const char* kMetricsHeader = "epoch,batch,L_u,L_v,L_p,total,lr,wall_time_s";

/// Raised when a batch entry produces a non-finite loss.
class DivergenceError : public Error {
  public:
    DivergenceError(const std::string& what, std::size_t pool_index, WaveState state,
                    std::vector<SourceSpec> sources)
        : Error(what), pool_index_(pool_index), state_(std::move(state)), sources_(std::move(sources)) {}
    std::size_t pool_index() const { return pool_index_; }
    const WaveState& state() const { return state_; }
    const std::vector<SourceSpec>& sources() const { return sources_; }

  private:
    std::size_t pool_index_;
    WaveState state_;
    std::vector<SourceSpec> sources_;
};

/// One optimizer update on a batch of `batch_size` pool entries. The
/// returned record carries the batch-mean losses and lr; epoch, batch and
/// wall_time are left for the caller.
template <typename Scalar>
MetricsRecord train_step(TrainingPool& pool, ModelParams<Scalar>& params, AdamState<Scalar>& adam,
                         double lr, std::size_t batch_size);

template <typename Scalar>
struct TrainingSession {
    ModelParams<Scalar> params;
    AdamState<Scalar> adam;
    TrainingPool pool;
    int completed_epochs = 0;
    double elapsed_seconds = 0.0;
};

template <typename Scalar>
TrainingSession<Scalar> new_session(const TrainConfig& config);

template <typename Scalar>
void save_session(const TrainingSession<Scalar>& session, const std::filesystem::path& checkpoint_path);

template <typename Scalar>
TrainingSession<Scalar> load_session(const TrainConfig& config, const std::filesystem::path& checkpoint_path);

using MetricsCallback = std::function<void(const MetricsRecord&)>;

/// Trains until config.epochs epochs are complete. With `resume`, continues
/// the saved session from its next epoch (lr_schedule(e + 1)).
template <typename Scalar>
ModelParams<Scalar> train(const TrainConfig& config,
                          const std::optional<std::filesystem::path>& resume = std::nullopt,
                          const MetricsCallback& on_batch = {});

void write_metrics_row(std::ostream& os, const MetricsRecord& r);

}  // namespace wavefdrc
