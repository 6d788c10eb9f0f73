#include "wavefdrc/trainer.hpp"

#include "binary_io.hpp"
#include "wavefdrc/config.hpp"
#include "wavefdrc/fdm.hpp"
#include "wavefdrc/parallel.hpp"
#include "wavefdrc/snapshot.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

namespace wavefdrc {

void TrainConfig::validate() const {
    domain.validate();
    sampling.validate();
    auto fail = [](const std::string& msg) { throw Error("invalid training config: " + msg); };
    if (pool_size < 1) fail("pool_size must be >= 1");
    if (batch_size < 1 || batch_size > pool_size) fail("batch_size must lie in [1, pool_size]");
    if (samples_per_epoch < batch_size || samples_per_epoch % batch_size != 0)
        fail("samples_per_epoch must be a positive multiple of batch_size");
    if (epochs < 1) fail("epochs must be >= 1");
    if (!(reset_prob >= 0.0 && reset_prob <= 1.0)) fail("reset_prob must lie in [0, 1]");
}

namespace {

struct EntryResult {
    WaveState pred;
    FdrcLoss loss;
};

template <typename Scalar>
void accumulate(ModelParams<Scalar>& into, const ModelParams<Scalar>& g) {
    for (int l = 0; l < kLayerCount; ++l) {
        auto& a = into.layers[l];
        const auto& b = g.layers[l];
        for (std::size_t k = 0; k < a.weights.size(); ++k) a.weights[k] += b.weights[k];
        for (std::size_t k = 0; k < a.biases.size(); ++k) a.biases[k] += b.biases[k];
    }
}

}  // namespace

template <typename Scalar>
MetricsRecord train_step(TrainingPool& pool, ModelParams<Scalar>& params, AdamState<Scalar>& adam, double lr,
                         std::size_t batch_size) {
    const DomainSpec& spec = pool.spec();
    const auto indices = pool.sample_batch(batch_size);
    const double inv_k = 1.0 / static_cast<double>(batch_size);

    std::vector<EntryResult> results(batch_size);
    std::vector<ModelParams<Scalar>> grads(batch_size);

    parallel_for(batch_size, [&](std::size_t a) {
        const PoolEntry& e = pool.entry(indices[a]);
        const FieldGrid mask = non_source_mask(spec, e.sources);
        const auto fr = forward(params, make_input<Scalar>(e.state, *e.sigma, spec));
        results[a].pred = apply_delta(e.state, fr.delta, spec, e.sources);
        results[a].loss = fdrc_loss(residuals(e.state, results[a].pred, *e.sigma, spec, mask));
        if (!std::isfinite(results[a].loss.total)) return;

        // Source cells of p are overwritten after the delta is added; their
        // loss gradient is already zero because they are masked.
        const FieldGradient g = loss_grad_wrt_pred(e.state, results[a].pred, *e.sigma, spec, mask);
        FieldStack<Scalar> grad_delta(kOutputChannels, spec.nx, spec.ny);
        for (int i = 0; i < spec.nx; ++i) {
            for (int j = 0; j < spec.ny; ++j) {
                grad_delta(0, i, j) = static_cast<Scalar>(g.u(i, j) * inv_k);
                grad_delta(1, i, j) = static_cast<Scalar>(g.v(i, j) * inv_k);
                grad_delta(2, i, j) = static_cast<Scalar>(g.p(i, j) * inv_k);
            }
        }
        grads[a] = backward(params, fr.cache, grad_delta);
    });

    MetricsRecord rec;
    rec.lr = lr;
    for (std::size_t a = 0; a < batch_size; ++a) {
        const auto& L = results[a].loss;
        if (!std::isfinite(L.total)) {
            const auto& e = pool.entry(indices[a]);
            std::ostringstream os;
            os << "non-finite FDRC loss for pool entry " << indices[a] << " at step " << e.state.step
               << " (" << e.sources.size() << " sources, max|p| = " << e.state.p.max_abs() << ")";
            throw DivergenceError(os.str(), indices[a], e.state, e.sources);
        }
        rec.L_u += L.L_u * inv_k;
        rec.L_v += L.L_v * inv_k;
        rec.L_p += L.L_p * inv_k;
    }
    rec.total = rec.L_u + rec.L_v + rec.L_p;

    // Fixed reduction order keeps updates independent of the thread count.
    ModelParams<Scalar> total = std::move(grads[0]);
    for (std::size_t a = 1; a < batch_size; ++a) accumulate(total, grads[a]);
    adam_step(params, total, adam, lr);

    std::vector<WaveState> next;
    next.reserve(batch_size);
    for (auto& r : results) next.push_back(std::move(r.pred));
    pool.write_back(indices, std::move(next));
    return rec;
}

namespace {

constexpr std::uint64_t kPoolSeedSalt = 0x9e3779b97f4a7c15ull;

std::filesystem::path with_suffix(const std::filesystem::path& p, const char* suffix) {
    auto out = p;
    out += suffix;
    return out;
}

std::string rng_to_string(const Rng& rng) {
    std::ostringstream os;
    os << rng;
    return os.str();
}

Rng rng_from_string(const std::string& text) {
    Rng rng;
    std::istringstream is(text);
    is >> rng;
    if (!is) throw Error("session: corrupt rng state");
    return rng;
}

}  // namespace

template <typename Scalar>
TrainingSession<Scalar> new_session(const TrainConfig& config) {
    config.validate();
    Rng init_rng(config.seed);
    auto params = init_params<Scalar>(init_rng);
    TrainingPool pool(config.pool_size, config.domain, config.reset_prob, Rng(config.seed ^ kPoolSeedSalt),
                      config.sampling);
    return TrainingSession<Scalar>{std::move(params), AdamState<Scalar>::fresh(), std::move(pool), 0, 0.0};
}

template <typename Scalar>
void save_session(const TrainingSession<Scalar>& s, const std::filesystem::path& checkpoint_path) {
    save_params(s.params, checkpoint_path, &s.adam);

    const auto precision =
        std::is_same_v<Scalar, float> ? SnapshotPrecision::single : SnapshotPrecision::double_;
    detail::atomic_write(with_suffix(checkpoint_path, ".pool"), [&](std::ostream& os) {
        for (std::size_t k = 0; k < s.pool.size(); ++k)
            write_snapshot(os, to_snapshot(s.pool.entry(k).state), precision);
    });

    nlohmann::json entries = nlohmann::json::array();
    for (std::size_t k = 0; k < s.pool.size(); ++k) {
        const auto& e = s.pool.entry(k);
        nlohmann::json src = nlohmann::json::array();
        for (const auto& x : e.sources) src.push_back(to_json(x));
        entries.push_back({{"age", e.age}, {"sources", src}});
    }
    const nlohmann::json state = {{"format", "wavefdrc-session"},
                                  {"version", 1},
                                  {"completed_epochs", s.completed_epochs},
                                  {"elapsed_seconds", s.elapsed_seconds},
                                  {"domain", to_json(s.pool.spec())},
                                  {"sampling", to_json(s.pool.sampling())},
                                  {"reset_prob", s.pool.reset_prob()},
                                  {"rng", rng_to_string(s.pool.rng())},
                                  {"entries", entries}};
    detail::atomic_write(with_suffix(checkpoint_path, ".state.json"),
                         [&](std::ostream& os) { os << state.dump(1) << '\n'; });
}

template <typename Scalar>
TrainingSession<Scalar> load_session(const TrainConfig& config, const std::filesystem::path& checkpoint_path) {
    config.validate();
    auto ck = load_checkpoint<Scalar>(checkpoint_path);
    if (!ck.adam) throw Error(checkpoint_path.string() + ": checkpoint has no optimizer state to resume from");

    const auto state_path = with_suffix(checkpoint_path, ".state.json");
    std::ifstream js(state_path);
    if (!js) throw Error("cannot open " + state_path.string());
    nlohmann::json state;
    try {
        state = nlohmann::json::parse(js);
    } catch (const nlohmann::json::exception& e) {
        throw Error(state_path.string() + ": " + e.what());
    }
    try {
        if (state.at("format") != "wavefdrc-session" || state.at("version") != 1)
            throw Error("not a session file");
        if (domain_from_json(state.at("domain")) != config.domain)
            throw Error("domain differs from the training config");
        if (sampling_from_json(state.at("sampling")) != config.sampling)
            throw Error("source sampling differs from the training config");
        if (state.at("reset_prob").get<double>() != config.reset_prob)
            throw Error("reset_prob differs from the training config");
        const auto& entries = state.at("entries");
        if (entries.size() != static_cast<std::size_t>(config.pool_size))
            throw Error("pool size differs from the training config");

        auto is = detail::open_for_reading(with_suffix(checkpoint_path, ".pool"));
        std::vector<PoolEntry> restored(entries.size());
        for (std::size_t k = 0; k < entries.size(); ++k) {
            restored[k].state = state_from_snapshot(read_snapshot(is));
            restored[k].sources = sources_from_json(entries[k].at("sources"));
            restored[k].age = entries[k].at("age").get<std::int64_t>();
        }

        TrainingPool pool(config.pool_size, config.domain, config.reset_prob, Rng(0), config.sampling);
        pool.restore(std::move(restored), rng_from_string(state.at("rng").get<std::string>()));
        return TrainingSession<Scalar>{std::move(ck.params), std::move(*ck.adam), std::move(pool),
                                       state.at("completed_epochs").get<int>(),
                                       state.at("elapsed_seconds").get<double>()};
    } catch (const nlohmann::json::exception& e) {
        throw Error(state_path.string() + ": " + e.what());
    } catch (const Error& e) {
        throw Error(state_path.string() + ": " + e.what());
    }
}

void write_metrics_row(std::ostream& os, const MetricsRecord& r) {
    char line[512];
    std::snprintf(line, sizeof(line), "%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.6f\n", r.epoch, r.batch, r.L_u,
                  r.L_v, r.L_p, r.total, r.lr, r.wall_time);
    os << line;
}

template <typename Scalar>
ModelParams<Scalar> train(const TrainConfig& config, const std::optional<std::filesystem::path>& resume,
                          const MetricsCallback& on_batch) {
    config.validate();
    if (!check_cfl(config.domain)) {
        std::ostringstream os;
        os << "train: CFL number " << cfl_number(config.domain) << " exceeds 1";
        throw Error(os.str());
    }

    auto session = resume ? load_session<Scalar>(config, *resume) : new_session<Scalar>(config);

    std::ofstream metrics;
    if (!config.metrics_path.empty()) {
        if (config.metrics_path.has_parent_path())
            std::filesystem::create_directories(config.metrics_path.parent_path());
        const bool append = resume.has_value() && std::filesystem::exists(config.metrics_path) &&
                            std::filesystem::file_size(config.metrics_path) > 0;
        metrics.open(config.metrics_path, append ? std::ios::app : std::ios::trunc);
        if (!metrics) throw Error("cannot open metrics file " + config.metrics_path.string());
        if (!append) metrics << kMetricsHeader << '\n';
    }

    const auto start = std::chrono::steady_clock::now();
    const double base_elapsed = session.elapsed_seconds;
    auto elapsed = [&] {
        return base_elapsed + std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };

    for (int epoch = session.completed_epochs + 1; epoch <= config.epochs; ++epoch) {
        const double lr = lr_schedule(epoch);
        for (int b = 1; b <= config.batches_per_epoch(); ++b) {
            MetricsRecord rec;
            try {
                rec = train_step(session.pool, session.params, session.adam, lr,
                                 static_cast<std::size_t>(config.batch_size));
            } catch (const DivergenceError& e) {
                if (!config.checkpoint_path.empty()) {
                    const auto dump = with_suffix(config.checkpoint_path, ".diverged.wfld");
                    save_snapshot(dump, to_snapshot(e.state(), e.pool_index() < session.pool.size()
                                                                  ? session.pool.entry(e.pool_index()).sigma.get()
                                                                  : nullptr));
                    throw Error(std::string(e.what()) + "; entry dumped to " + dump.string());
                }
                throw;
            }
            rec.epoch = epoch;
            rec.batch = b;
            rec.wall_time = config.reproducible ? 0.0 : elapsed();
            if (metrics.is_open()) {
                write_metrics_row(metrics, rec);
                if (!metrics) throw Error("write failed: " + config.metrics_path.string());
            }
            if (on_batch) on_batch(rec);
        }
        if (metrics.is_open()) metrics.flush();
        session.completed_epochs = epoch;
        session.elapsed_seconds = elapsed();
        if (!config.checkpoint_path.empty()) save_session(session, config.checkpoint_path);
    }
    return session.params;
}

#define WAVEFDRC_INSTANTIATE_TRAINER(S)                                                                   \
    template MetricsRecord train_step<S>(TrainingPool&, ModelParams<S>&, AdamState<S>&, double,            \
                                         std::size_t);                                                     \
    template TrainingSession<S> new_session<S>(const TrainConfig&);                                         \
    template void save_session<S>(const TrainingSession<S>&, const std::filesystem::path&);                 \
    template TrainingSession<S> load_session<S>(const TrainConfig&, const std::filesystem::path&);          \
    template ModelParams<S> train<S>(const TrainConfig&, const std::optional<std::filesystem::path>&,       \
                                     const MetricsCallback&);

WAVEFDRC_INSTANTIATE_TRAINER(float)
WAVEFDRC_INSTANTIATE_TRAINER(double)

#undef WAVEFDRC_INSTANTIATE_TRAINER

}  // namespace wavefdrc
