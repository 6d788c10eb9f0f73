#pragma once
// Subcommand implementations behind the wavefdrc executable. Each returns a
// process exit code; errors surface as exceptions caught in main.

#include "wavefdrc/checkpoint.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace wavefdrc::cli {

struct TrainOptions {
    std::filesystem::path config;
    std::filesystem::path out;  // overrides training.checkpoint
    std::optional<std::filesystem::path> resume;
    std::optional<std::uint64_t> seed;
    std::optional<Precision> precision;
    bool reproducible = false;
};

struct SimulateOptions {
    std::filesystem::path config;
    int steps = 300;
    int stride = 60;
    std::filesystem::path out;
};

struct RolloutOptions {
    std::filesystem::path model;
    std::filesystem::path config;
    int steps = 300;
    int stride = 60;
    std::filesystem::path out;
    std::optional<Precision> precision;
};

struct CompareOptions {
    std::filesystem::path model;
    std::filesystem::path config;
    std::filesystem::path cases;  // empty: cases from the config
    std::filesystem::path out;
    int stride = 50;
    bool oracle = false;
    bool full_domain = false;
    std::optional<Precision> precision;
};

struct ExportOptions {
    std::filesystem::path snapshot;
    std::string format;
    std::string channel = "p";
    std::filesystem::path out;
};

int cmd_train(const TrainOptions& opt);
int cmd_simulate(const SimulateOptions& opt);
int cmd_rollout(const RolloutOptions& opt);
int cmd_compare(const CompareOptions& opt);
int cmd_export(const ExportOptions& opt);

}  // namespace wavefdrc::cli
