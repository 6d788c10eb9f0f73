#pragma once
/**
 * @file config.hpp
 * @brief JSON run configuration.
 *
 * Top-level keys (all optional, unknown keys are rejected):
 *   domain    {nx, ny, dx, dy, dt, c, rho0, pml_thickness, pml_R}
 *   sampling  {min_count, max_count, size, margin, period_min, period_max}
 *   training  {pool_size, batch_size, samples_per_epoch, epochs, reset_prob,
 *              seed, precision ("single"|"double"), reproducible, checkpoint, metrics}
 *   sources   [{i0, j0, w, h, T, bias}]      sources for simulate/rollout
 *   cases     [{sources: [...], steps}]      comparison cases
 *   output    {dir}
 * Relative paths are resolved against the config file's directory.
 */

#include "wavefdrc/eval.hpp"
#include "wavefdrc/trainer.hpp"

#include <json.hpp>

#include <filesystem>
#include <vector>

namespace wavefdrc {

struct RunConfig {
    DomainSpec domain;
    SourceSampling sampling;
    TrainConfig training;  // training.domain / training.sampling mirror the fields above
    std::vector<SourceSpec> sources;
    std::vector<CaseSpec> cases;
    std::filesystem::path output_dir;
};

nlohmann::json to_json(const DomainSpec& spec);
nlohmann::json to_json(const SourceSpec& src);
nlohmann::json to_json(const SourceSampling& sampling);
nlohmann::json to_json(const CaseSpec& c);

DomainSpec domain_from_json(const nlohmann::json& j);
SourceSpec source_from_json(const nlohmann::json& j);
SourceSampling sampling_from_json(const nlohmann::json& j);
std::vector<SourceSpec> sources_from_json(const nlohmann::json& j);
CaseSpec case_from_json(const nlohmann::json& j);

/// Parses and validates every section; `base_dir` resolves relative paths.
RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Either a bare array of cases or an object {"cases": [...]}. Validated against `spec`.
std::vector<CaseSpec> load_cases(const std::filesystem::path& path, const DomainSpec& spec);

}  // namespace wavefdrc
