#pragma once
/**
 * @file eval.hpp
 * @brief Surrogate rollouts, the mean relative error metric and oracle comparison.
 */

#include "wavefdrc/fdm.hpp"
#include "wavefdrc/nn.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace wavefdrc {

/// One-step map: the oracle or a trained network bound to a domain and its sources.
StepFunction oracle_stepper(const DomainSpec& spec, std::vector<SourceSpec> sources);

template <typename Scalar>
StepFunction network_stepper(ModelParams<Scalar> params, const DomainSpec& spec,
                             std::vector<SourceSpec> sources);

/// Autoregressive surrogate trajectory from the zero state; snapshots as in simulate().
template <typename Scalar>
Trajectory rollout(const ModelParams<Scalar>& params, const DomainSpec& spec,
                   std::span<const SourceSpec> sources, int steps, int snapshot_stride);

/// sum |pred - truth| / sum |truth| * 100 over mask=1 cells.
double mre(const FieldGrid& pred, const FieldGrid& truth, const FieldGrid& mask);

struct CaseSpec {
    std::vector<SourceSpec> sources;
    int steps = 300;
};

struct SnapshotMetrics {
    std::int64_t step = 0;
    double mre_p = 0.0;      // percent, over the evaluation mask
    double fdrc_loss = 0.0;  // loss of the surrogate transition into this step
};

struct CaseReport {
    std::size_t case_id = 0;
    std::size_t source_count = 0;
    double period = 0.0;  // period of the first source
    std::vector<SnapshotMetrics> snapshots;
    double mean_mre_p = 0.0;      // mean over snapshots
    double mean_fdrc_loss = 0.0;  // mean over every surrogate step
    std::optional<std::string> error;
};

struct ComparisonReport {
    std::vector<CaseReport> cases;
    bool all_ok() const;
};

enum class MreRegion { interior, full };

/// Runs the oracle and `make_surrogate(case)` side by side from the zero
/// state. MRE of p is taken every `snapshot_stride` steps (and at the last
/// step); the FDRC loss of every surrogate transition is averaged. A failing
/// case records its error and the remaining cases still run.
using SurrogateFactory = std::function<StepFunction(const CaseSpec&)>;
ComparisonReport compare(const SurrogateFactory& make_surrogate, const DomainSpec& spec,
                         std::span<const CaseSpec> cases, int snapshot_stride,
                         MreRegion region = MreRegion::interior);

template <typename Scalar>
ComparisonReport compare(const ModelParams<Scalar>& params, const DomainSpec& spec,
                         std::span<const CaseSpec> cases, int snapshot_stride,
                         MreRegion region = MreRegion::interior);

inline constexpr const char* kReportHeader = "case_id,sources,T,step,mre_p_percent,fdrc_loss";

void write_report_csv(const ComparisonReport& report, std::ostream& os);

}  // namespace wavefdrc
