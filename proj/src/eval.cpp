#include "wavefdrc/eval.hpp"

#include "wavefdrc/fdrc_loss.hpp"
#include "wavefdrc/parallel.hpp"

#include <cmath>
#include <cstdio>
#include <memory>
#include <ostream>
#include <sstream>

namespace wavefdrc {

StepFunction oracle_stepper(const DomainSpec& spec, std::vector<SourceSpec> sources) {
    validate_sources(sources, spec);
    auto sigma = std::make_shared<const SigmaField>(build_sigma(spec));
    return [spec, sigma, sources = std::move(sources)](const WaveState& s) {
        return fdm_step(s, *sigma, spec, sources);
    };
}

template <typename Scalar>
StepFunction network_stepper(ModelParams<Scalar> params, const DomainSpec& spec, std::vector<SourceSpec> sources) {
    validate_sources(sources, spec);
    auto sigma = std::make_shared<const SigmaField>(build_sigma(spec));
    auto shared = std::make_shared<const ModelParams<Scalar>>(std::move(params));
    return [spec, sigma, shared, sources = std::move(sources)](const WaveState& s) {
        return predict_step(*shared, s, *sigma, spec, sources);
    };
}

template <typename Scalar>
Trajectory rollout(const ModelParams<Scalar>& params, const DomainSpec& spec, std::span<const SourceSpec> sources,
                   int steps, int snapshot_stride) {
    spec.validate();
    if (!check_cfl(spec)) {
        std::ostringstream os;
        os << "rollout: CFL number " << cfl_number(spec) << " exceeds 1";
        throw Error(os.str());
    }
    const auto step = network_stepper(params, spec, std::vector<SourceSpec>(sources.begin(), sources.end()));
    return march(WaveState::zeros(spec.nx, spec.ny), steps, snapshot_stride, step, "rollout");
}

double mre(const FieldGrid& pred, const FieldGrid& truth, const FieldGrid& mask) {
    if (!pred.same_shape(truth) || !mask.same_shape(truth)) throw Error("mre: shape mismatch");
    double num = 0.0;
    double den = 0.0;
    for (std::size_t k = 0; k < truth.size(); ++k) {
        if (mask.values()[k] == 0.0) continue;
        num += std::abs(pred.values()[k] - truth.values()[k]);
        den += std::abs(truth.values()[k]);
    }
    if (!(den > 0.0)) throw Error("mre: reference field is zero over the mask");
    return num / den * 100.0;
}

bool ComparisonReport::all_ok() const {
    for (const auto& c : cases)
        if (c.error) return false;
    return true;
}

namespace {

CaseReport run_case(std::size_t id, const CaseSpec& c, const StepFunction& surrogate, const DomainSpec& spec,
                    int stride, MreRegion region) {
    CaseReport rep;
    rep.case_id = id;
    rep.source_count = c.sources.size();
    rep.period = c.sources.empty() ? 0.0 : c.sources.front().period;

    const SigmaField sigma = build_sigma(spec);
    const FieldGrid loss_mask = non_source_mask(spec, c.sources);
    const FieldGrid eval_mask = region == MreRegion::interior ? interior_mask(spec) : FieldGrid(spec.nx, spec.ny, 1.0);

    WaveState truth = WaveState::zeros(spec.nx, spec.ny);
    WaveState model = truth;
    double loss_sum = 0.0;
    double mre_sum = 0.0;
    for (int n = 1; n <= c.steps; ++n) {
        truth = fdm_step(truth, sigma, spec, c.sources);
        WaveState next = surrogate(model);
        if (!next.all_finite()) throw NonFiniteError(next.step, "surrogate rollout");
        const double loss = fdrc_loss(residuals(model, next, sigma, spec, loss_mask)).total;
        loss_sum += loss;
        model = std::move(next);
        if (n % stride == 0 || n == c.steps) {
            const double e = mre(model.p, truth.p, eval_mask);
            rep.snapshots.push_back({model.step, e, loss});
            mre_sum += e;
        }
    }
    if (c.steps > 0) {
        rep.mean_fdrc_loss = loss_sum / c.steps;
        rep.mean_mre_p = mre_sum / static_cast<double>(rep.snapshots.size());
    }
    return rep;
}

}  // namespace

ComparisonReport compare(const SurrogateFactory& make_surrogate, const DomainSpec& spec,
                         std::span<const CaseSpec> cases, int snapshot_stride, MreRegion region) {
    spec.validate();
    if (snapshot_stride < 1) throw Error("compare: snapshot stride must be >= 1");
    if (!check_cfl(spec)) {
        std::ostringstream os;
        os << "compare: CFL number " << cfl_number(spec) << " exceeds 1";
        throw Error(os.str());
    }
    ComparisonReport report;
    report.cases.resize(cases.size());
    parallel_for(cases.size(), [&](std::size_t k) {
        try {
            validate_sources(cases[k].sources, spec);
            report.cases[k] = run_case(k, cases[k], make_surrogate(cases[k]), spec, snapshot_stride, region);
        } catch (const std::exception& e) {
            auto& rep = report.cases[k];
            rep = CaseReport{};
            rep.case_id = k;
            rep.source_count = cases[k].sources.size();
            rep.period = cases[k].sources.empty() ? 0.0 : cases[k].sources.front().period;
            rep.error = e.what();
        }
    });
    return report;
}

template <typename Scalar>
ComparisonReport compare(const ModelParams<Scalar>& params, const DomainSpec& spec, std::span<const CaseSpec> cases,
                         int snapshot_stride, MreRegion region) {
    return compare([&](const CaseSpec& c) { return network_stepper(params, spec, c.sources); }, spec, cases,
                   snapshot_stride, region);
}

void write_report_csv(const ComparisonReport& report, std::ostream& os) {
    os << kReportHeader << '\n';
    char line[256];
    for (const auto& c : report.cases) {
        for (const auto& s : c.snapshots) {
            std::snprintf(line, sizeof(line), "%zu,%zu,%.17g,%lld,%.17g,%.17g\n", c.case_id, c.source_count,
                          c.period, static_cast<long long>(s.step), s.mre_p, s.fdrc_loss);
            os << line;
        }
    }
}

template StepFunction network_stepper<float>(ModelParams<float>, const DomainSpec&, std::vector<SourceSpec>);
template StepFunction network_stepper<double>(ModelParams<double>, const DomainSpec&, std::vector<SourceSpec>);
template Trajectory rollout<float>(const ModelParams<float>&, const DomainSpec&, std::span<const SourceSpec>, int, int);
template Trajectory rollout<double>(const ModelParams<double>&, const DomainSpec&, std::span<const SourceSpec>, int,
                                    int);
template ComparisonReport compare<float>(const ModelParams<float>&, const DomainSpec&, std::span<const CaseSpec>, int,
                                         MreRegion);
template ComparisonReport compare<double>(const ModelParams<double>&, const DomainSpec&, std::span<const CaseSpec>,
                                          int, MreRegion);

}  // namespace wavefdrc
