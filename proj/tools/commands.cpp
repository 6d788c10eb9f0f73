#include "commands.hpp"

#include "wavefdrc/config.hpp"
#include "wavefdrc/eval.hpp"
#include "wavefdrc/fdm.hpp"
#include "wavefdrc/snapshot.hpp"
#include "wavefdrc/trainer.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace wavefdrc::cli {

namespace fs = std::filesystem;

namespace {

void require_cfl(const DomainSpec& spec, const char* command) {
    if (check_cfl(spec)) return;
    std::ostringstream os;
    os << command << ": CFL number " << cfl_number(spec) << " exceeds 1 (reduce dt or refine dx, dy)";
    throw Error(os.str());
}

void require_steps(int steps, int stride) {
    if (steps < 0) throw Error("--steps must be >= 0");
    if (stride < 1) throw Error("--stride must be >= 1");
}

fs::path snapshot_name(const fs::path& dir, std::int64_t step) {
    char name[64];
    std::snprintf(name, sizeof(name), "snapshot_%06lld.wfld", static_cast<long long>(step));
    return dir / name;
}

void write_trajectory(const Trajectory& traj, const SigmaField& sigma, const fs::path& dir) {
    fs::create_directories(dir);
    for (const auto& st : traj) save_snapshot(snapshot_name(dir, st.step), to_snapshot(st, &sigma));
    std::cout << "wrote " << traj.size() << " snapshots to " << dir.string() << '\n';
}

Precision model_precision(const fs::path& model, const std::optional<Precision>& requested) {
    const Precision stored = read_checkpoint_precision(model);
    if (!requested) return stored;
    if (*requested == Precision::single && stored == Precision::double_)
        throw Error(model.string() + ": double-precision checkpoint cannot run with --precision single");
    return *requested;
}

}  // namespace

int cmd_train(const TrainOptions& opt) {
    const RunConfig rc = load_run_config(opt.config);
    TrainConfig cfg = rc.training;
    if (!opt.out.empty()) cfg.checkpoint_path = opt.out;
    if (cfg.checkpoint_path.empty())
        throw Error(opt.config.string() + ": no checkpoint path (set training.checkpoint or pass --out)");
    if (cfg.metrics_path.empty()) {
        cfg.metrics_path = cfg.checkpoint_path;
        cfg.metrics_path.replace_extension(".metrics.csv");
    }
    if (opt.seed) cfg.seed = *opt.seed;
    if (opt.precision) cfg.precision = *opt.precision;
    if (opt.reproducible) cfg.reproducible = true;
    if (cfg.checkpoint_path.has_parent_path()) fs::create_directories(cfg.checkpoint_path.parent_path());

    if (opt.resume) {
        const Precision stored = read_checkpoint_precision(*opt.resume);
        if (stored != cfg.precision)
            throw Error(opt.resume->string() + ": checkpoint precision differs from the requested precision");
        if (fs::weakly_canonical(*opt.resume) != fs::weakly_canonical(cfg.checkpoint_path)) {
            // continue into the new checkpoint path, carrying the session files along
            for (const char* suffix : {"", ".pool", ".state.json"}) {
                fs::path from = *opt.resume, to = cfg.checkpoint_path;
                from += suffix;
                to += suffix;
                fs::copy_file(from, to, fs::copy_options::overwrite_existing);
            }
        }
    }

    int last_epoch = 0;
    auto report = [&](const MetricsRecord& r) {
        if (r.batch == cfg.batches_per_epoch() && r.epoch != last_epoch) {
            last_epoch = r.epoch;
            std::printf("epoch %d/%d  last batch loss %.6e  lr %.0e\n", r.epoch, cfg.epochs, r.total, r.lr);
            std::fflush(stdout);
        }
    };
    const std::optional<fs::path> resume =
        opt.resume ? std::optional<fs::path>(cfg.checkpoint_path) : std::nullopt;
    if (cfg.precision == Precision::single)
        train<float>(cfg, resume, report);
    else
        train<double>(cfg, resume, report);
    std::cout << "checkpoint: " << cfg.checkpoint_path.string() << "\nmetrics: " << cfg.metrics_path.string()
              << '\n';
    return 0;
}

int cmd_simulate(const SimulateOptions& opt) {
    const RunConfig rc = load_run_config(opt.config);
    require_steps(opt.steps, opt.stride);
    require_cfl(rc.domain, "simulate");
    const fs::path out = opt.out.empty() ? rc.output_dir : opt.out;
    if (out.empty()) throw Error("simulate: no output directory (pass --out or set output.dir)");
    const Trajectory traj = simulate(rc.domain, rc.sources, opt.steps, opt.stride);
    write_trajectory(traj, build_sigma(rc.domain), out);
    return 0;
}

int cmd_rollout(const RolloutOptions& opt) {
    const RunConfig rc = load_run_config(opt.config);
    require_steps(opt.steps, opt.stride);
    require_cfl(rc.domain, "rollout");
    const fs::path out = opt.out.empty() ? rc.output_dir : opt.out;
    if (out.empty()) throw Error("rollout: no output directory (pass --out or set output.dir)");
    const Precision prec = model_precision(opt.model, opt.precision);
    const Trajectory traj = prec == Precision::single
                                ? rollout(load_params<float>(opt.model), rc.domain, rc.sources, opt.steps, opt.stride)
                                : rollout(load_params<double>(opt.model), rc.domain, rc.sources, opt.steps, opt.stride);
    write_trajectory(traj, build_sigma(rc.domain), out);
    return 0;
}

int cmd_compare(const CompareOptions& opt) {
    const RunConfig rc = load_run_config(opt.config);
    require_cfl(rc.domain, "compare");
    const std::vector<CaseSpec> cases = opt.cases.empty() ? rc.cases : load_cases(opt.cases, rc.domain);
    if (cases.empty()) throw Error("compare: no cases (pass --cases or set cases in the config)");
    const MreRegion region = opt.full_domain ? MreRegion::full : MreRegion::interior;

    ComparisonReport report;
    if (opt.oracle) {
        report = compare([&](const CaseSpec& c) { return oracle_stepper(rc.domain, c.sources); }, rc.domain, cases,
                         opt.stride, region);
    } else {
        if (opt.model.empty()) throw Error("compare: --model is required unless --oracle is given");
        if (model_precision(opt.model, opt.precision) == Precision::single)
            report = compare(load_params<float>(opt.model), rc.domain, cases, opt.stride, region);
        else
            report = compare(load_params<double>(opt.model), rc.domain, cases, opt.stride, region);
    }

    if (opt.out.empty()) {
        write_report_csv(report, std::cout);
    } else {
        if (opt.out.has_parent_path()) fs::create_directories(opt.out.parent_path());
        std::ofstream os(opt.out);
        if (!os) throw Error("cannot write " + opt.out.string());
        write_report_csv(report, os);
        if (!os) throw Error("write failed: " + opt.out.string());
    }

    std::FILE* summary = opt.out.empty() ? stderr : stdout;
    for (const auto& c : report.cases) {
        if (c.error)
            std::fprintf(summary, "case %zu: FAILED: %s\n", c.case_id, c.error->c_str());
        else
            std::fprintf(summary, "case %zu: sources=%zu T=%g mean MRE(p)=%.4f%% mean FDRC loss=%.4e\n", c.case_id,
                         c.source_count, c.period, c.mean_mre_p, c.mean_fdrc_loss);
    }
    return report.all_ok() ? 0 : 2;
}

int cmd_export(const ExportOptions& opt) {
    if (opt.format != "csv" && opt.format != "pgm")
        throw Error("export: unknown format '" + opt.format + "' (supported: csv, pgm)");
    static const std::vector<std::string> names{"u", "v", "p", "sigma"};
    std::size_t channel = names.size();
    for (std::size_t k = 0; k < names.size(); ++k)
        if (names[k] == opt.channel) channel = k;
    if (channel == names.size()) throw Error("export: unknown channel '" + opt.channel + "' (u, v, p, sigma)");

    const Snapshot snap = load_snapshot(opt.snapshot);
    if (channel >= snap.channels.size())
        throw Error(opt.snapshot.string() + ": snapshot has no " + opt.channel + " channel");
    const FieldGrid& field = snap.channels[channel];

    if (opt.out.empty() || opt.out == "-") {
        if (opt.format == "csv")
            export_csv(field, std::cout);
        else
            export_pgm(field, std::cout);
        return std::cout ? 0 : 1;
    }
    if (opt.out.has_parent_path()) fs::create_directories(opt.out.parent_path());
    std::ofstream os(opt.out, std::ios::binary);
    if (!os) throw Error("cannot write " + opt.out.string());
    if (opt.format == "csv")
        export_csv(field, os);
    else
        export_pgm(field, os);
    if (!os) throw Error("write failed: " + opt.out.string());
    return 0;
}

}  // namespace wavefdrc::cli
