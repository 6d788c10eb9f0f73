// wavefdrc: train, simulate, roll out, compare and export.

#include "commands.hpp"

#include "wavefdrc/fdm.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>

using namespace wavefdrc;

int main(int argc, char** argv) {
    CLI::App app{"2D acoustic wave toolkit: FDTD oracle and label-free CNN surrogate"};
    app.require_subcommand(1);

    const std::map<std::string, Precision> precisions{{"single", Precision::single}, {"double", Precision::double_}};
    auto add_precision = [&](CLI::App* sub, std::optional<Precision>& target) {
        sub->add_option_function<std::string>(
               "--precision", [&](const std::string& s) { target = precisions.at(s); },
               "Arithmetic precision {single,double}")
            ->check(CLI::IsMember({"single", "double"}));
    };

    cli::TrainOptions train;
    auto* t = app.add_subcommand("train", "Train the surrogate from a JSON config");
    t->add_option("--config", train.config, "Run config (JSON)")->required();
    t->add_option("--out", train.out, "Checkpoint path (overrides training.checkpoint)");
    t->add_option("--resume", train.resume, "Continue a saved training session");
    t->add_option("--seed", train.seed, "Override training.seed");
    add_precision(t, train.precision);
    t->add_flag("--reproducible", train.reproducible, "Write wall_time_s = 0 so reruns are byte-identical");

    cli::SimulateOptions simulate;
    auto* s = app.add_subcommand("simulate", "Run the finite-difference oracle and write snapshots");
    s->add_option("--config", simulate.config, "Run config (JSON)")->required();
    s->add_option("--steps", simulate.steps, "Time steps")->capture_default_str();
    s->add_option("--stride", simulate.stride, "Steps between snapshots")->capture_default_str();
    s->add_option("--out", simulate.out, "Output directory (default: output.dir)");

    cli::RolloutOptions roll;
    auto* r = app.add_subcommand("rollout", "Autoregressive surrogate rollout from the zero state");
    r->add_option("--model", roll.model, "Checkpoint")->required();
    r->add_option("--config", roll.config, "Run config (JSON)")->required();
    r->add_option("--steps", roll.steps, "Time steps")->capture_default_str();
    r->add_option("--stride", roll.stride, "Steps between snapshots")->capture_default_str();
    r->add_option("--out", roll.out, "Output directory (default: output.dir)");
    add_precision(r, roll.precision);

    cli::CompareOptions cmp;
    auto* c = app.add_subcommand("compare", "Compare surrogate rollouts with the oracle");
    c->add_option("--model", cmp.model, "Checkpoint");
    c->add_option("--config", cmp.config, "Run config (JSON)")->required();
    c->add_option("--cases", cmp.cases, "Cases file (default: cases from the config)");
    c->add_option("--out", cmp.out, "Report CSV (default: stdout)");
    c->add_option("--stride", cmp.stride, "Steps between MRE samples")->capture_default_str();
    c->add_flag("--oracle", cmp.oracle, "Use the oracle itself as the surrogate (self-test)");
    c->add_flag("--full-domain", cmp.full_domain, "Take MRE over the whole grid instead of the interior");
    add_precision(c, cmp.precision);

    cli::ExportOptions exp;
    auto* e = app.add_subcommand("export", "Render one snapshot channel as csv or pgm");
    e->add_option("snapshot", exp.snapshot, "Snapshot file (.wfld)")->required();
    e->add_option("--format", exp.format, "csv or pgm")->required();
    e->add_option("--channel", exp.channel, "u, v, p or sigma")->capture_default_str();
    e->add_option("--out", exp.out, "Output file (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        return app.exit(err);
    }

    try {
        if (*t) return cli::cmd_train(train);
        if (*s) return cli::cmd_simulate(simulate);
        if (*r) return cli::cmd_rollout(roll);
        if (*c) return cli::cmd_compare(cmp);
        if (*e) return cli::cmd_export(exp);
    } catch (const NonFiniteError& err) {
        std::cerr << "wavefdrc: diverged: " << err.what() << '\n';
        return 3;
    } catch (const std::exception& err) {
        std::cerr << "wavefdrc: error: " << err.what() << '\n';
        return 1;
    }
    return 1;
}
