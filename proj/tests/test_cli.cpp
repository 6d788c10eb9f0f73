#include "wavefdrc/checkpoint.hpp"
#include "wavefdrc/snapshot.hpp"

#include <doctest.h>

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace wavefdrc;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string output;
};

Run run(const std::string& args) {
    const std::string cmd = std::string(WAVEFDRC_CLI_PATH) + " " + args + " 2>&1";
    std::FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

fs::path workdir() {
    static const fs::path dir = [] {
        const fs::path d = fs::temp_directory_path() / "wavefdrc_test_cli";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

fs::path write_text(const std::string& name, const std::string& text) {
    const fs::path p = workdir() / name;
    std::ofstream(p) << text;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

const char* kSmallConfig = R"({
  "domain": {"nx": 32, "ny": 32, "pml_thickness": 6},
  "sampling": {"margin": 2},
  "training": {"pool_size": 6, "batch_size": 3, "samples_per_epoch": 6, "epochs": 2, "seed": 5,
               "checkpoint": "small/model.wnet"},
  "sources": [{"i0": 14, "j0": 14, "w": 3, "h": 3, "T": 20, "bias": 0.3}],
  "cases": [{"sources": [{"i0": 12, "j0": 13, "T": 30}], "steps": 20},
            {"sources": [{"i0": 10, "j0": 10, "T": 25}, {"i0": 18, "j0": 18, "T": 40}], "steps": 20}]
})";

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST_CASE("missing config names the path") {
    const Run r = run("simulate --config /nonexistent/run.json --out " + q(workdir() / "x"));
    CHECK(r.code != 0);
    CHECK(r.output.find("/nonexistent/run.json") != std::string::npos);
}

TEST_CASE("usage errors") {
    CHECK(run("").code != 0);
    CHECK(run("simulate").code != 0);
    CHECK(run("train --config a.json --precision half").code != 0);
}

TEST_CASE("simulate writes strided snapshots deterministically") {
    const fs::path cfg = write_text("sim.json", kSmallConfig);
    const fs::path a = workdir() / "sim_a", b = workdir() / "sim_b";
    REQUIRE(run("simulate --config " + q(cfg) + " --steps 300 --stride 60 --out " + q(a)).code == 0);
    REQUIRE(run("simulate --config " + q(cfg) + " --steps 300 --stride 60 --out " + q(b)).code == 0);
    int files = 0;
    for (int step = 0; step <= 300; step += 60) {
        char name[64];
        std::snprintf(name, sizeof(name), "snapshot_%06d.wfld", step);
        REQUIRE(fs::exists(a / name));
        CHECK(slurp(a / name) == slurp(b / name));
        const Snapshot s = load_snapshot(a / name);
        CHECK(s.step == static_cast<std::uint64_t>(step));
        CHECK(s.channels.size() == 4);
        ++files;
    }
    CHECK(files == 6);
    CHECK(std::distance(fs::directory_iterator(a), fs::directory_iterator()) == 6);
}

TEST_CASE("CFL violation is reported with its value") {
    const fs::path cfg = write_text("cfl.json", R"({"domain": {"nx": 32, "ny": 32, "pml_thickness": 6, "dt": 3.0}})");
    const Run r = run("simulate --config " + q(cfg) + " --out " + q(workdir() / "cfl"));
    CHECK(r.code != 0);
    CHECK(r.output.find("CFL number 2.12") != std::string::npos);
}

TEST_CASE("train, resume and roll out") {
    const fs::path cfg = write_text("train.json", kSmallConfig);
    const Run r = run("train --config " + q(cfg) + " --reproducible");
    REQUIRE_MESSAGE(r.code == 0, r.output);
    const fs::path model = workdir() / "small" / "model.wnet";
    CHECK(fs::exists(model));
    CHECK(fs::exists(workdir() / "small" / "model.wnet.pool"));
    CHECK(fs::exists(workdir() / "small" / "model.wnet.state.json"));

    std::ifstream metrics(workdir() / "small" / "model.metrics.csv");
    std::string line;
    int rows = -1;
    while (std::getline(metrics, line)) ++rows;
    CHECK(rows == 2 * 2);  // epochs x samples/batch

    SUBCASE("resume to more epochs matches a fresh longer run") {
        const std::string longer = std::string(kSmallConfig).replace(std::string(kSmallConfig).find("\"epochs\": 2"), 11,
                                                                     "\"epochs\": 3");
        const fs::path cfg3 = write_text("train3.json", longer);
        REQUIRE(run("train --config " + q(cfg3) + " --reproducible --out " + q(workdir() / "long" / "m.wnet")).code == 0);
        const Run res = run("train --config " + q(cfg3) + " --reproducible --resume " + q(model) + " --out " +
                            q(workdir() / "resumed" / "m.wnet"));
        REQUIRE_MESSAGE(res.code == 0, res.output);
        CHECK(slurp(workdir() / "long" / "m.wnet") == slurp(workdir() / "resumed" / "m.wnet"));
    }
    SUBCASE("rollout output shares the simulate format") {
        const fs::path out = workdir() / "roll";
        const Run ro = run("rollout --model " + q(model) + " --config " + q(cfg) + " --steps 40 --stride 20 --out " + q(out));
        REQUIRE_MESSAGE(ro.code == 0, ro.output);
        CHECK(slurp(out / "snapshot_000040.wfld").size() == slurp(workdir() / "sim_a" / "snapshot_000060.wfld").size());
        CHECK(load_snapshot(out / "snapshot_000040.wfld").step == 40);
    }
    SUBCASE("compare writes one row per sampled step") {
        const fs::path csv = workdir() / "cmp.csv";
        const Run c = run("compare --model " + q(model) + " --config " + q(cfg) + " --stride 10 --out " + q(csv));
        REQUIRE_MESSAGE(c.code == 0, c.output);
        std::ifstream is(csv);
        int n = -1;
        while (std::getline(is, line)) ++n;
        CHECK(n == 4);
    }
}

TEST_CASE("zero-weight rollout only shows the source") {
    const fs::path cfg = write_text("zero.json", kSmallConfig);
    const fs::path model = workdir() / "zero.wnet";
    save_params(ModelParams<float>::zeros(), model);
    const fs::path out = workdir() / "zero_roll";
    REQUIRE(run("rollout --model " + q(model) + " --config " + q(cfg) + " --steps 7 --stride 7 --out " + q(out)).code == 0);
    const Snapshot s = load_snapshot(out / "snapshot_000007.wfld");
    const SourceSpec src{14, 14, 3, 3, 20.0, 0.3};
    for (int i = 0; i < 32; ++i)
        for (int j = 0; j < 32; ++j) {
            CHECK(s.channels[0](i, j) == 0.0);
            const double expect = src.contains(i, j) ? static_cast<double>(static_cast<float>(source_value(src, 7.0))) : 0.0;
            CHECK(s.channels[2](i, j) == expect);
        }
}

TEST_CASE("oracle self-compare gives a zero MRE column") {
    const fs::path cfg = write_text("cmp.json", kSmallConfig);
    const fs::path csv = workdir() / "oracle.csv";
    const Run r = run("compare --oracle --config " + q(cfg) + " --stride 5 --out " + q(csv));
    REQUIRE_MESSAGE(r.code == 0, r.output);
    std::ifstream is(csv);
    std::string line;
    std::getline(is, line);
    CHECK(line == "case_id,sources,T,step,mre_p_percent,fdrc_loss");
    int rows = 0;
    while (std::getline(is, line)) {
        ++rows;
        std::vector<std::string> cols;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
        REQUIRE(cols.size() == 6);
        CHECK(cols[4] == "0");
    }
    CHECK(rows == 8);
}

TEST_CASE("unreadable checkpoint") {
    const fs::path cfg = write_text("bad.json", kSmallConfig);
    const fs::path junk = write_text("junk.wnet", "not a checkpoint");
    const Run r = run("compare --model " + q(junk) + " --config " + q(cfg));
    CHECK(r.code != 0);
    CHECK(r.output.find("junk.wnet") != std::string::npos);
    CHECK(run("rollout --model " + q(workdir() / "nope.wnet") + " --config " + q(cfg) + " --out " + q(workdir() / "r")).code != 0);
}

TEST_CASE("export") {
    const fs::path snap = workdir() / "zero.wfld";
    save_snapshot(snap, Snapshot{0, {FieldGrid(4, 3), FieldGrid(4, 3), FieldGrid(4, 3)}});

    SUBCASE("all-zero pgm is uniform gray") {
        const fs::path out = workdir() / "zero.pgm";
        REQUIRE(run("export " + q(snap) + " --format pgm --out " + q(out)).code == 0);
        const std::string b = slurp(out);
        const std::string header = "P5\n3 4\n255\n";
        REQUIRE(b.size() == header.size() + 12);
        CHECK(b.substr(0, header.size()) == header);
        for (std::size_t k = header.size(); k < b.size(); ++k) CHECK(static_cast<unsigned char>(b[k]) == 128);
    }
    SUBCASE("csv round-trips the stored values") {
        Rng rng(1);
        std::uniform_real_distribution<float> d(-3.0f, 3.0f);
        FieldGrid p(5, 6);
        for (double& x : p.values()) x = d(rng);
        const fs::path s = workdir() / "rand.wfld";
        save_snapshot(s, Snapshot{3, {FieldGrid(5, 6), FieldGrid(5, 6), p}});
        const fs::path out = workdir() / "rand.csv";
        REQUIRE(run("export " + q(s) + " --format csv --channel p --out " + q(out)).code == 0);
        std::ifstream is(out);
        std::string line;
        int i = 0;
        while (std::getline(is, line)) {
            std::stringstream ss(line);
            int j = 0;
            for (std::string c; std::getline(ss, c, ','); ++j) {
                double v = 0;
                std::from_chars(c.data(), c.data() + c.size(), v);
                CHECK(v == p(i, j));
            }
            CHECK(j == 6);
            ++i;
        }
        CHECK(i == 5);
    }
    SUBCASE("unknown format lists the supported ones") {
        const Run r = run("export " + q(snap) + " --format png");
        CHECK(r.code != 0);
        CHECK(r.output.find("csv") != std::string::npos);
        CHECK(r.output.find("pgm") != std::string::npos);
    }
    SUBCASE("missing sigma channel") {
        CHECK(run("export " + q(snap) + " --format csv --channel sigma").code != 0);
    }
}
