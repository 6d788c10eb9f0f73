#include "wavefdrc/config.hpp"

#include <fstream>
#include <initializer_list>
#include <string_view>

namespace wavefdrc {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, std::string_view section, std::initializer_list<std::string_view> allowed) {
    if (!j.is_object()) throw Error("config: '" + std::string(section) + "' must be an object");
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (auto a : allowed) known = known || key == a;
        if (!known) throw Error("config: unknown key '" + key + "' in '" + std::string(section) + "'");
    }
}

template <typename T>
void read_key(const json& j, const char* key, T& out, std::string_view section) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw Error("config: '" + std::string(section) + "." + key + "' has the wrong type");
    }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    if (path.empty() || path.is_absolute() || base.empty()) return path;
    return base / path;
}

}  // namespace

json to_json(const DomainSpec& s) {
    return {{"nx", s.nx}, {"ny", s.ny}, {"dx", s.dx}, {"dy", s.dy}, {"dt", s.dt}, {"c", s.c},
            {"rho0", s.rho0}, {"pml_thickness", s.pml_thickness}, {"pml_R", s.pml_R}};
}

json to_json(const SourceSpec& s) {
    return {{"i0", s.i0}, {"j0", s.j0}, {"w", s.w}, {"h", s.h}, {"T", s.period}, {"bias", s.bias}};
}

json to_json(const SourceSampling& s) {
    return {{"min_count", s.min_count}, {"max_count", s.max_count}, {"size", s.size},
            {"margin", s.margin}, {"period_min", s.period_min}, {"period_max", s.period_max}};
}

json to_json(const CaseSpec& c) {
    json src = json::array();
    for (const auto& s : c.sources) src.push_back(to_json(s));
    return {{"sources", src}, {"steps", c.steps}};
}

DomainSpec domain_from_json(const json& j) {
    reject_unknown(j, "domain", {"nx", "ny", "dx", "dy", "dt", "c", "rho0", "pml_thickness", "pml_R"});
    DomainSpec s;
    read_key(j, "nx", s.nx, "domain");
    read_key(j, "ny", s.ny, "domain");
    read_key(j, "dx", s.dx, "domain");
    read_key(j, "dy", s.dy, "domain");
    read_key(j, "dt", s.dt, "domain");
    read_key(j, "c", s.c, "domain");
    read_key(j, "rho0", s.rho0, "domain");
    read_key(j, "pml_thickness", s.pml_thickness, "domain");
    read_key(j, "pml_R", s.pml_R, "domain");
    s.validate();
    return s;
}

SourceSpec source_from_json(const json& j) {
    reject_unknown(j, "source", {"i0", "j0", "w", "h", "T", "bias"});
    SourceSpec s;
    read_key(j, "i0", s.i0, "source");
    read_key(j, "j0", s.j0, "source");
    read_key(j, "w", s.w, "source");
    read_key(j, "h", s.h, "source");
    read_key(j, "T", s.period, "source");
    read_key(j, "bias", s.bias, "source");
    return s;
}

SourceSampling sampling_from_json(const json& j) {
    reject_unknown(j, "sampling", {"min_count", "max_count", "size", "margin", "period_min", "period_max"});
    SourceSampling s;
    read_key(j, "min_count", s.min_count, "sampling");
    read_key(j, "max_count", s.max_count, "sampling");
    read_key(j, "size", s.size, "sampling");
    read_key(j, "margin", s.margin, "sampling");
    read_key(j, "period_min", s.period_min, "sampling");
    read_key(j, "period_max", s.period_max, "sampling");
    s.validate();
    return s;
}

std::vector<SourceSpec> sources_from_json(const json& j) {
    if (!j.is_array()) throw Error("config: 'sources' must be an array");
    std::vector<SourceSpec> out;
    for (const auto& s : j) out.push_back(source_from_json(s));
    return out;
}

CaseSpec case_from_json(const json& j) {
    reject_unknown(j, "case", {"sources", "steps"});
    CaseSpec c;
    if (j.contains("sources")) c.sources = sources_from_json(j.at("sources"));
    read_key(j, "steps", c.steps, "case");
    if (c.steps < 0) throw Error("config: case steps must be >= 0");
    return c;
}

RunConfig parse_run_config(const json& j, const std::filesystem::path& base_dir) {
    reject_unknown(j, "<root>", {"domain", "sampling", "training", "sources", "cases", "output"});
    RunConfig cfg;
    if (j.contains("domain")) cfg.domain = domain_from_json(j.at("domain"));
    if (j.contains("sampling")) cfg.sampling = sampling_from_json(j.at("sampling"));

    auto& t = cfg.training;
    if (j.contains("training")) {
        const auto& tj = j.at("training");
        reject_unknown(tj, "training",
                       {"pool_size", "batch_size", "samples_per_epoch", "epochs", "reset_prob", "seed",
                        "precision", "reproducible", "checkpoint", "metrics"});
        read_key(tj, "pool_size", t.pool_size, "training");
        read_key(tj, "batch_size", t.batch_size, "training");
        read_key(tj, "samples_per_epoch", t.samples_per_epoch, "training");
        read_key(tj, "epochs", t.epochs, "training");
        read_key(tj, "reset_prob", t.reset_prob, "training");
        read_key(tj, "seed", t.seed, "training");
        read_key(tj, "reproducible", t.reproducible, "training");
        std::string precision = "single";
        read_key(tj, "precision", precision, "training");
        if (precision == "single")
            t.precision = Precision::single;
        else if (precision == "double")
            t.precision = Precision::double_;
        else
            throw Error("config: 'training.precision' must be \"single\" or \"double\"");
        std::string path;
        read_key(tj, "checkpoint", path, "training");
        t.checkpoint_path = resolve(base_dir, path);
        path.clear();
        read_key(tj, "metrics", path, "training");
        t.metrics_path = resolve(base_dir, path);
    }
    t.domain = cfg.domain;
    t.sampling = cfg.sampling;
    t.validate();

    if (j.contains("sources")) {
        cfg.sources = sources_from_json(j.at("sources"));
        validate_sources(cfg.sources, cfg.domain);
    }
    if (j.contains("cases")) {
        if (!j.at("cases").is_array()) throw Error("config: 'cases' must be an array");
        for (const auto& c : j.at("cases")) {
            cfg.cases.push_back(case_from_json(c));
            validate_sources(cfg.cases.back().sources, cfg.domain);
        }
    }
    if (j.contains("output")) {
        reject_unknown(j.at("output"), "output", {"dir"});
        std::string dir;
        read_key(j.at("output"), "dir", dir, "output");
        cfg.output_dir = resolve(base_dir, dir);
    }
    return cfg;
}

namespace {

json read_json_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open config file " + path.string());
    try {
        return json::parse(is);
    } catch (const json::parse_error& e) {
        throw Error(path.string() + ": invalid JSON: " + e.what());
    }
}

}  // namespace

RunConfig load_run_config(const std::filesystem::path& path) {
    const json j = read_json_file(path);
    try {
        return parse_run_config(j, path.parent_path());
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

std::vector<CaseSpec> load_cases(const std::filesystem::path& path, const DomainSpec& spec) {
    const json j = read_json_file(path);
    const json* arr = &j;
    if (j.is_object()) {
        reject_unknown(j, "<cases root>", {"cases"});
        if (!j.contains("cases")) throw Error(path.string() + ": missing 'cases'");
        arr = &j.at("cases");
    }
    if (!arr->is_array()) throw Error(path.string() + ": cases must be an array");
    std::vector<CaseSpec> out;
    try {
        for (const auto& c : *arr) {
            out.push_back(case_from_json(c));
            validate_sources(out.back().sources, spec);
        }
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
    return out;
}

}  // namespace wavefdrc
