// grantnov command-line interface. Talks to the core exclusively through the
// C API in grantnov.h; every run writes a manifest next to its outputs.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "grantnov.h"

namespace {

namespace fs = std::filesystem;

struct ConfigHandle {
    gn_config* cfg = nullptr;
    ~ConfigHandle() { gn_config_free(cfg); }
};

struct DatasetHandle {
    gn_dataset* ds = nullptr;
    ~DatasetHandle() { gn_dataset_free(ds); }
};

struct NoveltyHandle {
    gn_novelty* nt = nullptr;
    ~NoveltyHandle() { gn_novelty_free(nt); }
};

int exit_code_of(gn_status s) {
    switch (s) {
        case GN_OK: return 0;
        case GN_ERR_USAGE: return 1;
        case GN_ERR_NUMERIC: return 3;
        default: return 2;
    }
}

[[noreturn]] void die(gn_status s, const std::string& context) {
    std::cerr << "grantnov: " << context << ": " << gn_last_error() << "\n";
    std::exit(exit_code_of(s));
}

void check(gn_status s, const std::string& context) {
    if (s != GN_OK) die(s, context);
}

std::string digest_of(const std::string& path) {
    char buf[32];
    if (gn_file_digest(path.c_str(), buf, sizeof buf) != GN_OK) return "";
    return buf;
}

// key=value snapshot of the effective config, via a temp file round-trip
std::map<std::string, std::string> config_snapshot(gn_config* cfg, const std::string& out_dir) {
    const std::string path = (fs::path(out_dir) / "effective_config.cfg").string();
    check(gn_config_save(cfg, path.c_str()), "saving config snapshot");
    std::map<std::string, std::string> kv;
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string k = line.substr(0, eq);
        std::string v = line.substr(eq + 1);
        auto strip = [](std::string s) {
            while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
            while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.pop_back();
            return s;
        };
        kv[strip(k)] = strip(v);
    }
    return kv;
}

void write_manifest(const std::string& out_dir, const std::string& command, gn_config* cfg,
                    const std::vector<std::string>& inputs) {
    nlohmann::json j;
    j["tool"] = "grantnov";
    j["version"] = gn_version();
    j["command"] = command;
    const auto now = std::chrono::system_clock::now();
    j["timestamp_unix"] = std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
    j["config"] = config_snapshot(cfg, out_dir);

    j["inputs"] = nlohmann::json::array();
    for (const auto& path : inputs) {
        j["inputs"].push_back({{"path", path}, {"digest_fnv1a64", digest_of(path)}});
    }

    std::vector<std::string> outputs;
    for (const auto& entry : fs::directory_iterator(out_dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        if (name == "run_manifest.json") continue;
        outputs.push_back(entry.path().string());
    }
    std::sort(outputs.begin(), outputs.end());
    j["outputs"] = nlohmann::json::array();
    for (const auto& path : outputs) {
        j["outputs"].push_back({{"path", path}, {"digest_fnv1a64", digest_of(path)}});
    }

    std::ofstream out(fs::path(out_dir) / "run_manifest.json");
    out << j.dump(2) << "\n";
}

int prompt_label(const char* grant_id, const char* summary, void*) {
    std::cout << "\n--- " << grant_id << " ---\n" << summary << "\n";
    std::cout << "label (1 = non-research, 0 = research, q = quit): " << std::flush;
    std::string answer;
    if (!std::getline(std::cin, answer)) return -1;
    if (answer == "0") return 0;
    if (answer == "1") return 1;
    return -1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"grant novelty scoring and impact analysis"};
    app.require_subcommand(1);

    // shared options
    std::string config_path;
    if (const char* env = std::getenv("GRANTNOV_CONFIG")) config_path = env;
    std::vector<std::pair<std::string, std::string>> overrides;
    std::string out_dir = ".";
    std::string grants_path, pubs_path, novelty_path, events_path, labels_path;
    std::string format = "csv";
    std::string probe_id, fractions = "0,0.01,0.02,0.04", grid;
    double noise_sigma = 0.0;
    std::string agency, years;
    bool interactive = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "flat key = value config file (env GRANTNOV_CONFIG)");
        sub->add_option("--out", out_dir, "output directory")->required();
        sub->add_option_function<std::string>(
            "--seed", [&](const std::string& v) { overrides.emplace_back("seed", v); }, "master RNG seed");
        sub->add_option_function<std::string>(
            "--jobs", [&](const std::string& v) { overrides.emplace_back("jobs", v); }, "parallel scoring jobs");
        sub->add_option_function<std::string>(
            "--nu", [&](const std::string& v) { overrides.emplace_back("nu", v); }, "one-class SVM nu");
        sub->add_option_function<std::string>(
            "--topics", [&](const std::string& v) { overrides.emplace_back("topics", v); }, "NMF topic count");
        sub->add_option_function<std::string>(
            "--window", [&](const std::string& v) { overrides.emplace_back("window_years", v); },
            "past-window size in years");
        sub->add_option("--agency", agency, "NSF, NIH or all");
        sub->add_option("--years", years, "year range A..B");
        sub->add_option_function<std::string>(
            "--set", [&](const std::string& v) {
                auto eq = v.find('=');
                if (eq == std::string::npos) throw CLI::ValidationError("--set expects key=value");
                overrides.emplace_back(v.substr(0, eq), v.substr(eq + 1));
            },
            "extra config override key=value (repeatable)");
    };

    auto* cmd_ingest = app.add_subcommand("ingest", "load, validate, dedupe and link local grant/publication files");
    cmd_ingest->add_option("--grants", grants_path, "grants file")->required();
    cmd_ingest->add_option("--pubs", pubs_path, "publications file");
    cmd_ingest->add_option("--format", format, "csv or jsonl");
    add_common(cmd_ingest);

    auto* cmd_filter = app.add_subcommand("filter", "train and apply the non-research grant classifier");
    cmd_filter->add_option("--grants", grants_path, "grants file")->required();
    cmd_filter->add_option("--labels", labels_path, "labels CSV: GRANT_ID,LABEL,PROVENANCE")->required();
    cmd_filter->add_option("--format", format, "csv or jsonl");
    cmd_filter->add_flag("--interactive", interactive, "prompt for labels instead of batch file mode");
    add_common(cmd_filter);

    auto* cmd_score = app.add_subcommand("score", "windowed novelty scoring with global min-max scaling");
    cmd_score->add_option("--grants", grants_path, "grants file")->required();
    cmd_score->add_option("--format", format, "csv or jsonl");
    add_common(cmd_score);

    auto* cmd_probe = app.add_subcommand("probe", "clone-probe robustness curve for one grant");
    cmd_probe->add_option("--grants", grants_path, "grants file")->required();
    cmd_probe->add_option("--probe-id", probe_id, "grant id to probe")->required();
    cmd_probe->add_option("--fractions", fractions, "comma-separated clone fractions");
    cmd_probe->add_option("--noise-sigma", noise_sigma, "gaussian term-count noise (0 = default)");
    cmd_probe->add_option("--format", format, "csv or jsonl");
    add_common(cmd_probe);

    auto* cmd_sens = app.add_subcommand("sensitivity", "novelty-coefficient grid over (nu, topics, window)");
    cmd_sens->add_option("--grants", grants_path, "grants file")->required();
    cmd_sens->add_option("--pubs", pubs_path, "publications file")->required();
    cmd_sens->add_option("--grid", grid, "nu:topics:window;... (default: built-in five rows)");
    cmd_sens->add_option("--format", format, "csv or jsonl");
    add_common(cmd_sens);

    const std::vector<std::string> study_names = {"regress", "dynamics", "programs", "prestige", "productivity",
                                                  "trend"};
    std::map<std::string, CLI::App*> study_cmds;
    for (const auto& name : study_names) {
        auto* sub = app.add_subcommand(name, name + " study over a linked corpus and novelty table");
        sub->add_option("--grants", grants_path, "grants file")->required();
        sub->add_option("--pubs", pubs_path, "publications file")->required();
        sub->add_option("--novelty", novelty_path, "novelty CSV from `score`")->required();
        sub->add_option("--events", events_path, "per-year citation events CSV");
        sub->add_option("--format", format, "csv or jsonl");
        add_common(sub);
        study_cmds[name] = sub;
    }

    auto* cmd_synth = app.add_subcommand("synth", "generate a deterministic synthetic corpus");
    add_common(cmd_synth);

    auto* cmd_demo = app.add_subcommand("demo", "synth -> score -> studies end-to-end");
    add_common(cmd_demo);

    CLI11_PARSE(app, argc, argv);

    // assemble config: defaults < demo defaults < file < flags
    ConfigHandle config;
    if (*cmd_demo) {
        check(gn_config_create(&config.cfg), "config");
        for (const auto& [k, v] : std::vector<std::pair<std::string, std::string>>{{"topics", "25"},
                                                                                   {"min_history", "50"},
                                                                                   {"synth_grants_per_year", "250"},
                                                                                   {"synth_years", "3"}}) {
            check(gn_config_set(config.cfg, k.c_str(), v.c_str()), "config");
        }
        if (!config_path.empty()) {
            gn_config* file_cfg = nullptr;
            check(gn_config_load(config_path.c_str(), &file_cfg), "loading config " + config_path);
            gn_config_free(config.cfg);
            config.cfg = file_cfg;
        }
    } else if (!config_path.empty()) {
        check(gn_config_load(config_path.c_str(), &config.cfg), "loading config " + config_path);
    } else {
        check(gn_config_create(&config.cfg), "config");
    }
    if (!agency.empty()) overrides.emplace_back("agencies", agency);
    if (!years.empty()) {
        auto dots = years.find("..");
        if (dots == std::string::npos) {
            std::cerr << "grantnov: --years expects A..B\n";
            return 1;
        }
        overrides.emplace_back("year_start", years.substr(0, dots));
        overrides.emplace_back("year_end", years.substr(dots + 2));
    }
    for (const auto& [k, v] : overrides) {
        check(gn_config_set(config.cfg, k.c_str(), v.c_str()), "config override " + k);
    }

    std::error_code ec;
    fs::create_directories(out_dir, ec);

    std::vector<std::string> inputs;
    auto track = [&](const std::string& p) {
        if (!p.empty()) inputs.push_back(p);
    };

    if (*cmd_ingest) {
        track(grants_path);
        track(pubs_path);
        check(gn_ingest(grants_path.c_str(), pubs_path.empty() ? nullptr : pubs_path.c_str(), format.c_str(),
                        out_dir.c_str(), config.cfg),
              "ingest");
        write_manifest(out_dir, "ingest", config.cfg, inputs);
        return 0;
    }

    if (*cmd_filter) {
        track(grants_path);
        track(labels_path);
        DatasetHandle ds;
        check(gn_dataset_load(grants_path.c_str(), nullptr, format.c_str(), config.cfg, &ds.ds), "loading grants");
        if (interactive) {
            check(gn_filter_interactive(ds.ds, config.cfg, labels_path.c_str(), prompt_label, nullptr,
                                        out_dir.c_str()),
                  "filter");
        } else {
            check(gn_filter(ds.ds, config.cfg, labels_path.c_str(), out_dir.c_str()), "filter");
        }
        write_manifest(out_dir, "filter", config.cfg, inputs);
        return 0;
    }

    if (*cmd_score) {
        track(grants_path);
        DatasetHandle ds;
        check(gn_dataset_load(grants_path.c_str(), nullptr, format.c_str(), config.cfg, &ds.ds), "loading grants");
        NoveltyHandle nt;
        check(gn_score(ds.ds, config.cfg, &nt.nt), "score");
        const std::string novelty_out = (fs::path(out_dir) / "novelty.csv").string();
        const std::string skips_out = (fs::path(out_dir) / "skipped_years.csv").string();
        check(gn_novelty_save_csv(nt.nt, novelty_out.c_str()), "writing novelty table");
        check(gn_novelty_save_skips_csv(nt.nt, skips_out.c_str()), "writing skip report");
        write_manifest(out_dir, "score", config.cfg, inputs);
        return 0;
    }

    if (*cmd_probe) {
        track(grants_path);
        DatasetHandle ds;
        check(gn_dataset_load(grants_path.c_str(), nullptr, format.c_str(), config.cfg, &ds.ds), "loading grants");
        std::vector<double> fr;
        std::stringstream ss(fractions);
        std::string part;
        while (std::getline(ss, part, ',')) {
            if (!part.empty()) fr.push_back(std::stod(part));
        }
        const std::string curve_out = (fs::path(out_dir) / "probe_curve.csv").string();
        check(gn_clone_probe(ds.ds, config.cfg, probe_id.c_str(), fr.data(), fr.size(), noise_sigma,
                             curve_out.c_str()),
              "probe");
        write_manifest(out_dir, "probe", config.cfg, inputs);
        return 0;
    }

    if (*cmd_sens) {
        track(grants_path);
        track(pubs_path);
        DatasetHandle ds;
        check(gn_dataset_load(grants_path.c_str(), pubs_path.c_str(), format.c_str(), config.cfg, &ds.ds),
              "loading corpus");
        const std::string out_csv = (fs::path(out_dir) / "sensitivity.csv").string();
        check(gn_sensitivity(ds.ds, config.cfg, grid.empty() ? nullptr : grid.c_str(), out_csv.c_str()),
              "sensitivity");
        write_manifest(out_dir, "sensitivity", config.cfg, inputs);
        return 0;
    }

    for (const auto& name : study_names) {
        if (!*study_cmds[name]) continue;
        track(grants_path);
        track(pubs_path);
        track(novelty_path);
        track(events_path);
        DatasetHandle ds;
        check(gn_dataset_load(grants_path.c_str(), pubs_path.c_str(), format.c_str(), config.cfg, &ds.ds),
              "loading corpus");
        if (!events_path.empty()) {
            check(gn_dataset_load_events(ds.ds, events_path.c_str()), "loading events");
        }
        NoveltyHandle nt;
        check(gn_novelty_load_csv(novelty_path.c_str(), &nt.nt), "loading novelty table");
        const std::string json_out = (fs::path(out_dir) / (name + ".json")).string();
        const std::string csv_out = (fs::path(out_dir) / (name + "_points.csv")).string();
        check(gn_study(ds.ds, nt.nt, config.cfg, name.c_str(), json_out.c_str(), csv_out.c_str()), name);
        write_manifest(out_dir, name, config.cfg, inputs);
        return 0;
    }

    if (*cmd_synth) {
        check(gn_synth(config.cfg, out_dir.c_str()), "synth");
        write_manifest(out_dir, "synth", config.cfg, inputs);
        return 0;
    }

    if (*cmd_demo) {
        check(gn_demo(config.cfg, out_dir.c_str()), "demo");
        write_manifest(out_dir, "demo", config.cfg, inputs);
        return 0;
    }

    std::cerr << app.help();
    return 1;
}
