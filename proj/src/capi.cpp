#include "grantnov.h"

#include <cstring>
#include <string>

#include "grantnov/corpus.hpp"
#include "grantnov/engine.hpp"
#include "grantnov/error.hpp"
#include "grantnov/pipeline.hpp"

using namespace grantnov;

struct gn_config {
    RunConfig cfg;
};

struct gn_dataset {
    LinkedDataset linked;
    std::vector<CitationEvent> events;
};

struct gn_novelty {
    NoveltyTable table;
};

namespace {

thread_local std::string g_last_error;

gn_status status_of(ErrorCode code) {
    switch (code) {
        case ErrorCode::usage: return GN_ERR_USAGE;
        case ErrorCode::io: return GN_ERR_IO;
        case ErrorCode::parse: return GN_ERR_PARSE;
        case ErrorCode::validation: return GN_ERR_VALIDATION;
        case ErrorCode::dimension: return GN_ERR_DIMENSION;
        case ErrorCode::numeric: return GN_ERR_NUMERIC;
        case ErrorCode::degenerate: return GN_ERR_DEGENERATE;
    }
    return GN_ERR_UNKNOWN;
}

template <typename Fn>
gn_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return GN_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return status_of(e.code());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return GN_ERR_UNKNOWN;
    } catch (...) {
        g_last_error = "unknown error";
        return GN_ERR_UNKNOWN;
    }
}

gn_status fail(gn_status code, const char* message) {
    g_last_error = message;
    return code;
}

void copy_out(const std::string& value, char* buf, size_t buflen) {
    if (!buf || buflen == 0) return;
    const size_t n = std::min(value.size(), buflen - 1);
    std::memcpy(buf, value.data(), n);
    buf[n] = '\0';
}

} // namespace

extern "C" {

const char* gn_version(void) { return "0.1.0"; }

const char* gn_last_error(void) { return g_last_error.c_str(); }

gn_status gn_config_create(gn_config** out) {
    if (!out) return fail(GN_ERR_INVALID_HANDLE, "gn_config_create: out is null");
    return guarded([&] { *out = new gn_config(); });
}

gn_status gn_config_load(const char* path, gn_config** out) {
    if (!out || !path) return fail(GN_ERR_INVALID_HANDLE, "gn_config_load: null argument");
    return guarded([&] { *out = new gn_config{RunConfig::from_file(path)}; });
}

gn_status gn_config_set(gn_config* cfg, const char* key, const char* value) {
    if (!cfg || !key || !value) return fail(GN_ERR_INVALID_HANDLE, "gn_config_set: null argument");
    return guarded([&] { cfg->cfg.set(key, value); });
}

gn_status gn_config_get(const gn_config* cfg, const char* key, char* buf, size_t buflen) {
    if (!cfg || !key) return fail(GN_ERR_INVALID_HANDLE, "gn_config_get: null argument");
    return guarded([&] { copy_out(cfg->cfg.get(key), buf, buflen); });
}

gn_status gn_config_save(const gn_config* cfg, const char* path) {
    if (!cfg || !path) return fail(GN_ERR_INVALID_HANDLE, "gn_config_save: null argument");
    return guarded([&] { save_config_file(path, cfg->cfg); });
}

void gn_config_free(gn_config* cfg) { delete cfg; }

gn_status gn_dataset_load(const char* grants_path, const char* pubs_path, const char* format, const gn_config* cfg,
                          gn_dataset** out) {
    if (!out || !grants_path || !format) return fail(GN_ERR_INVALID_HANDLE, "gn_dataset_load: null argument");
    return guarded([&] {
        RunConfig rc = cfg ? cfg->cfg : RunConfig{};
        auto ds = new gn_dataset();
        ds->linked = load_linked(grants_path, pubs_path ? pubs_path : "", parse_format(format), rc);
        *out = ds;
    });
}

gn_status gn_dataset_stats_get(const gn_dataset* ds, gn_dataset_stats* out) {
    if (!ds || !out) return fail(GN_ERR_INVALID_HANDLE, "gn_dataset_stats_get: null argument");
    out->grants = ds->linked.grants.size();
    out->publications = ds->linked.publications.size();
    out->orphan_links = ds->linked.orphan_count;
    out->pubs_missing_sjr = ds->linked.pubs_missing_sjr;
    out->pubs_missing_field = ds->linked.pubs_missing_field;
    return GN_OK;
}

gn_status gn_dataset_load_events(gn_dataset* ds, const char* path) {
    if (!ds || !path) return fail(GN_ERR_INVALID_HANDLE, "gn_dataset_load_events: null argument");
    return guarded([&] { ds->events = load_citation_events(path); });
}

void gn_dataset_free(gn_dataset* ds) { delete ds; }

gn_status gn_ingest(const char* grants_path, const char* pubs_path, const char* format, const char* out_dir,
                    const gn_config* cfg) {
    if (!grants_path || !format || !out_dir) return fail(GN_ERR_INVALID_HANDLE, "gn_ingest: null argument");
    return guarded([&] {
        RunConfig rc = cfg ? cfg->cfg : RunConfig{};
        ingest(grants_path, pubs_path ? pubs_path : "", parse_format(format), out_dir, rc);
    });
}

gn_status gn_score(const gn_dataset* ds, const gn_config* cfg, gn_novelty** out) {
    if (!ds || !out) return fail(GN_ERR_INVALID_HANDLE, "gn_score: null argument");
    return guarded([&] {
        RunConfig rc = cfg ? cfg->cfg : RunConfig{};
        auto nt = new gn_novelty();
        nt->table = score_all(ds->linked.grants, rc.engine);
        *out = nt;
    });
}

gn_status gn_novelty_save_csv(const gn_novelty* nt, const char* path) {
    if (!nt || !path) return fail(GN_ERR_INVALID_HANDLE, "gn_novelty_save_csv: null argument");
    return guarded([&] { write_novelty_csv(path, nt->table); });
}

gn_status gn_novelty_save_skips_csv(const gn_novelty* nt, const char* path) {
    if (!nt || !path) return fail(GN_ERR_INVALID_HANDLE, "gn_novelty_save_skips_csv: null argument");
    return guarded([&] { write_skip_csv(path, nt->table); });
}

gn_status gn_novelty_load_csv(const char* path, gn_novelty** out) {
    if (!path || !out) return fail(GN_ERR_INVALID_HANDLE, "gn_novelty_load_csv: null argument");
    return guarded([&] {
        auto nt = new gn_novelty();
        nt->table = read_novelty_csv(path);
        *out = nt;
    });
}

gn_status gn_novelty_count(const gn_novelty* nt, size_t* out) {
    if (!nt || !out) return fail(GN_ERR_INVALID_HANDLE, "gn_novelty_count: null argument");
    *out = nt->table.rows.size();
    return GN_OK;
}

gn_status gn_novelty_get(const gn_novelty* nt, size_t index, gn_novelty_row* out) {
    if (!nt || !out) return fail(GN_ERR_INVALID_HANDLE, "gn_novelty_get: null argument");
    if (index >= nt->table.rows.size()) return fail(GN_ERR_USAGE, "gn_novelty_get: index out of range");
    const NoveltyRow& r = nt->table.rows[index];
    out->grant_id = r.grant_id.c_str();
    out->agency = r.agency.c_str();
    out->program = r.program.c_str();
    out->division = r.division.c_str();
    out->year = r.year;
    out->raw_distance = r.raw_distance;
    out->novelty_score = r.novelty_score;
    return GN_OK;
}

void gn_novelty_free(gn_novelty* nt) { delete nt; }

gn_status gn_clone_probe(const gn_dataset* ds, const gn_config* cfg, const char* probe_id, const double* fractions,
                         size_t n_fractions, double noise_sigma, const char* out_csv) {
    if (!ds || !probe_id || !fractions || !out_csv) {
        return fail(GN_ERR_INVALID_HANDLE, "gn_clone_probe: null argument");
    }
    return guarded([&] {
        RunConfig rc = cfg ? cfg->cfg : RunConfig{};
        std::vector<double> fr(fractions, fractions + n_fractions);
        auto curve = clone_probe(ds->linked.grants, probe_id, fr, noise_sigma, rc.engine);
        write_probe_csv(out_csv, curve);
    });
}

gn_status gn_sensitivity(const gn_dataset* ds, const gn_config* cfg, const char* grid, const char* out_csv) {
    if (!ds || !out_csv) return fail(GN_ERR_INVALID_HANDLE, "gn_sensitivity: null argument");
    return guarded([&] {
        RunConfig rc = cfg ? cfg->cfg : RunConfig{};
        std::vector<SensitivityTriple> triples;
        if (!grid || !*grid) {
            triples = default_sensitivity_grid();
        } else {
            for (const auto& part : split(grid, ';')) {
                if (trim(part).empty()) continue;
                auto f = split(trim(part), ':');
                if (f.size() != 3) raise(ErrorCode::usage, "sensitivity grid entries must be nu:topics:window");
                auto nu = parse_double(f[0]);
                auto tn = parse_int(f[1]);
                auto ws = parse_int(f[2]);
                if (!nu || !tn || !ws) raise(ErrorCode::usage, "sensitivity grid: bad entry '" + part + "'");
                triples.push_back({*nu, static_cast<std::size_t>(*tn), static_cast<int>(*ws)});
            }
        }
        auto rows = sensitivity_grid(ds->linked.grants, ds->linked, triples, rc.engine);
        write_sensitivity_csv(out_csv, rows);
    });
}

gn_status gn_study(const gn_dataset* ds, const gn_novelty* nt, const gn_config* cfg, const char* study,
                   const char* out_json, const char* out_points_csv) {
    if (!ds || !nt || !study || !out_json) return fail(GN_ERR_INVALID_HANDLE, "gn_study: null argument");
    return guarded([&] {
        RunConfig rc = cfg ? cfg->cfg : RunConfig{};
        const std::vector<CitationEvent>* events = ds->events.empty() ? nullptr : &ds->events;
        StudyOutput out = run_study(study, ds->linked, nt->table, rc, events);
        write_text_file(out_json, out.json + "\n");
        if (out_points_csv && !out.points_csv.empty()) write_text_file(out_points_csv, out.points_csv);
    });
}

gn_status gn_filter(const gn_dataset* ds, const gn_config* cfg, const char* labels_csv, const char* out_dir) {
    if (!ds || !labels_csv || !out_dir) return fail(GN_ERR_INVALID_HANDLE, "gn_filter: null argument");
    return guarded([&] {
        RunConfig rc = cfg ? cfg->cfg : RunConfig{};
        filter_train_apply(ds->linked.grants, labels_csv, out_dir, rc);
    });
}

gn_status gn_filter_interactive(const gn_dataset* ds, const gn_config* cfg, const char* seed_labels_csv,
                                gn_label_fn ask, void* user, const char* out_dir) {
    if (!ds || !seed_labels_csv || !ask || !out_dir) {
        return fail(GN_ERR_INVALID_HANDLE, "gn_filter_interactive: null argument");
    }
    return guarded([&] {
        RunConfig rc = cfg ? cfg->cfg : RunConfig{};
        auto oracle = [&](const GrantRecord& g) -> std::optional<int> {
            const int answer = ask(g.grant_id.c_str(), g.summary.c_str(), user);
            if (answer < 0) return std::nullopt;
            return answer ? 1 : 0;
        };
        filter_train_apply_interactive(ds->linked.grants, seed_labels_csv, oracle, out_dir, rc);
    });
}

gn_status gn_synth(const gn_config* cfg, const char* out_dir) {
    if (!out_dir) return fail(GN_ERR_INVALID_HANDLE, "gn_synth: null argument");
    return guarded([&] {
        RunConfig rc = cfg ? cfg->cfg : RunConfig{};
        synth_to_dir(out_dir, rc.synth);
    });
}

gn_status gn_demo(const gn_config* cfg, const char* out_dir) {
    if (!out_dir) return fail(GN_ERR_INVALID_HANDLE, "gn_demo: null argument");
    return guarded([&] {
        RunConfig rc = cfg ? cfg->cfg : RunConfig{};
        run_demo(out_dir, rc);
    });
}

gn_status gn_file_digest(const char* path, char* buf, size_t buflen) {
    if (!path || !buf) return fail(GN_ERR_INVALID_HANDLE, "gn_file_digest: null argument");
    return guarded([&] { copy_out(file_digest(path), buf, buflen); });
}

} // extern "C"
