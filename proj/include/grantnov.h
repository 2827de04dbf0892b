#ifndef GRANTNOV_H
#define GRANTNOV_H

/* grantnov: grant-novelty scoring and impact-analysis library.
 *
 * C API over the C++ core. All functions return gn_status; on failure the
 * thread-local message from gn_last_error() describes what went wrong.
 * Handles are opaque and must be released with the matching _free call.
 */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gn_status {
    GN_OK = 0,
    GN_ERR_USAGE = 1,      /* bad arguments, unknown keys */
    GN_ERR_IO = 2,         /* missing or unwritable files */
    GN_ERR_PARSE = 3,      /* malformed input files */
    GN_ERR_VALIDATION = 4, /* contract violations in data or parameters */
    GN_ERR_DIMENSION = 5,
    GN_ERR_NUMERIC = 6, /* numerical failure / non-convergence */
    GN_ERR_DEGENERATE = 7,
    GN_ERR_INVALID_HANDLE = 8,
    GN_ERR_UNKNOWN = 99
} gn_status;

typedef struct gn_config gn_config;   /* key=value run configuration */
typedef struct gn_dataset gn_dataset; /* deduplicated, linked grants + publications */
typedef struct gn_novelty gn_novelty; /* per-grant raw distances and scaled scores */

const char* gn_version(void);
const char* gn_last_error(void);

/* ---- configuration ---------------------------------------------------- */

gn_status gn_config_create(gn_config** out);
gn_status gn_config_load(const char* path, gn_config** out);
gn_status gn_config_set(gn_config* cfg, const char* key, const char* value);
/* writes the value into buf (NUL-terminated, truncated to buflen) */
gn_status gn_config_get(const gn_config* cfg, const char* key, char* buf, size_t buflen);
/* write the effective configuration as a key = value file */
gn_status gn_config_save(const gn_config* cfg, const char* path);
void gn_config_free(gn_config* cfg);

/* ---- corpus ------------------------------------------------------------ */

typedef struct gn_dataset_stats {
    size_t grants;
    size_t publications;
    size_t orphan_links;
    size_t pubs_missing_sjr;
    size_t pubs_missing_field;
} gn_dataset_stats;

/* format is "csv" or "jsonl"; pubs_path may be NULL for a grants-only set.
 * Loading validates rows, keeps the earliest duplicate, and links grants to
 * publications. Rejected rows are available via gn_dataset_write_clean. */
gn_status gn_dataset_load(const char* grants_path, const char* pubs_path, const char* format, const gn_config* cfg,
                          gn_dataset** out);
gn_status gn_dataset_stats_get(const gn_dataset* ds, gn_dataset_stats* out);
/* attach a per-year citation event table (PUB_ID,YEAR,CITATIONS) */
gn_status gn_dataset_load_events(gn_dataset* ds, const char* path);
void gn_dataset_free(gn_dataset* ds);

/* load + dedupe + link + write cleaned tables, rejects and a link report */
gn_status gn_ingest(const char* grants_path, const char* pubs_path, const char* format, const char* out_dir,
                    const gn_config* cfg);

/* ---- novelty scoring --------------------------------------------------- */

gn_status gn_score(const gn_dataset* ds, const gn_config* cfg, gn_novelty** out);
gn_status gn_novelty_save_csv(const gn_novelty* nt, const char* path);
gn_status gn_novelty_save_skips_csv(const gn_novelty* nt, const char* path);
gn_status gn_novelty_load_csv(const char* path, gn_novelty** out);
gn_status gn_novelty_count(const gn_novelty* nt, size_t* out);

typedef struct gn_novelty_row {
    const char* grant_id; /* owned by the handle, valid until it is freed */
    const char* agency;
    const char* program;
    const char* division;
    int year;
    double raw_distance;
    double novelty_score;
} gn_novelty_row;

gn_status gn_novelty_get(const gn_novelty* nt, size_t index, gn_novelty_row* out);
void gn_novelty_free(gn_novelty* nt);

/* clone-probe robustness curve; fractions in [0,1). noise_sigma <= 0 picks
 * the default (0.1 * mean nonzero term count of the probe) */
gn_status gn_clone_probe(const gn_dataset* ds, const gn_config* cfg, const char* probe_id, const double* fractions,
                         size_t n_fractions, double noise_sigma, const char* out_csv);

/* grid is "nu:topics:window;..." or NULL for the built-in five-row grid */
gn_status gn_sensitivity(const gn_dataset* ds, const gn_config* cfg, const char* grid, const char* out_csv);

/* ---- studies ------------------------------------------------------------ */

/* study: regress | dynamics | programs | prestige | productivity | trend.
 * out_points_csv may be NULL; studies without point tables ignore it. */
gn_status gn_study(const gn_dataset* ds, const gn_novelty* nt, const gn_config* cfg, const char* study,
                   const char* out_json, const char* out_points_csv);

/* ---- non-research filter ------------------------------------------------ */

/* labels_csv: GRANT_ID,LABEL,PROVENANCE with label 1 = non-research and
 * provenance "seed" rows as the initial training set */
gn_status gn_filter(const gn_dataset* ds, const gn_config* cfg, const char* labels_csv, const char* out_dir);

/* interactive oracle: return 0 or 1 for the shown grant, negative to abort.
 * Every row of seed_labels_csv seeds the training set; the rest of the
 * corpus is the query pool. */
typedef int (*gn_label_fn)(const char* grant_id, const char* summary, void* user);
gn_status gn_filter_interactive(const gn_dataset* ds, const gn_config* cfg, const char* seed_labels_csv,
                                gn_label_fn ask, void* user, const char* out_dir);

/* ---- synthetic data and demo -------------------------------------------- */

gn_status gn_synth(const gn_config* cfg, const char* out_dir);
gn_status gn_demo(const gn_config* cfg, const char* out_dir);

/* fnv1a-64 digest of a file, hex into buf */
gn_status gn_file_digest(const char* path, char* buf, size_t buflen);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* GRANTNOV_H */
