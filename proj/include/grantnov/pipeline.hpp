#ifndef GRANTNOV_PIPELINE_HPP
#define GRANTNOV_PIPELINE_HPP

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "grantnov/engine.hpp"
#include "grantnov/filter.hpp"
#include "grantnov/synthkit.hpp"
#include "grantnov/types.hpp"

namespace grantnov {

// flat key=value configuration shared by the library surface and the CLI;
// unknown keys are rejected so typos surface immediately
struct RunConfig {
    EngineConfig engine;
    SynthSpec synth;
    LogRegOptions logreg;
    std::size_t al_rounds = 10;
    std::size_t al_batch = 20;
    std::size_t cv_folds = 3;
    double decile_q = 0.10;
    bool pool_years = false;
    std::string multi_grant_novelty = "max"; // or "mean"
    std::string dedupe_strip_regex;
    std::string events_path;
    std::string program_pair_a;
    std::string program_pair_b;

    void set(const std::string& key, const std::string& value);
    std::string get(const std::string& key) const;
    std::vector<std::pair<std::string, std::string>> snapshot() const;

    static RunConfig from_file(const std::string& path);
};

struct IngestSummary {
    std::size_t grants_loaded = 0;
    std::size_t grants_rejected = 0;
    std::size_t grants_after_dedupe = 0;
    std::size_t pubs_loaded = 0;
    std::size_t pubs_rejected = 0;
    std::size_t orphan_links = 0;
    std::size_t pubs_missing_sjr = 0;
    std::size_t pubs_missing_field = 0;
    std::vector<std::string> written_files;
};

IngestSummary ingest(const std::string& grants_path, const std::string& pubs_path, FileFormat format,
                     const std::string& out_dir, const RunConfig& cfg);

// loads already-clean tables (no path through dedupe/link validation rejects)
LinkedDataset load_linked(const std::string& grants_path, const std::string& pubs_path, FileFormat format,
                          const RunConfig& cfg);
GrantTable load_grants_clean(const std::string& grants_path, FileFormat format, const RunConfig& cfg);

void write_novelty_csv(const std::string& path, const NoveltyTable& table);
NoveltyTable read_novelty_csv(const std::string& path);
void write_skip_csv(const std::string& path, const NoveltyTable& table);
void write_probe_csv(const std::string& path, const std::vector<ProbePoint>& curve);
void write_sensitivity_csv(const std::string& path, const std::vector<SensitivityRow>& rows);

struct StudyOutput {
    std::string json;
    std::string points_csv; // empty when the study has no curve/table output
};

// study: regress | dynamics | programs | prestige | productivity | trend.
// events: preloaded citation events; nullptr falls back to cfg.events_path
StudyOutput run_study(const std::string& study, const LinkedDataset& linked, const NoveltyTable& novelty,
                      const RunConfig& cfg, const std::vector<CitationEvent>* events = nullptr);

struct FilterSummary {
    double cv_mean_auc = 0.0;
    double cv_sd_auc = 0.0;
    std::size_t labeled_total = 0;
    std::size_t rounds_run = 0;
    std::size_t flagged_non_research = 0;
    std::vector<std::string> written_files;
};

FilterSummary filter_train_apply(const GrantTable& grants, const std::string& labels_path, const std::string& out_dir,
                                 const RunConfig& cfg);

// interactive variant: seed labels from file, every other grant queryable
// through the oracle (e.g. a CLI prompt)
using GrantLabelOracle = std::function<std::optional<int>(const GrantRecord&)>;
FilterSummary filter_train_apply_interactive(const GrantTable& grants, const std::string& seed_labels_path,
                                             const GrantLabelOracle& oracle, const std::string& out_dir,
                                             const RunConfig& cfg);

void save_config_file(const std::string& path, const RunConfig& cfg);

std::vector<std::string> synth_to_dir(const std::string& out_dir, const SynthSpec& spec);

struct DemoSummary {
    std::vector<std::string> written_files;
    double novelty_coefficient = 0.0; // from the demo regression, agency of the synth corpus
};

DemoSummary run_demo(const std::string& out_dir, const RunConfig& cfg);

std::string file_digest(const std::string& path); // fnv1a-64 hex of file bytes

} // namespace grantnov

#endif
