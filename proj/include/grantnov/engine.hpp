#ifndef GRANTNOV_ENGINE_HPP
#define GRANTNOV_ENGINE_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "grantnov/detector.hpp"
#include "grantnov/factorize.hpp"
#include "grantnov/textpipe.hpp"
#include "grantnov/types.hpp"

namespace grantnov {

struct EngineConfig {
    int window_years = 2;    // WS
    std::size_t topics = 50; // TN
    double nu = 0.05;
    KernelSpec kernel{KernelKind::rbf, 0.0}; // gamma <= 0 -> data-driven default
    std::size_t min_df = 2;
    double max_df_ratio = 0.95;
    bool l2_normalize = true;
    std::uint64_t seed = 0;
    int year_start = 0; // 0 -> derived from data
    int year_end = 0;
    std::vector<std::string> agencies; // empty -> every agency present
    std::size_t min_history = 100;     // past grants required to score a year
    NmfOptions nmf{200, 1e-4};
    NmfOptions nmf_project{200, 1e-7};
    OcSvmOptions svm{};
    std::size_t jobs = 1;
    double clone_noise_sigma = 0.0; // 0 -> 0.1 * mean nonzero probe count
};

struct NoveltyRow {
    std::string grant_id;
    std::string agency;
    std::string program;
    std::string division;
    int year = 0;
    double raw_distance = 0.0;
    double novelty_score = 0.0;
};

struct SkippedYear {
    std::string agency;
    int year = 0;
    std::string reason;
};

struct NoveltyTable {
    std::vector<NoveltyRow> rows;
    double raw_min = 0.0;
    double raw_max = 0.0;
    bool degenerate = false; // all raw distances equal -> all scores zero
    std::vector<SkippedYear> skipped;
};

// raw distances for one agency-year; empty result with skipped=true when the
// past window is too thin
struct YearScore {
    bool skipped = false;
    std::string skip_reason;
    std::vector<std::pair<std::size_t, double>> raw; // (index into grants, raw distance)
};

YearScore score_year(const GrantTable& grants, const std::string& agency, int year, const EngineConfig& cfg);

NoveltyTable score_all(const GrantTable& grants, const EngineConfig& cfg);

struct ProbePoint {
    double fraction = 0.0;
    double raw_distance = 0.0;
    double score = 0.0;
};

std::vector<ProbePoint> clone_probe(const GrantTable& grants, const std::string& probe_id,
                                    const std::vector<double>& clone_fractions, double noise_sigma,
                                    const EngineConfig& cfg);

struct SensitivityRow {
    double nu = 0.0;
    std::size_t topics = 0;
    int window_years = 0;
    std::string agency;
    double novelty_coefficient = 0.0;
    double p_value = 1.0;
    std::string note; // populated when the regression could not run
};

struct SensitivityTriple {
    double nu;
    std::size_t topics;
    int window_years;
};

// the five-row grid reported in the sensitivity table
std::vector<SensitivityTriple> default_sensitivity_grid();

std::vector<SensitivityRow> sensitivity_grid(const GrantTable& grants, const LinkedDataset& linked,
                                             const std::vector<SensitivityTriple>& grid, const EngineConfig& cfg);

} // namespace grantnov

#endif
