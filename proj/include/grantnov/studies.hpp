#ifndef GRANTNOV_STUDIES_HPP
#define GRANTNOV_STUDIES_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "grantnov/engine.hpp"
#include "grantnov/stats.hpp"
#include "grantnov/types.hpp"

namespace grantnov {

struct DecileOptions {
    double q = 0.10;
    bool pool_years = false; // novelty groups per division pooled over years
};

struct DecileFlags {
    double q = 0.10;
    std::map<std::string, bool> grant_top_novel; // grant_id -> flag (scored grants only)
    std::vector<char> pub_top_cited;             // aligned with LinkedDataset.publications
    std::vector<char> pub_top_sjr;
    std::vector<char> pub_cited_eligible; // field present
    std::vector<char> pub_sjr_eligible;   // field and sjr present
    std::vector<std::string> warnings;
};

DecileFlags flag_deciles(const LinkedDataset& linked, const NoveltyTable& novelty, const DecileOptions& opts = {});

struct DynamicsPoint {
    int horizon = 0;
    double p_novel = 0.0;
    double sem_novel = 0.0;
    std::size_t n_novel = 0;
    double p_other = 0.0;
    double sem_other = 0.0;
    std::size_t n_other = 0;
};

struct DynamicsResult {
    std::vector<DynamicsPoint> curve;
    std::optional<TestResult> ttest; // paired across horizons
    bool cumulative_only = false;    // no event table: single-horizon fallback
    std::string to_json() const;
};

DynamicsResult citation_dynamics(const LinkedDataset& linked, const DecileFlags& flags,
                                 const std::vector<int>& horizons, const std::vector<CitationEvent>& events,
                                 double q = 0.10);

enum class MultiGrantNovelty { max, mean };

struct Table1Result {
    std::map<std::string, RegressionResult> per_agency;
    std::map<std::string, std::vector<double>> design_means;  // column means, for the marginal curve
    std::map<std::string, std::string> skipped_agencies;      // agency -> reason
    std::map<std::string, std::size_t> excluded_pubs;         // agency -> count lacking sjr/score
    std::string to_json() const;
};

Table1Result table1_regression(const LinkedDataset& linked, const NoveltyTable& novelty,
                               MultiGrantNovelty mode = MultiGrantNovelty::max);

struct MarginalPoint {
    double novelty = 0.0;
    double prediction = 0.0;
    double std_error = 0.0;
};

std::vector<MarginalPoint> marginal_effect_curve(const RegressionResult& result, const std::vector<double>& grid,
                                                 const std::vector<double>& covariate_means);

struct ProgramRow {
    std::string program;
    std::size_t n_grants = 0;
    std::size_t n_pubs = 0;
    double p_top_novel = 0.0;
    double sem_top_novel = 0.0;
    double p_top_cited = 0.0;
    double sem_top_cited = 0.0;
};

struct ProgramComparison {
    std::vector<ProgramRow> rows;
    std::vector<std::string> excluded; // programs with < 2 grants
    std::optional<TestResult> cross_program_pearson;
    std::string pearson_note; // set when the test could not run
    std::string pair_a, pair_b;
    std::optional<TestResult> pair_novelty_ttest; // top-novel share, pair_a vs pair_b
    std::optional<TestResult> pair_citation_ttest;
    std::string to_json() const;
};

ProgramComparison program_comparison(const LinkedDataset& linked, const NoveltyTable& novelty,
                                     const DecileFlags& flags, const std::string& pair_a = "",
                                     const std::string& pair_b = "");

struct PrestigeCell {
    std::string division; // "agency/division"
    double novel_share = 0.0;
    double other_share = 0.0;
    std::size_t n_novel_pubs = 0;
    std::size_t n_other_pubs = 0;
};

struct PrestigeComparison {
    std::vector<PrestigeCell> cells;
    double mean_difference = 0.0;
    std::optional<TestResult> ttest; // paired across divisions
    std::size_t excluded_divisions = 0;
    std::string to_json() const;
};

PrestigeComparison prestige_comparison(const LinkedDataset& linked, const DecileFlags& flags);

struct ProductivityCell {
    std::string key; // "agency/division/length"
    double novel_mean_pubs = 0.0;
    double other_mean_pubs = 0.0;
    std::size_t n_novel = 0;
    std::size_t n_other = 0;
};

struct ProductivityComparison {
    std::vector<ProductivityCell> cells;
    double mean_difference = 0.0;
    std::optional<TestResult> ttest;
    std::size_t excluded_cells = 0;
    std::string to_json() const;
};

ProductivityComparison productivity_comparison(const LinkedDataset& linked, const DecileFlags& flags);

struct TrendResult {
    std::map<std::string, TestResult> per_agency;
    std::map<std::string, std::string> errors; // agency -> reason (constant input etc.)
    std::string to_json() const;
};

TrendResult novelty_trend(const NoveltyTable& novelty);

} // namespace grantnov

#endif
