#ifndef GRANTNOV_SYNTHKIT_HPP
#define GRANTNOV_SYNTHKIT_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "grantnov/types.hpp"

namespace grantnov {

struct SynthProgram {
    std::string label;
    double weight = 1.0;         // share of grants drawn into this program
    double novelty_offset = 0.0; // shifts this program's planted-novel rate
};

struct SynthSpec {
    std::uint64_t seed = 1;
    std::string agency = "NSF";
    int start_year = 2010;
    int n_years = 3;
    std::size_t grants_per_year = 200;
    std::size_t topic_count = 8;
    std::size_t vocab_per_topic = 40; // >= 10
    std::size_t novel_block_size = 400;
    double novel_fraction = 0.10; // exact planted count per year
    std::size_t divisions = 1;
    std::size_t tokens_per_doc = 90;
    std::size_t pi_pool = 4000;
    double pubs_per_grant_mean = 2.0;
    double citation_baseline = 10.0;
    double citation_effect = 10.0; // added for planted-novel grants
    double citation_noise = 4.0;   // half-normal sigma
    std::vector<SynthProgram> programs{{"STD", 0.7, 0.0}, {"EXP", 0.3, 0.0}};

    void validate() const;
};

struct SynthData {
    GrantTable grants;
    PublicationTable publications;
    std::vector<CitationEvent> events;
    std::vector<std::pair<std::string, bool>> truth; // (grant_id, is_planted_novel), grant order
};

SynthData generate(const SynthSpec& spec);

// rebuild citations as baseline + effect * score(grant) + N(0, sigma),
// clamped at zero and rounded; used to plant a known regression coefficient
void regenerate_citations(PublicationTable& pubs, const std::map<std::string, double>& grant_score, double baseline,
                          double effect, double noise_sigma, std::uint64_t seed);

void write_truth_csv(const std::string& path, const std::vector<std::pair<std::string, bool>>& truth);
void write_events_csv(const std::string& path, const std::vector<CitationEvent>& events);

} // namespace grantnov

#endif
