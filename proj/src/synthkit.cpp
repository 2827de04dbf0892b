#include "grantnov/synthkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "grantnov/csv.hpp"
#include "grantnov/error.hpp"
#include "grantnov/rng.hpp"

namespace grantnov {

namespace {

std::string tag(const char* prefix, std::size_t n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%03zu", prefix, n);
    return buf;
}

} // namespace

void SynthSpec::validate() const {
    if (n_years < 1) raise(ErrorCode::validation, "synth: n_years must be >= 1");
    if (grants_per_year < 1) raise(ErrorCode::validation, "synth: grants_per_year must be >= 1");
    if (novel_fraction < 0 || novel_fraction >= 1) raise(ErrorCode::validation, "synth: novel_fraction must lie in [0, 1)");
    if (vocab_per_topic < 10) raise(ErrorCode::validation, "synth: vocab_per_topic must be >= 10");
    if (topic_count < 1) raise(ErrorCode::validation, "synth: topic_count must be >= 1");
    if (!std::isfinite(citation_effect)) raise(ErrorCode::validation, "synth: citation_effect must be finite");
    if (programs.empty()) raise(ErrorCode::validation, "synth: at least one program required");
    for (const auto& p : programs) {
        if (p.weight < 0) raise(ErrorCode::validation, "synth: program weight must be >= 0");
    }
}

SynthData generate(const SynthSpec& spec) {
    spec.validate();
    SynthData data;

    double weight_total = 0.0;
    for (const auto& p : spec.programs) weight_total += p.weight;
    if (weight_total <= 0) raise(ErrorCode::validation, "synth: program weights sum to zero");

    for (int yi = 0; yi < spec.n_years; ++yi) {
        const int year = spec.start_year + yi;
        Rng rng(derive_seed(spec.seed, "synth-year", static_cast<std::uint64_t>(year)));

        const std::size_t n = spec.grants_per_year;
        std::vector<std::size_t> program_of(n);
        for (std::size_t i = 0; i < n; ++i) {
            double u = rng.uniform() * weight_total;
            std::size_t pick = spec.programs.size() - 1;
            for (std::size_t p = 0; p < spec.programs.size(); ++p) {
                if (u < spec.programs[p].weight) {
                    pick = p;
                    break;
                }
                u -= spec.programs[p].weight;
            }
            program_of[i] = pick;
        }

        // exact planted count, distributed by program-offset weights
        const std::size_t n_novel = static_cast<std::size_t>(std::llround(spec.novel_fraction * static_cast<double>(n)));
        std::vector<char> planted(n, 0);
        {
            std::vector<double> weight(n);
            for (std::size_t i = 0; i < n; ++i) {
                weight[i] = std::clamp(spec.novel_fraction + spec.programs[program_of[i]].novelty_offset, 1e-3, 0.95);
            }
            std::vector<std::size_t> pool(n);
            for (std::size_t i = 0; i < n; ++i) pool[i] = i;
            for (std::size_t pick = 0; pick < n_novel && !pool.empty(); ++pick) {
                double total = 0.0;
                for (std::size_t i : pool) total += weight[i];
                double u = rng.uniform() * total;
                std::size_t chosen = pool.size() - 1;
                for (std::size_t j = 0; j < pool.size(); ++j) {
                    if (u < weight[pool[j]]) {
                        chosen = j;
                        break;
                    }
                    u -= weight[pool[j]];
                }
                planted[pool[chosen]] = 1;
                pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(chosen));
            }
        }

        for (std::size_t i = 0; i < n; ++i) {
            GrantRecord g;
            char idbuf[64];
            std::snprintf(idbuf, sizeof idbuf, "%s-%d-%04zu", spec.agency.c_str(), year, i);
            g.grant_id = idbuf;
            g.agency = spec.agency;
            g.program = spec.programs[program_of[i]].label;
            g.division = tag("DIV", i % std::max<std::size_t>(1, spec.divisions));
            g.fiscal_year = year;
            g.start_year = year;
            g.end_year = year + 2 + static_cast<int>(rng.below(3));
            g.award_amount = rng.uniform(0.05, 2.5);
            const std::size_t n_pis = 1 + rng.below(3);
            for (std::size_t p = 0; p < n_pis; ++p) {
                char pibuf[32];
                std::snprintf(pibuf, sizeof pibuf, "PI%05llu",
                              static_cast<unsigned long long>(rng.below(spec.pi_pool)));
                g.pi_ids.push_back(pibuf);
            }
            // drop duplicate PI draws inside one grant
            std::sort(g.pi_ids.begin(), g.pi_ids.end());
            g.pi_ids.erase(std::unique(g.pi_ids.begin(), g.pi_ids.end()), g.pi_ids.end());

            const std::size_t primary = rng.below(spec.topic_count);
            const std::size_t secondary = rng.below(spec.topic_count);
            const std::size_t length =
                std::max<std::size_t>(20, static_cast<std::size_t>(static_cast<double>(spec.tokens_per_doc) *
                                                                   rng.uniform(0.8, 1.2)));

            // planted docs draw most tokens from a doc-specific window of the
            // held-out block; incumbents never touch that block
            const std::size_t block_offset = rng.below(spec.novel_block_size);
            const std::size_t block_span = 15 + rng.below(25);

            std::string summary;
            for (std::size_t t = 0; t < length; ++t) {
                std::string token;
                const double u = rng.uniform();
                if (planted[i] && u < 0.65) {
                    const std::size_t j =
                        (block_offset + static_cast<std::size_t>(std::floor(static_cast<double>(block_span) *
                                                                            rng.uniform() * rng.uniform()))) %
                        spec.novel_block_size;
                    token = tag("nvw", j);
                } else if (u < 0.80) {
                    const std::size_t topic = (rng.uniform() < 0.7) ? primary : secondary;
                    const double z = rng.uniform();
                    const std::size_t j = static_cast<std::size_t>(std::floor(static_cast<double>(spec.vocab_per_topic) * z * z));
                    token = "t" + std::to_string(topic) + tag("w", std::min(j, spec.vocab_per_topic - 1));
                } else {
                    token = tag("common", rng.below(30));
                }
                if (!summary.empty()) summary += ' ';
                summary += token;
            }
            g.summary = summary;
            data.grants.push_back(g);
            data.truth.emplace_back(g.grant_id, planted[i] != 0);

            // publications
            const std::size_t max_pubs = static_cast<std::size_t>(2.0 * spec.pubs_per_grant_mean) + 1;
            const std::size_t n_pubs = rng.below(max_pubs);
            for (std::size_t pj = 0; pj < n_pubs; ++pj) {
                PublicationRecord pub;
                pub.pub_id = "P-" + g.grant_id + "-" + std::to_string(pj);
                pub.grant_ids.push_back(g.grant_id);
                pub.pub_year = year + 1 + static_cast<int>(rng.below(2));
                const std::size_t tier = rng.below(5);
                pub.field = tag("F", primary);
                pub.journal = "J-" + pub.field + "-T" + std::to_string(tier);
                pub.sjr = 0.4 + 0.7 * static_cast<double>(tier);
                const double noise = std::fabs(rng.normal(0.0, spec.citation_noise));
                const double base = spec.citation_baseline + (planted[i] ? spec.citation_effect : 0.0);
                pub.citations = std::llround(std::max(0.0, base + noise));

                // spread the total over years since publication, geometric decay
                long long remaining = pub.citations;
                double share = 0.35;
                for (int h = 0; h < 9 && remaining > 0; ++h) {
                    long long portion = (h == 8) ? remaining
                                                 : std::llround(share * static_cast<double>(pub.citations));
                    portion = std::min(portion, remaining);
                    if (portion > 0) data.events.push_back({pub.pub_id, pub.pub_year + h, portion});
                    remaining -= portion;
                    share *= 0.6;
                }
                data.publications.push_back(std::move(pub));
            }
        }
    }
    return data;
}

void regenerate_citations(PublicationTable& pubs, const std::map<std::string, double>& grant_score, double baseline,
                          double effect, double noise_sigma, std::uint64_t seed) {
    Rng rng(derive_seed(seed, "regen-citations"));
    for (auto& pub : pubs) {
        double best = -1.0;
        for (const auto& gid : pub.grant_ids) {
            auto it = grant_score.find(gid);
            if (it != grant_score.end() && it->second > best) best = it->second;
        }
        const double noise = rng.normal(0.0, noise_sigma);
        if (best < 0) continue; // unscored grants keep their citations
        pub.citations = std::llround(std::max(0.0, baseline + effect * best + noise));
    }
}

void write_truth_csv(const std::string& path, const std::vector<std::pair<std::string, bool>>& truth) {
    CsvWriter w(path);
    w.write_row({"GRANT_ID", "IS_PLANTED_NOVEL"});
    for (const auto& [gid, novel] : truth) {
        w.write_row({gid, novel ? "1" : "0"});
    }
}

void write_events_csv(const std::string& path, const std::vector<CitationEvent>& events) {
    CsvWriter w(path);
    w.write_row({"PUB_ID", "YEAR", "CITATIONS"});
    for (const auto& e : events) {
        w.write_row({e.pub_id, std::to_string(e.year), std::to_string(e.citations)});
    }
}

} // namespace grantnov
