#include "grantnov/studies.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

#include <json.hpp>

#include "grantnov/error.hpp"

namespace grantnov {

namespace {

using Item = std::pair<std::size_t, double>; // (caller index, value)

// top-q flags within one group: values at or above the ceil(q*n)-th largest
// are flagged with ties included; groups smaller than ceil(1/q) flag the
// maximum only
void flag_group(const std::vector<Item>& items, double q, std::vector<char>& out,
                std::vector<std::string>* warnings, const std::string& label) {
    const std::size_t n = items.size();
    if (n == 0) return;
    double threshold;
    if (n < static_cast<std::size_t>(std::ceil(1.0 / q))) {
        threshold = std::max_element(items.begin(), items.end(), [](const Item& a, const Item& b) {
                        return a.second < b.second;
                    })->second;
    } else {
        std::vector<double> values;
        values.reserve(n);
        for (const auto& it : items) values.push_back(it.second);
        const std::size_t m = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
        std::nth_element(values.begin(), values.begin() + (m - 1), values.end(), std::greater<double>());
        threshold = values[m - 1];
    }
    std::size_t flagged = 0;
    for (const auto& [idx, value] : items) {
        if (value >= threshold) {
            out[idx] = 1;
            ++flagged;
        }
    }
    if (warnings && flagged == n && n > 1) {
        warnings->push_back("group " + label + ": every member tied at the decile threshold");
    }
}

double share_sem(double p, std::size_t n) {
    if (n == 0) return 0.0;
    return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

nlohmann::json test_to_json(const std::optional<TestResult>& t) {
    if (!t) return nullptr;
    return {{"statistic", t->statistic}, {"df", t->df}, {"p_value", t->p_value}};
}

} // namespace

DecileFlags flag_deciles(const LinkedDataset& linked, const NoveltyTable& novelty, const DecileOptions& opts) {
    DecileFlags flags;
    flags.q = opts.q;

    // novelty: grouped per agency/division(/year)
    std::map<std::string, std::vector<std::pair<std::string, double>>> novel_groups;
    for (const auto& row : novelty.rows) {
        std::string key = row.agency + "/" + row.division;
        if (!opts.pool_years) key += "/" + std::to_string(row.year);
        novel_groups[key].emplace_back(row.grant_id, row.novelty_score);
    }
    for (const auto& [key, members] : novel_groups) {
        std::vector<Item> items;
        std::vector<char> flagged(members.size(), 0);
        for (std::size_t i = 0; i < members.size(); ++i) items.emplace_back(i, members[i].second);
        flag_group(items, opts.q, flagged, &flags.warnings, "novelty " + key);
        for (std::size_t i = 0; i < members.size(); ++i) {
            flags.grant_top_novel[members[i].first] = flagged[i] != 0;
        }
    }

    const std::size_t n_pubs = linked.publications.size();
    flags.pub_top_cited.assign(n_pubs, 0);
    flags.pub_top_sjr.assign(n_pubs, 0);
    flags.pub_cited_eligible.assign(n_pubs, 0);
    flags.pub_sjr_eligible.assign(n_pubs, 0);

    std::map<std::string, std::vector<Item>> cited_groups;
    std::map<std::string, std::vector<Item>> sjr_groups;
    for (std::size_t p = 0; p < n_pubs; ++p) {
        const auto& pub = linked.publications[p];
        if (pub.field.empty()) continue; // excluded from field-grouped analyses
        const std::string key = pub.field + "/" + std::to_string(pub.pub_year);
        flags.pub_cited_eligible[p] = 1;
        cited_groups[key].emplace_back(p, static_cast<double>(pub.citations));
        if (pub.sjr) {
            flags.pub_sjr_eligible[p] = 1;
            sjr_groups[key].emplace_back(p, *pub.sjr);
        }
    }
    for (const auto& [key, items] : cited_groups) {
        flag_group(items, opts.q, flags.pub_top_cited, &flags.warnings, "citations " + key);
    }
    for (const auto& [key, items] : sjr_groups) {
        flag_group(items, opts.q, flags.pub_top_sjr, &flags.warnings, "sjr " + key);
    }
    return flags;
}

namespace {

// a publication sits in the novel group when any of its scored grants is
// top-novel; publications with no scored grant are excluded (flag < 0)
std::vector<int> pub_novel_membership(const LinkedDataset& linked, const DecileFlags& flags) {
    std::vector<int> member(linked.publications.size(), -1);
    for (std::size_t p = 0; p < linked.publications.size(); ++p) {
        for (const auto& gid : linked.publications[p].grant_ids) {
            auto it = flags.grant_top_novel.find(gid);
            if (it == flags.grant_top_novel.end()) continue;
            if (member[p] < 0) member[p] = 0;
            if (it->second) member[p] = 1;
        }
    }
    return member;
}

} // namespace

DynamicsResult citation_dynamics(const LinkedDataset& linked, const DecileFlags& flags,
                                 const std::vector<int>& horizons, const std::vector<CitationEvent>& events,
                                 double q) {
    DynamicsResult result;
    const std::vector<int> member = pub_novel_membership(linked, flags);

    // per-pub cumulative citations at pub_year + h
    std::map<std::string, std::map<int, long long>> by_pub;
    for (const auto& e : events) by_pub[e.pub_id][e.year] += e.citations;

    auto point_at = [&](int horizon, bool use_total) {
        DynamicsPoint pt;
        pt.horizon = horizon;
        // flag top-cited at this horizon within (field, pub_year)
        std::vector<char> top(linked.publications.size(), 0);
        std::map<std::string, std::vector<Item>> groups;
        std::vector<double> value(linked.publications.size(), 0.0);
        for (std::size_t p = 0; p < linked.publications.size(); ++p) {
            const auto& pub = linked.publications[p];
            if (!flags.pub_cited_eligible[p] || member[p] < 0) continue;
            double v;
            if (use_total) {
                v = static_cast<double>(pub.citations);
            } else {
                long long cum = 0;
                auto it = by_pub.find(pub.pub_id);
                if (it != by_pub.end()) {
                    for (const auto& [year, c] : it->second) {
                        if (year <= pub.pub_year + horizon) cum += c;
                    }
                }
                v = static_cast<double>(cum);
            }
            value[p] = v;
            groups[pub.field + "/" + std::to_string(pub.pub_year)].emplace_back(p, v);
        }
        for (const auto& [key, items] : groups) flag_group(items, q, top, nullptr, key);

        std::size_t novel_hits = 0, other_hits = 0;
        for (std::size_t p = 0; p < linked.publications.size(); ++p) {
            if (!flags.pub_cited_eligible[p] || member[p] < 0) continue;
            if (member[p] == 1) {
                ++pt.n_novel;
                if (top[p]) ++novel_hits;
            } else {
                ++pt.n_other;
                if (top[p]) ++other_hits;
            }
        }
        if (pt.n_novel) pt.p_novel = static_cast<double>(novel_hits) / static_cast<double>(pt.n_novel);
        if (pt.n_other) pt.p_other = static_cast<double>(other_hits) / static_cast<double>(pt.n_other);
        pt.sem_novel = share_sem(pt.p_novel, pt.n_novel);
        pt.sem_other = share_sem(pt.p_other, pt.n_other);
        return pt;
    };

    if (events.empty()) {
        result.cumulative_only = true;
        result.curve.push_back(point_at(-1, true));
        return result;
    }

    std::vector<double> novel_shares, other_shares;
    for (int h : horizons) {
        DynamicsPoint pt = point_at(h, false);
        novel_shares.push_back(pt.p_novel);
        other_shares.push_back(pt.p_other);
        result.curve.push_back(pt);
    }
    if (novel_shares.size() >= 2) {
        try {
            result.ttest = paired_ttest(novel_shares, other_shares);
        } catch (const Error&) {
            // zero-variance differences: leave the test unset
        }
    }
    return result;
}

std::string DynamicsResult::to_json() const {
    nlohmann::json j;
    j["cumulative_only"] = cumulative_only;
    j["curve"] = nlohmann::json::array();
    for (const auto& pt : curve) {
        j["curve"].push_back({{"horizon", pt.horizon},
                              {"p_top_cited_novel", pt.p_novel},
                              {"sem_novel", pt.sem_novel},
                              {"n_novel", pt.n_novel},
                              {"p_top_cited_other", pt.p_other},
                              {"sem_other", pt.sem_other},
                              {"n_other", pt.n_other}});
    }
    j["paired_ttest"] = test_to_json(ttest);
    return j.dump(2);
}

namespace {

const std::vector<std::string> kTable1Names = {
    "Intercept",  "Novelty", "Years of Publication After 2010", "PI Experience",
    "SJR",        "Award Amount (in millions of dollars)",      "Number of PIs"};

} // namespace

Table1Result table1_regression(const LinkedDataset& linked, const NoveltyTable& novelty, MultiGrantNovelty mode) {
    Table1Result out;

    std::map<std::string, double> score_of;
    for (const auto& row : novelty.rows) score_of[row.grant_id] = row.novelty_score;

    std::map<std::string, const GrantRecord*> grant_of;
    for (const auto& g : linked.grants) grant_of[g.grant_id] = &g;

    // PI experience: first fiscal year each PI appears anywhere in the corpus
    std::map<std::string, int> pi_first_year;
    for (const auto& g : linked.grants) {
        for (const auto& pi : g.pi_ids) {
            auto it = pi_first_year.find(pi);
            if (it == pi_first_year.end() || g.fiscal_year < it->second) pi_first_year[pi] = g.fiscal_year;
        }
    }
    auto experienced = [&](const GrantRecord& g) {
        for (const auto& pi : g.pi_ids) {
            auto it = pi_first_year.find(pi);
            if (it != pi_first_year.end() && it->second < g.fiscal_year) return 1.0;
        }
        return 0.0;
    };

    std::set<std::string> agencies;
    for (const auto& row : novelty.rows) agencies.insert(row.agency);

    for (const auto& agency : agencies) {
        std::vector<double> y;
        std::vector<std::array<double, 7>> xs;
        std::size_t excluded = 0;
        for (const auto& pub : linked.publications) {
            // pick the scored grant for this agency; max-novelty grant carries
            // the grant-level covariates, mean mode averages the score only
            const GrantRecord* chosen = nullptr;
            double best = -1.0;
            double score_sum = 0.0;
            std::size_t score_n = 0;
            for (const auto& gid : pub.grant_ids) {
                auto s = score_of.find(gid);
                auto g = grant_of.find(gid);
                if (s == score_of.end() || g == grant_of.end()) continue;
                if (g->second->agency != agency) continue;
                score_sum += s->second;
                ++score_n;
                if (s->second > best) {
                    best = s->second;
                    chosen = g->second;
                }
            }
            if (!chosen) continue;
            if (!pub.sjr) {
                ++excluded;
                continue;
            }
            const double novelty_value = (mode == MultiGrantNovelty::max) ? best : score_sum / static_cast<double>(score_n);
            y.push_back(static_cast<double>(pub.citations));
            xs.push_back({1.0, novelty_value, static_cast<double>(pub.pub_year - 2010), experienced(*chosen), *pub.sjr,
                          chosen->award_amount, static_cast<double>(chosen->pi_ids.size())});
        }
        out.excluded_pubs[agency] = excluded;
        if (y.size() <= kTable1Names.size()) {
            out.skipped_agencies[agency] =
                "too few linked publications with novelty and SJR (" + std::to_string(y.size()) + ")";
            continue;
        }
        DenseMatrix design(y.size(), kTable1Names.size());
        for (std::size_t r = 0; r < xs.size(); ++r) {
            for (std::size_t c = 0; c < kTable1Names.size(); ++c) design.at(r, c) = xs[r][c];
        }
        std::vector<double> means(kTable1Names.size(), 0.0);
        for (std::size_t c = 0; c < kTable1Names.size(); ++c) {
            double s = 0.0;
            for (std::size_t r = 0; r < xs.size(); ++r) s += design.at(r, c);
            means[c] = s / static_cast<double>(xs.size());
        }
        out.per_agency.emplace(agency, ols_fit(y, design, kTable1Names));
        out.design_means.emplace(agency, std::move(means));
    }
    return out;
}

std::string Table1Result::to_json() const {
    nlohmann::json j;
    for (const auto& [agency, reg] : per_agency) {
        j["regressions"][agency] = nlohmann::json::parse(reg.to_json());
    }
    for (const auto& [agency, reason] : skipped_agencies) j["skipped"][agency] = reason;
    for (const auto& [agency, n] : excluded_pubs) j["excluded_publications"][agency] = n;
    if (j.find("regressions") == j.end()) j["regressions"] = nlohmann::json::object();
    return j.dump(2);
}

std::vector<MarginalPoint> marginal_effect_curve(const RegressionResult& result, const std::vector<double>& grid,
                                                 const std::vector<double>& covariate_means) {
    const std::size_t k = result.names.size();
    if (covariate_means.size() != k) raise(ErrorCode::dimension, "marginal_effect_curve: means length mismatch");
    const auto it = std::find(result.names.begin(), result.names.end(), "Novelty");
    if (it == result.names.end()) raise(ErrorCode::validation, "marginal_effect_curve: no Novelty coefficient");
    const std::size_t nov = static_cast<std::size_t>(it - result.names.begin());

    std::vector<MarginalPoint> curve;
    std::vector<double> x = covariate_means;
    x[0] = 1.0;
    for (double g : grid) {
        x[nov] = g;
        double pred = 0.0;
        for (std::size_t c = 0; c < k; ++c) pred += x[c] * result.estimates[c];
        double var = 0.0;
        for (std::size_t a = 0; a < k; ++a) {
            for (std::size_t b = 0; b < k; ++b) var += x[a] * result.coef_covariance.at(a, b) * x[b];
        }
        curve.push_back({g, pred, var > 0 ? std::sqrt(var) : 0.0});
    }
    return curve;
}

ProgramComparison program_comparison(const LinkedDataset& linked, const NoveltyTable& novelty,
                                     const DecileFlags& flags, const std::string& pair_a, const std::string& pair_b) {
    ProgramComparison out;

    std::map<std::string, std::string> program_of; // grant_id -> program
    for (const auto& row : novelty.rows) program_of[row.grant_id] = row.program;

    struct Bucket {
        std::vector<double> grant_novel;
        std::vector<double> pub_cited;
    };
    std::map<std::string, Bucket> buckets;
    for (const auto& [gid, flag] : flags.grant_top_novel) {
        auto it = program_of.find(gid);
        if (it == program_of.end()) continue;
        buckets[it->second].grant_novel.push_back(flag ? 1.0 : 0.0);
    }
    for (std::size_t p = 0; p < linked.publications.size(); ++p) {
        if (!flags.pub_cited_eligible[p]) continue;
        std::set<std::string> programs_hit;
        for (const auto& gid : linked.publications[p].grant_ids) {
            auto it = program_of.find(gid);
            if (it != program_of.end()) programs_hit.insert(it->second);
        }
        for (const auto& prog : programs_hit) {
            buckets[prog].pub_cited.push_back(flags.pub_top_cited[p] ? 1.0 : 0.0);
        }
    }

    std::vector<double> novel_shares, cited_shares;
    for (const auto& [prog, bucket] : buckets) {
        if (bucket.grant_novel.size() < 2) {
            out.excluded.push_back(prog);
            continue;
        }
        ProgramRow row;
        row.program = prog;
        row.n_grants = bucket.grant_novel.size();
        row.n_pubs = bucket.pub_cited.size();
        row.p_top_novel = mean(bucket.grant_novel);
        row.sem_top_novel = share_sem(row.p_top_novel, row.n_grants);
        row.p_top_cited = bucket.pub_cited.empty() ? 0.0 : mean(bucket.pub_cited);
        row.sem_top_cited = share_sem(row.p_top_cited, row.n_pubs);
        novel_shares.push_back(row.p_top_novel);
        cited_shares.push_back(row.p_top_cited);
        out.rows.push_back(std::move(row));
    }

    try {
        out.cross_program_pearson = pearson(novel_shares, cited_shares);
    } catch (const Error& e) {
        out.pearson_note = e.what();
    }

    // default comparison pair: the two largest programs
    std::string a = pair_a, b = pair_b;
    if (a.empty() || b.empty()) {
        std::vector<const ProgramRow*> sorted;
        for (const auto& r : out.rows) sorted.push_back(&r);
        std::sort(sorted.begin(), sorted.end(), [](const ProgramRow* x, const ProgramRow* y) {
            if (x->n_grants != y->n_grants) return x->n_grants > y->n_grants;
            return x->program < y->program;
        });
        if (sorted.size() >= 2) {
            a = sorted[0]->program;
            b = sorted[1]->program;
        }
    }
    if (!a.empty() && !b.empty() && buckets.count(a) && buckets.count(b)) {
        out.pair_a = a;
        out.pair_b = b;
        try {
            out.pair_novelty_ttest = two_sample_ttest(buckets[a].grant_novel, buckets[b].grant_novel);
        } catch (const Error&) {
        }
        try {
            out.pair_citation_ttest = two_sample_ttest(buckets[a].pub_cited, buckets[b].pub_cited);
        } catch (const Error&) {
        }
    }
    return out;
}

std::string ProgramComparison::to_json() const {
    nlohmann::json j;
    j["programs"] = nlohmann::json::array();
    for (const auto& r : rows) {
        j["programs"].push_back({{"program", r.program},
                                 {"n_grants", r.n_grants},
                                 {"n_pubs", r.n_pubs},
                                 {"p_top_novel", r.p_top_novel},
                                 {"sem_top_novel", r.sem_top_novel},
                                 {"p_top_cited", r.p_top_cited},
                                 {"sem_top_cited", r.sem_top_cited}});
    }
    j["excluded_programs"] = excluded;
    j["cross_program_pearson"] = test_to_json(cross_program_pearson);
    if (!pearson_note.empty()) j["cross_program_pearson_note"] = pearson_note;
    if (!pair_a.empty()) {
        j["pair"] = {{"a", pair_a},
                     {"b", pair_b},
                     {"novelty_ttest", test_to_json(pair_novelty_ttest)},
                     {"citation_ttest", test_to_json(pair_citation_ttest)}};
    }
    return j.dump(2);
}

PrestigeComparison prestige_comparison(const LinkedDataset& linked, const DecileFlags& flags) {
    PrestigeComparison out;
    const std::vector<int> member = pub_novel_membership(linked, flags);

    std::map<std::string, const GrantRecord*> grant_of;
    for (const auto& g : linked.grants) grant_of[g.grant_id] = &g;

    struct Cell {
        std::size_t novel_top = 0, novel_n = 0, other_top = 0, other_n = 0;
    };
    std::map<std::string, Cell> cells;
    for (std::size_t p = 0; p < linked.publications.size(); ++p) {
        if (!flags.pub_sjr_eligible[p] || member[p] < 0) continue;
        // a publication contributes to each division of its scored grants
        std::set<std::string> divisions;
        for (const auto& gid : linked.publications[p].grant_ids) {
            if (!flags.grant_top_novel.count(gid)) continue;
            auto g = grant_of.find(gid);
            if (g != grant_of.end()) divisions.insert(g->second->agency + "/" + g->second->division);
        }
        for (const auto& d : divisions) {
            Cell& cell = cells[d];
            if (member[p] == 1) {
                ++cell.novel_n;
                if (flags.pub_top_sjr[p]) ++cell.novel_top;
            } else {
                ++cell.other_n;
                if (flags.pub_top_sjr[p]) ++cell.other_top;
            }
        }
    }

    std::vector<double> novel_shares, other_shares;
    for (const auto& [key, cell] : cells) {
        if (cell.novel_n == 0 || cell.other_n == 0) {
            ++out.excluded_divisions;
            continue;
        }
        PrestigeCell pc;
        pc.division = key;
        pc.novel_share = static_cast<double>(cell.novel_top) / static_cast<double>(cell.novel_n);
        pc.other_share = static_cast<double>(cell.other_top) / static_cast<double>(cell.other_n);
        pc.n_novel_pubs = cell.novel_n;
        pc.n_other_pubs = cell.other_n;
        novel_shares.push_back(pc.novel_share);
        other_shares.push_back(pc.other_share);
        out.cells.push_back(std::move(pc));
    }
    if (!novel_shares.empty()) {
        double diff = 0.0;
        for (std::size_t i = 0; i < novel_shares.size(); ++i) diff += novel_shares[i] - other_shares[i];
        out.mean_difference = diff / static_cast<double>(novel_shares.size());
        if (novel_shares.size() >= 2) {
            try {
                out.ttest = paired_ttest(novel_shares, other_shares);
            } catch (const Error&) {
            }
        }
    }
    return out;
}

std::string PrestigeComparison::to_json() const {
    nlohmann::json j;
    j["divisions"] = nlohmann::json::array();
    for (const auto& c : cells) {
        j["divisions"].push_back({{"division", c.division},
                                  {"novel_top_sjr_share", c.novel_share},
                                  {"other_top_sjr_share", c.other_share},
                                  {"n_novel_pubs", c.n_novel_pubs},
                                  {"n_other_pubs", c.n_other_pubs}});
    }
    j["mean_difference"] = mean_difference;
    j["paired_ttest"] = test_to_json(ttest);
    j["excluded_divisions"] = excluded_divisions;
    return j.dump(2);
}

ProductivityComparison productivity_comparison(const LinkedDataset& linked, const DecileFlags& flags) {
    ProductivityComparison out;

    struct Cell {
        std::vector<double> novel_pubs;
        std::vector<double> other_pubs;
    };
    std::map<std::string, Cell> cells;
    for (const auto& g : linked.grants) {
        auto it = flags.grant_top_novel.find(g.grant_id);
        if (it == flags.grant_top_novel.end()) continue;
        const int length = g.end_year - g.start_year;
        const std::string key = g.agency + "/" + g.division + "/" + std::to_string(length);
        auto pubs = linked.grant_pubs.find(g.grant_id);
        const double n_pubs = pubs == linked.grant_pubs.end() ? 0.0 : static_cast<double>(pubs->second.size());
        if (it->second) cells[key].novel_pubs.push_back(n_pubs);
        else cells[key].other_pubs.push_back(n_pubs);
    }

    std::vector<double> novel_means, other_means;
    for (const auto& [key, cell] : cells) {
        if (cell.novel_pubs.empty() || cell.other_pubs.empty()) {
            ++out.excluded_cells;
            continue;
        }
        ProductivityCell pc;
        pc.key = key;
        pc.novel_mean_pubs = mean(cell.novel_pubs);
        pc.other_mean_pubs = mean(cell.other_pubs);
        pc.n_novel = cell.novel_pubs.size();
        pc.n_other = cell.other_pubs.size();
        novel_means.push_back(pc.novel_mean_pubs);
        other_means.push_back(pc.other_mean_pubs);
        out.cells.push_back(std::move(pc));
    }
    if (!novel_means.empty()) {
        double diff = 0.0;
        for (std::size_t i = 0; i < novel_means.size(); ++i) diff += novel_means[i] - other_means[i];
        out.mean_difference = diff / static_cast<double>(novel_means.size());
        if (novel_means.size() >= 2) {
            try {
                out.ttest = paired_ttest(novel_means, other_means);
            } catch (const Error&) {
            }
        }
    }
    return out;
}

std::string ProductivityComparison::to_json() const {
    nlohmann::json j;
    j["cells"] = nlohmann::json::array();
    for (const auto& c : cells) {
        j["cells"].push_back({{"cell", c.key},
                              {"novel_mean_pubs", c.novel_mean_pubs},
                              {"other_mean_pubs", c.other_mean_pubs},
                              {"n_novel", c.n_novel},
                              {"n_other", c.n_other}});
    }
    j["mean_difference"] = mean_difference;
    j["paired_ttest"] = test_to_json(ttest);
    j["excluded_cells"] = excluded_cells;
    return j.dump(2);
}

TrendResult novelty_trend(const NoveltyTable& novelty) {
    TrendResult out;
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> per_agency;
    for (const auto& row : novelty.rows) {
        per_agency[row.agency].first.push_back(row.novelty_score);
        per_agency[row.agency].second.push_back(static_cast<double>(row.year));
    }
    for (const auto& [agency, data] : per_agency) {
        try {
            out.per_agency[agency] = pearson(data.first, data.second);
        } catch (const Error& e) {
            out.errors[agency] = e.what();
        }
    }
    return out;
}

std::string TrendResult::to_json() const {
    nlohmann::json j;
    j["per_agency"] = nlohmann::json::object();
    for (const auto& [agency, t] : per_agency) {
        j["per_agency"][agency] = {{"r", t.statistic}, {"df", t.df}, {"p_value", t.p_value}};
    }
    for (const auto& [agency, e] : errors) j["errors"][agency] = e;
    return j.dump(2);
}

} // namespace grantnov
