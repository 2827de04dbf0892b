#include "grantnov/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <set>
#include <thread>

#include "grantnov/error.hpp"
#include "grantnov/rng.hpp"
#include "grantnov/studies.hpp"

namespace grantnov {

namespace {

struct WindowInputs {
    std::vector<std::size_t> past;    // indices into grants
    std::vector<std::size_t> current; // indices into grants
};

WindowInputs collect_window(const GrantTable& grants, const std::string& agency, int year, int window_years) {
    WindowInputs w;
    const int lo = year - window_years;
    for (std::size_t i = 0; i < grants.size(); ++i) {
        const auto& g = grants[i];
        if (g.agency != agency) continue;
        if (g.fiscal_year == year) w.current.push_back(i);
        else if (g.fiscal_year >= lo && g.fiscal_year < year) w.past.push_back(i);
    }
    return w;
}

// fit on the past window, project and score the current docs
std::vector<double> score_window(const std::vector<TermCounts>& past_docs, const std::vector<TermCounts>& current_docs,
                                 const EngineConfig& cfg, std::uint64_t job_seed) {
    Vocabulary vocab = build_vocabulary(past_docs, cfg.min_df, cfg.max_df_ratio);
    auto [tfidf, v_past] = tfidf_fit_transform(past_docs, vocab, cfg.l2_normalize);

    NmfResult nmf = nmf_fit(v_past, cfg.topics, job_seed, cfg.nmf);

    KernelSpec kernel = cfg.kernel;
    if (kernel.kind == KernelKind::rbf && kernel.gamma <= 0) kernel.gamma = auto_gamma(nmf.w);
    OcSvmModel svm = ocsvm_fit(nmf.w, cfg.nu, kernel, cfg.svm);

    std::vector<double> raw(current_docs.size());
    for (std::size_t i = 0; i < current_docs.size(); ++i) {
        SparseVector vec = tfidf.transform(current_docs[i]);
        std::vector<double> loads = nmf_transform(nmf.model, vec, cfg.nmf_project);
        raw[i] = svm.raw_novelty(loads);
    }
    return raw;
}

TermCounts doc_of(const GrantRecord& g) { return term_counts(tokenize(g.summary)); }

YearScore score_year_impl(const GrantTable& grants, const std::string& agency, int year, const EngineConfig& cfg) {
    YearScore result;
    WindowInputs w = collect_window(grants, agency, year, cfg.window_years);
    if (w.current.empty()) return result;
    if (w.past.size() < cfg.min_history) {
        result.skipped = true;
        result.skip_reason = "insufficient history: " + std::to_string(w.past.size()) + " past grants, need " +
                             std::to_string(cfg.min_history);
        return result;
    }
    std::vector<TermCounts> past_docs;
    past_docs.reserve(w.past.size());
    for (std::size_t i : w.past) past_docs.push_back(doc_of(grants[i]));
    std::vector<TermCounts> current_docs;
    current_docs.reserve(w.current.size());
    for (std::size_t i : w.current) current_docs.push_back(doc_of(grants[i]));

    const std::uint64_t job_seed = derive_seed(cfg.seed, "score-year", fnv1a64(agency), static_cast<std::uint64_t>(year));
    std::vector<double> raw = score_window(past_docs, current_docs, cfg, job_seed);
    result.raw.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) result.raw.emplace_back(w.current[i], raw[i]);
    return result;
}

struct Job {
    std::string agency;
    int year;
};

std::vector<Job> plan_jobs(const GrantTable& grants, const EngineConfig& cfg) {
    std::set<std::string> agencies;
    if (cfg.agencies.empty()) {
        for (const auto& g : grants) agencies.insert(g.agency);
    } else {
        agencies.insert(cfg.agencies.begin(), cfg.agencies.end());
    }
    int lo = cfg.year_start;
    int hi = cfg.year_end;
    if (lo == 0 || hi == 0) {
        int dmin = 0, dmax = 0;
        bool first = true;
        for (const auto& g : grants) {
            if (first || g.fiscal_year < dmin) dmin = g.fiscal_year;
            if (first || g.fiscal_year > dmax) dmax = g.fiscal_year;
            first = false;
        }
        if (lo == 0) lo = dmin;
        if (hi == 0) hi = dmax;
    }
    std::vector<Job> jobs;
    for (const auto& a : agencies) {
        for (int y = lo; y <= hi; ++y) jobs.push_back({a, y});
    }
    return jobs;
}

} // namespace

YearScore score_year(const GrantTable& grants, const std::string& agency, int year, const EngineConfig& cfg) {
    return score_year_impl(grants, agency, year, cfg);
}

NoveltyTable score_all(const GrantTable& grants, const EngineConfig& cfg) {
    const std::vector<Job> jobs = plan_jobs(grants, cfg);
    std::vector<YearScore> results(jobs.size());

    const std::size_t workers = std::max<std::size_t>(1, cfg.jobs);
    if (workers == 1) {
        for (std::size_t j = 0; j < jobs.size(); ++j) {
            results[j] = score_year_impl(grants, jobs[j].agency, jobs[j].year, cfg);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr first_error;
        std::mutex error_mutex;
        auto worker = [&]() {
            for (;;) {
                const std::size_t j = next.fetch_add(1);
                if (j >= jobs.size()) return;
                try {
                    results[j] = score_year_impl(grants, jobs[j].agency, jobs[j].year, cfg);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        };
        std::vector<std::thread> threads;
        for (std::size_t t = 0; t < workers; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
        if (first_error) std::rethrow_exception(first_error);
    }

    // merge in deterministic (agency, year) order; jobs are already sorted
    NoveltyTable table;
    bool have_any = false;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        const YearScore& ys = results[j];
        if (ys.skipped) {
            table.skipped.push_back({jobs[j].agency, jobs[j].year, ys.skip_reason});
            continue;
        }
        for (const auto& [gi, raw] : ys.raw) {
            const GrantRecord& g = grants[gi];
            table.rows.push_back({g.grant_id, g.agency, g.program, g.division, g.fiscal_year, raw, 0.0});
            if (!have_any || raw < table.raw_min) table.raw_min = raw;
            if (!have_any || raw > table.raw_max) table.raw_max = raw;
            have_any = true;
        }
    }

    const double span = table.raw_max - table.raw_min;
    if (!have_any || span <= 0.0) {
        table.degenerate = have_any; // all values equal counts as degenerate
        for (auto& row : table.rows) row.novelty_score = 0.0;
    } else {
        for (auto& row : table.rows) row.novelty_score = (row.raw_distance - table.raw_min) / span;
    }
    return table;
}

std::vector<ProbePoint> clone_probe(const GrantTable& grants, const std::string& probe_id,
                                    const std::vector<double>& clone_fractions, double noise_sigma,
                                    const EngineConfig& cfg) {
    std::size_t probe_idx = grants.size();
    for (std::size_t i = 0; i < grants.size(); ++i) {
        if (grants[i].grant_id == probe_id) {
            probe_idx = i;
            break;
        }
    }
    if (probe_idx == grants.size()) raise(ErrorCode::validation, "clone_probe: unknown probe grant id " + probe_id);
    const GrantRecord& probe = grants[probe_idx];

    NoveltyTable base = score_all(grants, cfg);
    const double span = base.raw_max - base.raw_min;
    if (base.rows.empty() || span <= 0) raise(ErrorCode::degenerate, "clone_probe: degenerate baseline novelty pool");

    WindowInputs w = collect_window(grants, probe.agency, probe.fiscal_year, cfg.window_years);
    if (w.past.size() < cfg.min_history) {
        raise(ErrorCode::validation, "clone_probe: probe year has insufficient history");
    }

    std::vector<TermCounts> past_docs;
    past_docs.reserve(w.past.size());
    for (std::size_t i : w.past) past_docs.push_back(doc_of(grants[i]));
    const TermCounts probe_doc = doc_of(probe);

    double sigma = noise_sigma > 0 ? noise_sigma : cfg.clone_noise_sigma;
    if (sigma <= 0) {
        // 0.1 * mean nonzero term count of the probe
        double total = 0.0;
        for (const auto& [term, c] : probe_doc) total += c;
        sigma = probe_doc.empty() ? 0.1 : 0.1 * total / static_cast<double>(probe_doc.size());
    }

    // one fixed permutation so that larger fractions replace supersets
    Rng pick_rng(derive_seed(cfg.seed, "clone-probe-pick", probe_idx));
    const std::vector<std::size_t> replace_order = pick_rng.permutation(past_docs.size());

    const std::uint64_t job_seed =
        derive_seed(cfg.seed, "score-year", fnv1a64(probe.agency), static_cast<std::uint64_t>(probe.fiscal_year));

    std::vector<ProbePoint> curve;
    for (std::size_t fi = 0; fi < clone_fractions.size(); ++fi) {
        const double f = clone_fractions[fi];
        if (f < 0 || f >= 1) raise(ErrorCode::validation, "clone_probe: fractions must lie in [0, 1)");
        const std::size_t n_replace = static_cast<std::size_t>(std::llround(f * static_cast<double>(past_docs.size())));

        std::vector<TermCounts> modified = past_docs;
        Rng noise_rng(derive_seed(cfg.seed, "clone-probe-noise", probe_idx, fi));
        for (std::size_t r = 0; r < n_replace; ++r) {
            TermCounts clone = probe_doc;
            for (auto& [term, c] : clone) c = std::max(0.0, c + noise_rng.normal(0.0, sigma));
            modified[replace_order[r]] = std::move(clone);
        }

        const double raw = score_window(modified, {probe_doc}, cfg, job_seed)[0];
        const double score = std::clamp((raw - base.raw_min) / span, 0.0, 1.0);
        curve.push_back({f, raw, score});
    }
    return curve;
}

std::vector<SensitivityTriple> default_sensitivity_grid() {
    return {{0.01, 50, 2}, {0.1, 50, 2}, {0.05, 100, 2}, {0.05, 50, 3}, {0.05, 50, 1}};
}

std::vector<SensitivityRow> sensitivity_grid(const GrantTable& grants, const LinkedDataset& linked,
                                             const std::vector<SensitivityTriple>& grid, const EngineConfig& cfg) {
    if (grid.empty()) raise(ErrorCode::validation, "sensitivity_grid: empty grid");
    std::vector<SensitivityRow> report;
    for (const auto& triple : grid) {
        EngineConfig run_cfg = cfg;
        run_cfg.nu = triple.nu;
        run_cfg.topics = triple.topics;
        run_cfg.window_years = triple.window_years;
        NoveltyTable table = score_all(grants, run_cfg);
        auto regressions = table1_regression(linked, table);
        for (const auto& [agency, reg] : regressions.per_agency) {
            SensitivityRow row;
            row.nu = triple.nu;
            row.topics = triple.topics;
            row.window_years = triple.window_years;
            row.agency = agency;
            const auto it = std::find(reg.names.begin(), reg.names.end(), "Novelty");
            const std::size_t idx = static_cast<std::size_t>(it - reg.names.begin());
            row.novelty_coefficient = reg.estimates[idx];
            row.p_value = reg.p_values[idx];
            report.push_back(std::move(row));
        }
        for (const auto& [agency, note] : regressions.skipped_agencies) {
            SensitivityRow row;
            row.nu = triple.nu;
            row.topics = triple.topics;
            row.window_years = triple.window_years;
            row.agency = agency;
            row.note = note;
            report.push_back(std::move(row));
        }
    }
    return report;
}

} // namespace grantnov
