#include "grantnov/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "grantnov/corpus.hpp"
#include "grantnov/csv.hpp"
#include "grantnov/error.hpp"
#include "grantnov/rng.hpp"
#include "grantnov/studies.hpp"

namespace grantnov {

namespace {

namespace fs = std::filesystem;

std::string join_path(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) raise(ErrorCode::io, "cannot create directory " + dir + ": " + ec.message());
}

long long to_int_or(const std::string& value, const std::string& key) {
    auto v = parse_int(value);
    if (!v) raise(ErrorCode::usage, "config key " + key + ": expected integer, got '" + value + "'");
    return *v;
}

double to_double_or(const std::string& value, const std::string& key) {
    auto v = parse_double(value);
    if (!v) raise(ErrorCode::usage, "config key " + key + ": expected number, got '" + value + "'");
    return *v;
}

bool to_bool_or(const std::string& value, const std::string& key) {
    std::string t = to_lower(trim(value));
    if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
    if (t == "0" || t == "false" || t == "no" || t == "off") return false;
    raise(ErrorCode::usage, "config key " + key + ": expected boolean, got '" + value + "'");
}

} // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
    const std::string k = to_lower(trim(key));
    if (k == "seed") {
        engine.seed = static_cast<std::uint64_t>(to_int_or(value, k));
        synth.seed = engine.seed;
    } else if (k == "jobs") {
        engine.jobs = static_cast<std::size_t>(std::max<long long>(1, to_int_or(value, k)));
    } else if (k == "window_years") {
        engine.window_years = static_cast<int>(to_int_or(value, k));
        if (engine.window_years < 1) raise(ErrorCode::usage, "window_years must be >= 1");
    } else if (k == "topics") {
        engine.topics = static_cast<std::size_t>(to_int_or(value, k));
    } else if (k == "nu") {
        engine.nu = to_double_or(value, k);
    } else if (k == "gamma") {
        engine.kernel.gamma = to_double_or(value, k);
    } else if (k == "kernel") {
        const std::string v = to_lower(trim(value));
        if (v == "rbf") engine.kernel.kind = KernelKind::rbf;
        else if (v == "linear") engine.kernel.kind = KernelKind::linear;
        else raise(ErrorCode::usage, "kernel must be rbf or linear");
    } else if (k == "min_df") {
        engine.min_df = static_cast<std::size_t>(to_int_or(value, k));
    } else if (k == "max_df_ratio") {
        engine.max_df_ratio = to_double_or(value, k);
    } else if (k == "l2_normalize") {
        engine.l2_normalize = to_bool_or(value, k);
    } else if (k == "year_start") {
        engine.year_start = static_cast<int>(to_int_or(value, k));
    } else if (k == "year_end") {
        engine.year_end = static_cast<int>(to_int_or(value, k));
    } else if (k == "agencies") {
        engine.agencies.clear();
        for (const auto& part : split(value, ',')) {
            std::string t = trim(part);
            if (!t.empty() && to_lower(t) != "all") engine.agencies.push_back(t);
        }
    } else if (k == "min_history") {
        engine.min_history = static_cast<std::size_t>(to_int_or(value, k));
    } else if (k == "nmf_max_iter") {
        engine.nmf.max_iter = static_cast<std::size_t>(to_int_or(value, k));
    } else if (k == "nmf_tol") {
        engine.nmf.tol = to_double_or(value, k);
    } else if (k == "svm_tol") {
        engine.svm.tol = to_double_or(value, k);
    } else if (k == "svm_max_iter") {
        engine.svm.max_iter = static_cast<std::uint64_t>(to_int_or(value, k));
    } else if (k == "clone_noise_sigma") {
        engine.clone_noise_sigma = to_double_or(value, k);
    } else if (k == "decile_q") {
        decile_q = to_double_or(value, k);
        if (decile_q <= 0 || decile_q >= 1) raise(ErrorCode::usage, "decile_q must lie in (0, 1)");
    } else if (k == "pool_years") {
        pool_years = to_bool_or(value, k);
    } else if (k == "multi_grant_novelty") {
        const std::string v = to_lower(trim(value));
        if (v != "max" && v != "mean") raise(ErrorCode::usage, "multi_grant_novelty must be max or mean");
        multi_grant_novelty = v;
    } else if (k == "dedupe_strip_regex") {
        dedupe_strip_regex = value;
    } else if (k == "events_path") {
        events_path = value;
    } else if (k == "program_pair_a") {
        program_pair_a = trim(value);
    } else if (k == "program_pair_b") {
        program_pair_b = trim(value);
    } else if (k == "l2") {
        logreg.l2 = to_double_or(value, k);
    } else if (k == "al_rounds") {
        al_rounds = static_cast<std::size_t>(to_int_or(value, k));
    } else if (k == "al_batch") {
        al_batch = static_cast<std::size_t>(to_int_or(value, k));
    } else if (k == "cv_folds") {
        cv_folds = static_cast<std::size_t>(to_int_or(value, k));
    } else if (k == "synth_agency") {
        synth.agency = trim(value);
    } else if (k == "synth_start_year") {
        synth.start_year = static_cast<int>(to_int_or(value, k));
    } else if (k == "synth_years") {
        synth.n_years = static_cast<int>(to_int_or(value, k));
    } else if (k == "synth_grants_per_year") {
        synth.grants_per_year = static_cast<std::size_t>(to_int_or(value, k));
    } else if (k == "synth_topics") {
        synth.topic_count = static_cast<std::size_t>(to_int_or(value, k));
    } else if (k == "synth_vocab_per_topic") {
        synth.vocab_per_topic = static_cast<std::size_t>(to_int_or(value, k));
    } else if (k == "synth_novel_block") {
        synth.novel_block_size = static_cast<std::size_t>(to_int_or(value, k));
    } else if (k == "synth_novel_fraction") {
        synth.novel_fraction = to_double_or(value, k);
    } else if (k == "synth_divisions") {
        synth.divisions = static_cast<std::size_t>(to_int_or(value, k));
    } else if (k == "synth_tokens_per_doc") {
        synth.tokens_per_doc = static_cast<std::size_t>(to_int_or(value, k));
    } else if (k == "synth_pi_pool") {
        synth.pi_pool = static_cast<std::size_t>(to_int_or(value, k));
    } else if (k == "synth_pubs_per_grant") {
        synth.pubs_per_grant_mean = to_double_or(value, k);
    } else if (k == "synth_citation_baseline") {
        synth.citation_baseline = to_double_or(value, k);
    } else if (k == "synth_citation_effect") {
        synth.citation_effect = to_double_or(value, k);
    } else if (k == "synth_citation_noise") {
        synth.citation_noise = to_double_or(value, k);
    } else if (k == "synth_programs") {
        // label:weight:offset, comma-separated
        std::vector<SynthProgram> programs;
        for (const auto& part : split(value, ',')) {
            if (trim(part).empty()) continue;
            auto fields = split(trim(part), ':');
            SynthProgram p;
            p.label = trim(fields[0]);
            if (fields.size() > 1) p.weight = to_double_or(fields[1], k);
            if (fields.size() > 2) p.novelty_offset = to_double_or(fields[2], k);
            programs.push_back(std::move(p));
        }
        if (programs.empty()) raise(ErrorCode::usage, "synth_programs: no programs given");
        synth.programs = std::move(programs);
    } else {
        raise(ErrorCode::usage, "unknown config key: " + key);
    }
}

std::string RunConfig::get(const std::string& key) const {
    for (const auto& [k, v] : snapshot()) {
        if (k == to_lower(trim(key))) return v;
    }
    raise(ErrorCode::usage, "unknown config key: " + key);
}

std::vector<std::pair<std::string, std::string>> RunConfig::snapshot() const {
    std::vector<std::pair<std::string, std::string>> kv;
    auto add = [&](const std::string& k, const std::string& v) { kv.emplace_back(k, v); };
    add("seed", std::to_string(engine.seed));
    add("jobs", std::to_string(engine.jobs));
    add("window_years", std::to_string(engine.window_years));
    add("topics", std::to_string(engine.topics));
    add("nu", format_double_short(engine.nu));
    add("gamma", format_double_short(engine.kernel.gamma));
    add("kernel", engine.kernel.kind == KernelKind::rbf ? "rbf" : "linear");
    add("min_df", std::to_string(engine.min_df));
    add("max_df_ratio", format_double_short(engine.max_df_ratio));
    add("l2_normalize", engine.l2_normalize ? "1" : "0");
    add("year_start", std::to_string(engine.year_start));
    add("year_end", std::to_string(engine.year_end));
    {
        std::string a;
        for (const auto& s : engine.agencies) {
            if (!a.empty()) a += ",";
            a += s;
        }
        add("agencies", a);
    }
    add("min_history", std::to_string(engine.min_history));
    add("nmf_max_iter", std::to_string(engine.nmf.max_iter));
    add("nmf_tol", format_double_short(engine.nmf.tol));
    add("svm_tol", format_double_short(engine.svm.tol));
    add("svm_max_iter", std::to_string(engine.svm.max_iter));
    add("clone_noise_sigma", format_double_short(engine.clone_noise_sigma));
    add("decile_q", format_double_short(decile_q));
    add("pool_years", pool_years ? "1" : "0");
    add("multi_grant_novelty", multi_grant_novelty);
    add("dedupe_strip_regex", dedupe_strip_regex);
    add("events_path", events_path);
    add("program_pair_a", program_pair_a);
    add("program_pair_b", program_pair_b);
    add("l2", format_double_short(logreg.l2));
    add("al_rounds", std::to_string(al_rounds));
    add("al_batch", std::to_string(al_batch));
    add("cv_folds", std::to_string(cv_folds));
    add("synth_agency", synth.agency);
    add("synth_start_year", std::to_string(synth.start_year));
    add("synth_years", std::to_string(synth.n_years));
    add("synth_grants_per_year", std::to_string(synth.grants_per_year));
    add("synth_topics", std::to_string(synth.topic_count));
    add("synth_vocab_per_topic", std::to_string(synth.vocab_per_topic));
    add("synth_novel_block", std::to_string(synth.novel_block_size));
    add("synth_novel_fraction", format_double_short(synth.novel_fraction));
    add("synth_divisions", std::to_string(synth.divisions));
    add("synth_tokens_per_doc", std::to_string(synth.tokens_per_doc));
    add("synth_pi_pool", std::to_string(synth.pi_pool));
    add("synth_pubs_per_grant", format_double_short(synth.pubs_per_grant_mean));
    add("synth_citation_baseline", format_double_short(synth.citation_baseline));
    add("synth_citation_effect", format_double_short(synth.citation_effect));
    add("synth_citation_noise", format_double_short(synth.citation_noise));
    {
        std::string p;
        for (const auto& prog : synth.programs) {
            if (!p.empty()) p += ",";
            p += prog.label + ":" + format_double_short(prog.weight) + ":" + format_double_short(prog.novelty_offset);
        }
        add("synth_programs", p);
    }
    return kv;
}

RunConfig RunConfig::from_file(const std::string& path) {
    RunConfig cfg;
    std::istringstream in(read_text_file(path));
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos) {
            raise(ErrorCode::usage, path + ":" + std::to_string(lineno) + ": expected key = value");
        }
        cfg.set(t.substr(0, eq), trim(t.substr(eq + 1)));
    }
    return cfg;
}

IngestSummary ingest(const std::string& grants_path, const std::string& pubs_path, FileFormat format,
                     const std::string& out_dir, const RunConfig& cfg) {
    ensure_dir(out_dir);
    IngestSummary sum;

    auto grants = load_grants(grants_path, format);
    sum.grants_loaded = grants.records.size();
    sum.grants_rejected = grants.rejects.size();

    DedupeConfig dd;
    if (!cfg.dedupe_strip_regex.empty()) dd.strip_suffix_regex = cfg.dedupe_strip_regex;
    GrantTable deduped = dedupe_earliest(grants.records, dd);
    sum.grants_after_dedupe = deduped.size();

    LoadResult<PublicationRecord> pubs;
    if (!pubs_path.empty()) {
        pubs = load_publications(pubs_path, format);
    }
    sum.pubs_loaded = pubs.records.size();
    sum.pubs_rejected = pubs.rejects.size();

    LinkedDataset linked = link(std::move(deduped), std::move(pubs.records));
    sum.orphan_links = linked.orphan_count;
    sum.pubs_missing_sjr = linked.pubs_missing_sjr;
    sum.pubs_missing_field = linked.pubs_missing_field;

    const std::string grants_out = join_path(out_dir, "grants_clean.csv");
    const std::string pubs_out = join_path(out_dir, "pubs_clean.csv");
    const std::string grant_rejects = join_path(out_dir, "grant_rejects.csv");
    const std::string pub_rejects = join_path(out_dir, "pub_rejects.csv");
    const std::string report = join_path(out_dir, "link_report.json");

    write_grants_csv(grants_out, linked.grants);
    write_publications_csv(pubs_out, linked.publications);
    write_rejects_csv(grant_rejects, grants.rejects);
    write_rejects_csv(pub_rejects, pubs.rejects);

    nlohmann::json j;
    j["grants_loaded"] = sum.grants_loaded;
    j["grants_rejected"] = sum.grants_rejected;
    j["grants_after_dedupe"] = sum.grants_after_dedupe;
    j["pubs_loaded"] = sum.pubs_loaded;
    j["pubs_rejected"] = sum.pubs_rejected;
    j["orphan_links"] = sum.orphan_links;
    j["orphans"] = nlohmann::json::array();
    for (const auto& [pub, gid] : linked.orphans) j["orphans"].push_back({{"pub_id", pub}, {"grant_id", gid}});
    j["pubs_missing_sjr"] = sum.pubs_missing_sjr;
    j["pubs_missing_field"] = sum.pubs_missing_field;
    write_text_file(report, j.dump(2) + "\n");

    sum.written_files = {grants_out, pubs_out, grant_rejects, pub_rejects, report};
    return sum;
}

LinkedDataset load_linked(const std::string& grants_path, const std::string& pubs_path, FileFormat format,
                          const RunConfig& cfg) {
    auto grants = load_grants(grants_path, format);
    DedupeConfig dd;
    if (!cfg.dedupe_strip_regex.empty()) dd.strip_suffix_regex = cfg.dedupe_strip_regex;
    GrantTable deduped = dedupe_earliest(grants.records, dd);
    LoadResult<PublicationRecord> pubs;
    if (!pubs_path.empty()) pubs = load_publications(pubs_path, format);
    return link(std::move(deduped), std::move(pubs.records));
}

GrantTable load_grants_clean(const std::string& grants_path, FileFormat format, const RunConfig& cfg) {
    auto grants = load_grants(grants_path, format);
    DedupeConfig dd;
    if (!cfg.dedupe_strip_regex.empty()) dd.strip_suffix_regex = cfg.dedupe_strip_regex;
    return dedupe_earliest(grants.records, dd);
}

void write_novelty_csv(const std::string& path, const NoveltyTable& table) {
    CsvWriter w(path);
    w.write_row({"GRANT_ID", "AGENCY", "PROGRAM", "DIVISION", "YEAR", "RAW_DISTANCE", "NOVELTY_SCORE"});
    for (const auto& r : table.rows) {
        w.write_row({r.grant_id, r.agency, r.program, r.division, std::to_string(r.year), format_double(r.raw_distance),
                     format_double(r.novelty_score)});
    }
}

NoveltyTable read_novelty_csv(const std::string& path) {
    CsvTable t = CsvTable::read_file(path);
    for (const char* col : {"GRANT_ID", "AGENCY", "PROGRAM", "DIVISION", "YEAR", "RAW_DISTANCE", "NOVELTY_SCORE"}) {
        if (!t.column(col)) raise(ErrorCode::validation, std::string("novelty csv: missing column ") + col);
    }
    NoveltyTable table;
    bool first = true;
    for (const auto& row : t.rows()) {
        NoveltyRow r;
        r.grant_id = row.fields[*t.column("GRANT_ID")];
        r.agency = row.fields[*t.column("AGENCY")];
        r.program = row.fields[*t.column("PROGRAM")];
        r.division = row.fields[*t.column("DIVISION")];
        r.year = static_cast<int>(parse_int(row.fields[*t.column("YEAR")]).value_or(0));
        r.raw_distance = parse_double(row.fields[*t.column("RAW_DISTANCE")]).value_or(0.0);
        r.novelty_score = parse_double(row.fields[*t.column("NOVELTY_SCORE")]).value_or(0.0);
        if (first || r.raw_distance < table.raw_min) table.raw_min = r.raw_distance;
        if (first || r.raw_distance > table.raw_max) table.raw_max = r.raw_distance;
        first = false;
        table.rows.push_back(std::move(r));
    }
    return table;
}

void write_skip_csv(const std::string& path, const NoveltyTable& table) {
    CsvWriter w(path);
    w.write_row({"AGENCY", "YEAR", "REASON"});
    for (const auto& s : table.skipped) {
        w.write_row({s.agency, std::to_string(s.year), s.reason});
    }
}

void write_probe_csv(const std::string& path, const std::vector<ProbePoint>& curve) {
    CsvWriter w(path);
    w.write_row({"FRACTION", "RAW_DISTANCE", "NOVELTY_SCORE"});
    for (const auto& p : curve) {
        w.write_row({format_double(p.fraction), format_double(p.raw_distance), format_double(p.score)});
    }
}

void write_sensitivity_csv(const std::string& path, const std::vector<SensitivityRow>& rows) {
    CsvWriter w(path);
    w.write_row({"NU", "TOPICS", "WINDOW_YEARS", "AGENCY", "NOVELTY_COEFFICIENT", "P_VALUE", "NOTE"});
    for (const auto& r : rows) {
        w.write_row({format_double_short(r.nu), std::to_string(r.topics), std::to_string(r.window_years), r.agency,
                     format_double(r.novelty_coefficient), format_double(r.p_value), r.note});
    }
}

StudyOutput run_study(const std::string& study, const LinkedDataset& linked, const NoveltyTable& novelty,
                      const RunConfig& cfg, const std::vector<CitationEvent>* events) {
    DecileOptions dopts;
    dopts.q = cfg.decile_q;
    dopts.pool_years = cfg.pool_years;

    StudyOutput out;
    if (study == "regress") {
        const auto mode = cfg.multi_grant_novelty == "mean" ? MultiGrantNovelty::mean : MultiGrantNovelty::max;
        Table1Result result = table1_regression(linked, novelty, mode);
        nlohmann::json j = nlohmann::json::parse(result.to_json());
        // marginal-effect curves at the covariate means, one per agency
        std::ostringstream csv;
        csv << "AGENCY,NOVELTY,PREDICTED_CITATIONS,STD_ERROR\n";
        for (const auto& [agency, reg] : result.per_agency) {
            std::vector<double> grid;
            for (int i = 0; i <= 20; ++i) grid.push_back(static_cast<double>(i) / 20.0);
            auto curve = marginal_effect_curve(reg, grid, result.design_means.at(agency));
            for (const auto& pt : curve) {
                csv << agency << ',' << format_double(pt.novelty) << ',' << format_double(pt.prediction) << ','
                    << format_double(pt.std_error) << '\n';
            }
        }
        out.json = j.dump(2);
        out.points_csv = csv.str();
    } else if (study == "dynamics") {
        DecileFlags flags = flag_deciles(linked, novelty, dopts);
        std::vector<CitationEvent> loaded;
        if (!events && !cfg.events_path.empty()) {
            loaded = load_citation_events(cfg.events_path);
            events = &loaded;
        }
        static const std::vector<CitationEvent> kNoEvents;
        std::vector<int> horizons;
        for (int h = 0; h <= 8; ++h) horizons.push_back(h);
        DynamicsResult result = citation_dynamics(linked, flags, horizons, events ? *events : kNoEvents, cfg.decile_q);
        out.json = result.to_json();
        std::ostringstream csv;
        csv << "HORIZON,P_TOP_CITED_NOVEL,SEM_NOVEL,P_TOP_CITED_OTHER,SEM_OTHER\n";
        for (const auto& pt : result.curve) {
            csv << pt.horizon << ',' << format_double(pt.p_novel) << ',' << format_double(pt.sem_novel) << ','
                << format_double(pt.p_other) << ',' << format_double(pt.sem_other) << '\n';
        }
        out.points_csv = csv.str();
    } else if (study == "programs") {
        DecileFlags flags = flag_deciles(linked, novelty, dopts);
        ProgramComparison result = program_comparison(linked, novelty, flags, cfg.program_pair_a, cfg.program_pair_b);
        out.json = result.to_json();
        std::ostringstream csv;
        csv << "PROGRAM,N_GRANTS,N_PUBS,P_TOP_NOVEL,SEM_TOP_NOVEL,P_TOP_CITED,SEM_TOP_CITED\n";
        for (const auto& r : result.rows) {
            csv << csv_quote(r.program) << ',' << r.n_grants << ',' << r.n_pubs << ',' << format_double(r.p_top_novel)
                << ',' << format_double(r.sem_top_novel) << ',' << format_double(r.p_top_cited) << ','
                << format_double(r.sem_top_cited) << '\n';
        }
        out.points_csv = csv.str();
    } else if (study == "prestige") {
        DecileFlags flags = flag_deciles(linked, novelty, dopts);
        PrestigeComparison result = prestige_comparison(linked, flags);
        out.json = result.to_json();
    } else if (study == "productivity") {
        DecileFlags flags = flag_deciles(linked, novelty, dopts);
        ProductivityComparison result = productivity_comparison(linked, flags);
        out.json = result.to_json();
    } else if (study == "trend") {
        TrendResult result = novelty_trend(novelty);
        out.json = result.to_json();
    } else {
        raise(ErrorCode::usage, "unknown study: " + study);
    }
    return out;
}

namespace {

std::map<std::string, std::pair<int, bool>> read_labels_csv(const std::string& labels_path) {
    CsvTable labels_csv = CsvTable::read_file(labels_path);
    for (const char* col : {"GRANT_ID", "LABEL", "PROVENANCE"}) {
        if (!labels_csv.column(col)) {
            raise(ErrorCode::validation, std::string("labels csv: missing column ") + col);
        }
    }
    std::map<std::string, std::pair<int, bool>> file_labels; // id -> (label, is_seed)
    for (const auto& row : labels_csv.rows()) {
        const std::string id = trim(row.fields[*labels_csv.column("GRANT_ID")]);
        auto lab = parse_int(row.fields[*labels_csv.column("LABEL")]);
        if (!lab || (*lab != 0 && *lab != 1)) {
            raise(ErrorCode::validation, "labels csv line " + std::to_string(row.line) + ": label must be 0 or 1");
        }
        const std::string prov = to_lower(trim(row.fields[*labels_csv.column("PROVENANCE")]));
        file_labels[id] = {static_cast<int>(*lab), prov == "seed" || prov == "seed-list"};
    }
    return file_labels;
}

FilterSummary filter_run(const GrantTable& grants, const std::map<std::string, std::pair<int, bool>>& known,
                         bool pool_is_whole_corpus, const GrantLabelOracle& ask, const std::string& out_dir,
                         const RunConfig& cfg) {
    ensure_dir(out_dir);

    // tf-idf features over every grant summary
    std::vector<TermCounts> docs;
    docs.reserve(grants.size());
    for (const auto& g : grants) docs.push_back(term_counts(tokenize(g.summary)));
    Vocabulary vocab = build_vocabulary(docs, cfg.engine.min_df, cfg.engine.max_df_ratio);
    auto [tfidf, features] = tfidf_fit_transform(docs, vocab, cfg.engine.l2_normalize);

    LabelPool pool;
    pool.features.cols = features.cols;
    std::vector<std::size_t> pool_to_grant;
    for (std::size_t i = 0; i < grants.size(); ++i) {
        auto it = known.find(grants[i].grant_id);
        if (it == known.end() && !pool_is_whole_corpus) continue;
        pool.features.append_row(features.row(i));
        pool_to_grant.push_back(i);
        if (it != known.end() && it->second.second) {
            pool.labels.push_back(it->second.first);
            pool.provenance.push_back(0);
        } else {
            pool.labels.push_back(std::nullopt);
            pool.provenance.push_back(-1);
        }
    }
    if (pool.labels.empty()) raise(ErrorCode::validation, "labels csv matched no grants");

    auto oracle = [&](std::size_t idx) -> std::optional<int> {
        const GrantRecord& g = grants[pool_to_grant[idx]];
        auto it = known.find(g.grant_id);
        if (it != known.end()) return it->second.first;
        if (ask) return ask(g);
        return std::nullopt;
    };
    ActiveLearnResult al = active_learning_loop(pool, oracle, cfg.al_rounds, cfg.al_batch, cfg.logreg);

    // cross-validated AUC on everything labeled so far
    CsrMatrix lx;
    lx.cols = pool.features.cols;
    std::vector<int> ly;
    for (std::size_t i = 0; i < pool.labels.size(); ++i) {
        if (!pool.labels[i]) continue;
        lx.append_row(pool.features.row(i));
        ly.push_back(*pool.labels[i]);
    }
    CvAucResult cv = cv_auc(lx, ly, cfg.cv_folds, cfg.logreg, cfg.engine.seed);

    FilterSummary sum;
    sum.cv_mean_auc = cv.mean_auc;
    sum.cv_sd_auc = cv.sd_auc;
    sum.labeled_total = al.labeled_total;
    sum.rounds_run = al.rounds_run;

    // label 1 = non-research; is_research = predicted probability < 0.5
    const std::string out_csv = join_path(out_dir, "filter_output.csv");
    {
        CsvWriter w(out_csv);
        w.write_row({"GRANT_ID", "IS_RESEARCH", "NON_RESEARCH_PROBABILITY"});
        for (std::size_t i = 0; i < grants.size(); ++i) {
            const double p = predict_proba(al.model, features.row(i));
            const bool research = p < 0.5;
            if (!research) ++sum.flagged_non_research;
            w.write_row({grants[i].grant_id, research ? "1" : "0", format_double(p)});
        }
    }
    const std::string out_json = join_path(out_dir, "filter_report.json");
    {
        nlohmann::json j;
        j["cv_mean_auc"] = cv.mean_auc;
        j["cv_sd_auc"] = cv.sd_auc;
        j["fold_aucs"] = cv.fold_aucs;
        j["rounds_run"] = al.rounds_run;
        j["labeled_total"] = al.labeled_total;
        j["pool_exhausted"] = al.pool_exhausted;
        j["flagged_non_research"] = sum.flagged_non_research;
        j["converged"] = al.model.converged;
        write_text_file(out_json, j.dump(2) + "\n");
    }
    sum.written_files = {out_csv, out_json};
    return sum;
}

} // namespace

FilterSummary filter_train_apply(const GrantTable& grants, const std::string& labels_path, const std::string& out_dir,
                                 const RunConfig& cfg) {
    return filter_run(grants, read_labels_csv(labels_path), false, nullptr, out_dir, cfg);
}

FilterSummary filter_train_apply_interactive(const GrantTable& grants, const std::string& seed_labels_path,
                                             const GrantLabelOracle& oracle, const std::string& out_dir,
                                             const RunConfig& cfg) {
    auto known = read_labels_csv(seed_labels_path);
    // only seed rows pre-label the pool; everything else goes to the oracle
    for (auto& [id, lab] : known) lab.second = true;
    return filter_run(grants, known, true, oracle, out_dir, cfg);
}

void save_config_file(const std::string& path, const RunConfig& cfg) {
    std::ostringstream out;
    for (const auto& [k, v] : cfg.snapshot()) out << k << " = " << v << "\n";
    write_text_file(path, out.str());
}

std::vector<std::string> synth_to_dir(const std::string& out_dir, const SynthSpec& spec) {
    ensure_dir(out_dir);
    SynthData data = generate(spec);
    const std::string grants = join_path(out_dir, "grants.csv");
    const std::string pubs = join_path(out_dir, "pubs.csv");
    const std::string truth = join_path(out_dir, "truth.csv");
    const std::string events = join_path(out_dir, "events.csv");
    write_grants_csv(grants, data.grants);
    write_publications_csv(pubs, data.publications);
    write_truth_csv(truth, data.truth);
    write_events_csv(events, data.events);
    return {grants, pubs, truth, events};
}

DemoSummary run_demo(const std::string& out_dir, const RunConfig& cfg) {
    ensure_dir(out_dir);
    DemoSummary sum;

    // demo-sized corpus and engine unless the caller overrode them
    RunConfig demo = cfg;
    sum.written_files = synth_to_dir(out_dir, demo.synth);

    LinkedDataset linked = load_linked(join_path(out_dir, "grants.csv"), join_path(out_dir, "pubs.csv"),
                                       FileFormat::csv, demo);
    NoveltyTable table = score_all(linked.grants, demo.engine);

    const std::string novelty_path = join_path(out_dir, "novelty.csv");
    const std::string skip_path = join_path(out_dir, "skipped_years.csv");
    write_novelty_csv(novelty_path, table);
    write_skip_csv(skip_path, table);
    sum.written_files.push_back(novelty_path);
    sum.written_files.push_back(skip_path);

    RunConfig study_cfg = demo;
    study_cfg.events_path = join_path(out_dir, "events.csv");
    for (const std::string study : {"regress", "trend", "programs", "dynamics"}) {
        StudyOutput out = run_study(study, linked, table, study_cfg);
        const std::string json_path = join_path(out_dir, study + ".json");
        write_text_file(json_path, out.json + "\n");
        sum.written_files.push_back(json_path);
        if (!out.points_csv.empty()) {
            const std::string csv_path = join_path(out_dir, study + "_points.csv");
            write_text_file(csv_path, out.points_csv);
            sum.written_files.push_back(csv_path);
        }
        if (study == "regress") {
            nlohmann::json j = nlohmann::json::parse(out.json);
            const auto& regs = j["regressions"];
            if (regs.contains(demo.synth.agency)) {
                for (const auto& coef : regs[demo.synth.agency]["coefficients"]) {
                    if (coef["name"] == "Novelty") sum.novelty_coefficient = coef["estimate"];
                }
            }
        }
    }
    return sum;
}

std::string file_digest(const std::string& path) {
    const std::string bytes = read_text_file(path);
    const std::uint64_t h = fnv1a64(bytes);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace grantnov
