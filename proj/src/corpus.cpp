#include "grantnov/corpus.hpp"

#include <algorithm>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include <json.hpp>

#include "grantnov/csv.hpp"
#include "grantnov/error.hpp"

namespace grantnov {

namespace {

const char* kGrantColumns[] = {"GRANT_ID", "AGENCY",     "PROGRAM",          "DIVISION", "FY",
                               "START_YEAR", "END_YEAR", "AWARD_AMOUNT_MUSD", "PI_IDS",   "SUMMARY"};
const char* kPubColumns[] = {"PUB_ID", "GRANT_IDS", "PUB_YEAR", "CITATIONS", "SJR", "FIELD", "JOURNAL"};

std::string canonical_agency(const std::string& raw) {
    std::string t = trim(raw);
    std::string up = t;
    std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (up == "NSF" || up == "NIH") return up;
    return t;
}

std::vector<std::string> parse_id_list(const std::string& s) {
    std::vector<std::string> out;
    for (const auto& part : split(s, ';')) {
        std::string t = trim(part);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

// field accessor shared by the CSV and JSONL paths
struct RowView {
    virtual ~RowView() = default;
    virtual std::optional<std::string> get(const std::string& name) const = 0;
};

struct CsvRowView : RowView {
    const CsvTable* table;
    const CsvRow* row;
    std::optional<std::string> get(const std::string& name) const override {
        auto col = table->column(name);
        if (!col) return std::nullopt;
        if (*col >= row->fields.size()) return std::string();
        return row->fields[*col];
    }
};

struct JsonRowView : RowView {
    const nlohmann::json* obj;
    std::optional<std::string> get(const std::string& name) const override {
        auto it = obj->find(to_lower(name));
        if (it == obj->end() || it->is_null()) return std::nullopt;
        if (it->is_string()) return it->get<std::string>();
        if (it->is_number_integer()) return std::to_string(it->get<long long>());
        if (it->is_number()) return format_double(it->get<double>());
        if (it->is_array()) {
            std::string joined;
            for (const auto& e : *it) {
                if (!joined.empty()) joined += ";";
                joined += e.is_string() ? e.get<std::string>() : e.dump();
            }
            return joined;
        }
        return it->dump();
    }
};

std::optional<GrantRecord> parse_grant(const RowView& row, std::string& reason) {
    GrantRecord g;
    auto need = [&](const char* col) -> std::optional<std::string> {
        auto v = row.get(col);
        if (!v) reason = std::string("missing field ") + col;
        return v;
    };
    auto id = need("GRANT_ID");
    if (!id) return std::nullopt;
    g.grant_id = trim(*id);
    if (g.grant_id.empty()) {
        reason = "grant_id empty";
        return std::nullopt;
    }
    g.agency = canonical_agency(row.get("AGENCY").value_or(""));
    if (g.agency.empty()) {
        reason = "agency empty";
        return std::nullopt;
    }
    g.program = trim(row.get("PROGRAM").value_or(""));
    g.division = trim(row.get("DIVISION").value_or(""));

    auto fy = parse_int(row.get("FY").value_or(""));
    if (!fy) {
        reason = "FY not an integer";
        return std::nullopt;
    }
    if (*fy < 1900 || *fy > 2100) {
        reason = "FY outside [1900, 2100]";
        return std::nullopt;
    }
    g.fiscal_year = static_cast<int>(*fy);
    g.start_year = static_cast<int>(parse_int(row.get("START_YEAR").value_or("")).value_or(*fy));
    g.end_year = static_cast<int>(parse_int(row.get("END_YEAR").value_or("")).value_or(*fy));

    auto amount = parse_double(row.get("AWARD_AMOUNT_MUSD").value_or(""));
    if (!amount) {
        reason = "award_amount not a number";
        return std::nullopt;
    }
    if (*amount < 0) {
        reason = "award_amount < 0";
        return std::nullopt;
    }
    g.award_amount = *amount;

    g.pi_ids = parse_id_list(row.get("PI_IDS").value_or(""));
    if (g.pi_ids.empty()) {
        reason = "pi_ids empty";
        return std::nullopt;
    }
    g.summary = row.get("SUMMARY").value_or("");
    if (trim(g.summary).empty()) {
        reason = "summary empty";
        return std::nullopt;
    }
    return g;
}

std::optional<PublicationRecord> parse_publication(const RowView& row, std::string& reason) {
    PublicationRecord p;
    p.pub_id = trim(row.get("PUB_ID").value_or(""));
    if (p.pub_id.empty()) {
        reason = "pub_id empty";
        return std::nullopt;
    }
    p.grant_ids = parse_id_list(row.get("GRANT_IDS").value_or(""));
    if (p.grant_ids.empty()) {
        reason = "grant_ids empty";
        return std::nullopt;
    }
    auto year = parse_int(row.get("PUB_YEAR").value_or(""));
    if (!year) {
        reason = "pub_year not an integer";
        return std::nullopt;
    }
    p.pub_year = static_cast<int>(*year);
    auto cites = parse_int(row.get("CITATIONS").value_or(""));
    if (!cites) {
        reason = "citations not an integer";
        return std::nullopt;
    }
    if (*cites < 0) {
        reason = "citations < 0";
        return std::nullopt;
    }
    p.citations = *cites;
    // missing SJR/field keeps the record; coverage is reported by link()
    auto sjr_text = row.get("SJR");
    if (sjr_text && !trim(*sjr_text).empty()) {
        auto sjr = parse_double(*sjr_text);
        if (!sjr) {
            reason = "sjr not a number";
            return std::nullopt;
        }
        if (*sjr < 0) {
            reason = "sjr < 0";
            return std::nullopt;
        }
        p.sjr = *sjr;
    }
    p.field = trim(row.get("FIELD").value_or(""));
    p.journal = trim(row.get("JOURNAL").value_or(""));
    return p;
}

template <typename T, typename ParseFn>
LoadResult<T> load_csv(const std::string& path, const char* const* required, std::size_t n_required, ParseFn parse) {
    CsvTable table = CsvTable::read_file(path);
    for (std::size_t i = 0; i < n_required; ++i) {
        if (!table.column(required[i])) {
            raise(ErrorCode::validation, std::string("missing required column ") + required[i] + " in " + path);
        }
    }
    LoadResult<T> result;
    for (const auto& row : table.rows()) {
        CsvRowView view;
        view.table = &table;
        view.row = &row;
        std::string reason;
        auto rec = parse(view, reason);
        if (rec) {
            result.records.push_back(std::move(*rec));
        } else {
            std::string id = row.fields.empty() ? std::string() : row.fields[0];
            result.rejects.push_back({row.line, id, reason});
        }
    }
    return result;
}

template <typename T, typename ParseFn>
LoadResult<T> load_jsonl(const std::string& path, ParseFn parse) {
    std::string text = read_text_file(path);
    LoadResult<T> result;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        nlohmann::json obj = nlohmann::json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object()) {
            result.rejects.push_back({lineno, "", "invalid JSON object"});
            continue;
        }
        JsonRowView view;
        view.obj = &obj;
        std::string reason;
        auto rec = parse(view, reason);
        if (rec) {
            result.records.push_back(std::move(*rec));
        } else {
            result.rejects.push_back({lineno, "", reason});
        }
    }
    return result;
}

} // namespace

AgencyKind agency_kind(const std::string& agency) {
    if (agency == "NSF") return AgencyKind::nsf;
    if (agency == "NIH") return AgencyKind::nih;
    return AgencyKind::other;
}

FileFormat parse_format(const std::string& s) {
    std::string t = to_lower(trim(s));
    if (t == "csv") return FileFormat::csv;
    if (t == "jsonl") return FileFormat::jsonl;
    raise(ErrorCode::usage, "unknown file format: " + s);
}

LoadResult<GrantRecord> load_grants(const std::string& path, FileFormat format) {
    if (format == FileFormat::csv) {
        return load_csv<GrantRecord>(path, kGrantColumns, std::size(kGrantColumns),
                                     [](const RowView& v, std::string& r) { return parse_grant(v, r); });
    }
    return load_jsonl<GrantRecord>(path, [](const RowView& v, std::string& r) { return parse_grant(v, r); });
}

LoadResult<PublicationRecord> load_publications(const std::string& path, FileFormat format) {
    if (format == FileFormat::csv) {
        return load_csv<PublicationRecord>(path, kPubColumns, std::size(kPubColumns),
                                           [](const RowView& v, std::string& r) { return parse_publication(v, r); });
    }
    return load_jsonl<PublicationRecord>(path, [](const RowView& v, std::string& r) { return parse_publication(v, r); });
}

std::vector<CitationEvent> load_citation_events(const std::string& path) {
    CsvTable table = CsvTable::read_file(path);
    for (const char* col : {"PUB_ID", "YEAR", "CITATIONS"}) {
        if (!table.column(col)) raise(ErrorCode::validation, std::string("missing required column ") + col + " in " + path);
    }
    std::size_t c_id = *table.column("PUB_ID");
    std::size_t c_year = *table.column("YEAR");
    std::size_t c_cites = *table.column("CITATIONS");
    std::vector<CitationEvent> events;
    for (const auto& row : table.rows()) {
        if (row.fields.size() <= std::max({c_id, c_year, c_cites})) continue;
        CitationEvent e;
        e.pub_id = trim(row.fields[c_id]);
        auto year = parse_int(row.fields[c_year]);
        auto cites = parse_int(row.fields[c_cites]);
        if (e.pub_id.empty() || !year || !cites || *cites < 0) continue;
        e.year = static_cast<int>(*year);
        e.citations = *cites;
        events.push_back(std::move(e));
    }
    return events;
}

GrantTable dedupe_earliest(const GrantTable& grants, const DedupeConfig& cfg) {
    std::optional<std::regex> strip;
    if (cfg.strip_suffix_regex && !cfg.strip_suffix_regex->empty()) {
        strip.emplace(*cfg.strip_suffix_regex);
    }
    auto key_of = [&](const GrantRecord& g) {
        std::string base = g.grant_id;
        if (strip) base = std::regex_replace(base, *strip, "");
        return g.agency + "\x1f" + base;
    };

    // winner per key: smallest fiscal_year, first occurrence on ties
    std::map<std::string, std::size_t> winner;
    for (std::size_t i = 0; i < grants.size(); ++i) {
        std::string key = key_of(grants[i]);
        auto it = winner.find(key);
        if (it == winner.end()) {
            winner.emplace(key, i);
        } else if (grants[i].fiscal_year < grants[it->second].fiscal_year) {
            it->second = i;
        }
    }
    std::vector<bool> keep(grants.size(), false);
    for (const auto& [key, idx] : winner) keep[idx] = true;
    GrantTable out;
    out.reserve(winner.size());
    for (std::size_t i = 0; i < grants.size(); ++i) {
        if (keep[i]) out.push_back(grants[i]);
    }
    return out;
}

LinkedDataset link(GrantTable grants, PublicationTable pubs) {
    LinkedDataset ds;
    ds.grants = std::move(grants);
    ds.publications = std::move(pubs);

    std::set<std::string> known;
    for (const auto& g : ds.grants) known.insert(g.grant_id);

    std::set<std::pair<std::string, std::size_t>> seen_pairs;
    for (std::size_t p = 0; p < ds.publications.size(); ++p) {
        const auto& pub = ds.publications[p];
        if (!pub.sjr) ++ds.pubs_missing_sjr;
        if (pub.field.empty()) ++ds.pubs_missing_field;
        for (const auto& gid : pub.grant_ids) {
            if (!known.count(gid)) {
                ++ds.orphan_count;
                ds.orphans.emplace_back(pub.pub_id, gid);
                continue;
            }
            if (seen_pairs.emplace(gid, p).second) {
                ds.grant_pubs[gid].push_back(p);
            }
        }
    }
    return ds;
}

void write_grants_csv(const std::string& path, const GrantTable& grants) {
    CsvWriter w(path);
    w.write_row({"GRANT_ID", "AGENCY", "PROGRAM", "DIVISION", "FY", "START_YEAR", "END_YEAR", "AWARD_AMOUNT_MUSD",
                 "PI_IDS", "SUMMARY"});
    for (const auto& g : grants) {
        std::string pis;
        for (std::size_t i = 0; i < g.pi_ids.size(); ++i) {
            if (i) pis += ";";
            pis += g.pi_ids[i];
        }
        w.write_row({g.grant_id, g.agency, g.program, g.division, std::to_string(g.fiscal_year),
                     std::to_string(g.start_year), std::to_string(g.end_year), format_double(g.award_amount), pis,
                     g.summary});
    }
}

void write_publications_csv(const std::string& path, const PublicationTable& pubs) {
    CsvWriter w(path);
    w.write_row({"PUB_ID", "GRANT_IDS", "PUB_YEAR", "CITATIONS", "SJR", "FIELD", "JOURNAL"});
    for (const auto& p : pubs) {
        std::string gids;
        for (std::size_t i = 0; i < p.grant_ids.size(); ++i) {
            if (i) gids += ";";
            gids += p.grant_ids[i];
        }
        w.write_row({p.pub_id, gids, std::to_string(p.pub_year), std::to_string(p.citations),
                     p.sjr ? format_double(*p.sjr) : std::string(), p.field, p.journal});
    }
}

void write_rejects_csv(const std::string& path, const std::vector<RejectedRow>& rejects) {
    CsvWriter w(path);
    w.write_row({"LINE", "ID", "REASON"});
    for (const auto& r : rejects) {
        w.write_row({std::to_string(r.line), r.id, r.reason});
    }
}

} // namespace grantnov
