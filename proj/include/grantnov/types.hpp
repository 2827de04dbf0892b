#ifndef GRANTNOV_TYPES_HPP
#define GRANTNOV_TYPES_HPP

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace grantnov {

enum class AgencyKind { nsf, nih, other };

AgencyKind agency_kind(const std::string& agency);

struct GrantRecord {
    std::string grant_id;
    std::string agency; // canonical tag: "NSF", "NIH", or verbatim
    std::string program;
    std::string division;
    int fiscal_year = 0;
    int start_year = 0;
    int end_year = 0;
    double award_amount = 0.0; // millions of dollars
    std::vector<std::string> pi_ids;
    std::string summary;
};

struct PublicationRecord {
    std::string pub_id;
    std::vector<std::string> grant_ids;
    int pub_year = 0;
    long long citations = 0;
    std::optional<double> sjr;
    std::string field; // empty = missing
    std::string journal;
};

struct RejectedRow {
    std::size_t line = 0;
    std::string id;
    std::string reason;
};

template <typename T>
struct LoadResult {
    std::vector<T> records;
    std::vector<RejectedRow> rejects;
};

using GrantTable = std::vector<GrantRecord>;
using PublicationTable = std::vector<PublicationRecord>;

struct LinkedDataset {
    GrantTable grants;
    PublicationTable publications;
    // grant_id -> indices into publications
    std::map<std::string, std::vector<std::size_t>> grant_pubs;
    std::size_t orphan_count = 0;
    std::vector<std::pair<std::string, std::string>> orphans; // (pub_id, unknown grant_id)
    std::size_t pubs_missing_sjr = 0;
    std::size_t pubs_missing_field = 0;
};

// per-publication citation-accrual events for the dynamics study
struct CitationEvent {
    std::string pub_id;
    int year = 0;
    long long citations = 0; // citations received in that year
};

} // namespace grantnov

#endif
