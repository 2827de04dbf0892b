#ifndef GRANTNOV_CORPUS_HPP
#define GRANTNOV_CORPUS_HPP

#include <optional>
#include <string>

#include "grantnov/types.hpp"

namespace grantnov {

enum class FileFormat { csv, jsonl };

FileFormat parse_format(const std::string& s);

LoadResult<GrantRecord> load_grants(const std::string& path, FileFormat format);
LoadResult<PublicationRecord> load_publications(const std::string& path, FileFormat format);
std::vector<CitationEvent> load_citation_events(const std::string& path);

struct DedupeConfig {
    // Key is (agency, base id). With no regex the base id is the grant_id
    // verbatim; otherwise every match of the regex is stripped first, which
    // collapses continuation/suffix segments onto one base number.
    std::optional<std::string> strip_suffix_regex;
};

// keeps the earliest fiscal_year per duplicate key, first occurrence on ties,
// output in stable input order
GrantTable dedupe_earliest(const GrantTable& grants, const DedupeConfig& cfg = {});

LinkedDataset link(GrantTable grants, PublicationTable pubs);

void write_grants_csv(const std::string& path, const GrantTable& grants);
void write_publications_csv(const std::string& path, const PublicationTable& pubs);
void write_rejects_csv(const std::string& path, const std::vector<RejectedRow>& rejects);

} // namespace grantnov

#endif
