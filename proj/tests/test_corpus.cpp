#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "grantnov/corpus.hpp"
#include "grantnov/csv.hpp"
#include "grantnov/error.hpp"

using namespace grantnov;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    return path.string();
}

const char* kHeader = "GRANT_ID,AGENCY,PROGRAM,DIVISION,FY,START_YEAR,END_YEAR,AWARD_AMOUNT_MUSD,PI_IDS,SUMMARY\n";

GrantRecord make_grant(const std::string& id, const std::string& agency, int fy) {
    GrantRecord g;
    g.grant_id = id;
    g.agency = agency;
    g.fiscal_year = fy;
    g.start_year = fy;
    g.end_year = fy + 2;
    g.award_amount = 1.0;
    g.pi_ids = {"PI1"};
    g.summary = "a summary";
    return g;
}

} // namespace

TEST_CASE("load_grants: well-formed csv") {
    const std::string path = write_temp("gn_grants_ok.csv", std::string(kHeader) +
        "G1,NSF,STD,DIV1,2010,2010,2012,1.5,PI1;PI2,solar research\n"
        "G2,nsf,STD,DIV1,2011,2011,2013,0.5,PI3,wind research\n"
        "G3,NIH,R01,IC1,2012,2012,2014,2.0,PI4,protein research\n");
    auto result = load_grants(path, FileFormat::csv);
    REQUIRE(result.records.size() == 3);
    CHECK(result.rejects.empty());
    CHECK(result.records[0].pi_ids == std::vector<std::string>{"PI1", "PI2"});
    CHECK(result.records[1].agency == "NSF"); // canonicalized
    CHECK(result.records[2].agency == "NIH");
}

TEST_CASE("load_grants: invariant violations become rejects with reasons") {
    const std::string path = write_temp("gn_grants_bad.csv", std::string(kHeader) +
        "G1,NSF,STD,DIV1,2010,2010,2012,-1.0,PI1,ok summary\n"
        "G2,NSF,STD,DIV1,1850,2010,2012,1.0,PI1,ok summary\n"
        "G3,NSF,STD,DIV1,2010,2010,2012,1.0,PI1,\n"
        ",NSF,STD,DIV1,2010,2010,2012,1.0,PI1,ok summary\n"
        "G5,NSF,STD,DIV1,2010,2010,2012,1.0,PI1,fine summary\n");
    auto result = load_grants(path, FileFormat::csv);
    CHECK(result.records.size() == 1);
    REQUIRE(result.rejects.size() == 4);
    CHECK(result.rejects[0].reason == "award_amount < 0");
    CHECK(result.rejects[1].reason == "FY outside [1900, 2100]");
    CHECK(result.rejects[2].reason == "summary empty");
    CHECK(result.rejects[3].reason == "grant_id empty");
    CHECK(result.rejects[0].line == 2); // 1-based, header is line 1
}

TEST_CASE("load_grants: missing required column errors by name") {
    const std::string path = write_temp("gn_grants_nocol.csv",
        "GRANT_ID,AGENCY,PROGRAM,DIVISION,FY,START_YEAR,END_YEAR,AWARD_AMOUNT_MUSD,PI_IDS\n"
        "G1,NSF,STD,DIV1,2010,2010,2012,1.0,PI1\n");
    CHECK_THROWS_WITH_AS(load_grants(path, FileFormat::csv), doctest::Contains("SUMMARY"), Error);
}

TEST_CASE("load_grants: missing file") {
    CHECK_THROWS_AS(load_grants("/nonexistent/grants.csv", FileFormat::csv), Error);
}

TEST_CASE("load_grants: jsonl format") {
    const std::string path = write_temp("gn_grants.jsonl",
        R"({"grant_id":"G1","agency":"NSF","program":"STD","division":"D","fy":2010,"start_year":2010,"end_year":2012,"award_amount_musd":1.25,"pi_ids":["PI1","PI2"],"summary":"deep space survey"})"
        "\n"
        R"(not json)"
        "\n");
    auto result = load_grants(path, FileFormat::jsonl);
    REQUIRE(result.records.size() == 1);
    CHECK(result.records[0].award_amount == doctest::Approx(1.25));
    CHECK(result.records[0].pi_ids.size() == 2);
    REQUIRE(result.rejects.size() == 1);
    CHECK(result.rejects[0].line == 2);
}

TEST_CASE("load_publications: missing sjr kept, negative values rejected") {
    const std::string path = write_temp("gn_pubs.csv",
        "PUB_ID,GRANT_IDS,PUB_YEAR,CITATIONS,SJR,FIELD,JOURNAL\n"
        "P1,G1;G2,2012,10,1.5,Physics,J1\n"
        "P2,G1,2013,0,,Physics,J2\n"
        "P3,G1,2013,-1,1.0,Physics,J3\n"
        "P4,G1,2013,5,-0.5,Physics,J4\n");
    auto result = load_publications(path, FileFormat::csv);
    REQUIRE(result.records.size() == 2);
    CHECK(result.records[0].grant_ids == std::vector<std::string>{"G1", "G2"});
    CHECK_FALSE(result.records[1].sjr.has_value());
    REQUIRE(result.rejects.size() == 2);
    CHECK(result.rejects[0].reason == "citations < 0");
    CHECK(result.rejects[1].reason == "sjr < 0");
}

TEST_CASE("dedupe_earliest keeps the earliest fiscal year") {
    GrantTable grants = {make_grant("A", "NSF", 2011), make_grant("A", "NSF", 2009), make_grant("B", "NSF", 2010)};
    auto out = dedupe_earliest(grants);
    REQUIRE(out.size() == 2);
    CHECK(out[0].grant_id == "A");
    CHECK(out[0].fiscal_year == 2009);
    CHECK(out[1].grant_id == "B");
}

TEST_CASE("dedupe_earliest: no duplicates is the identity") {
    GrantTable grants = {make_grant("A", "NSF", 2010), make_grant("B", "NSF", 2011)};
    auto out = dedupe_earliest(grants);
    REQUIRE(out.size() == 2);
    CHECK(out[0].grant_id == "A");
    CHECK(out[1].grant_id == "B");
}

TEST_CASE("dedupe_earliest: same year ties keep the first occurrence") {
    GrantTable grants = {make_grant("A", "NSF", 2010), make_grant("A", "NSF", 2010)};
    grants[0].program = "first";
    grants[1].program = "second";
    auto out = dedupe_earliest(grants);
    REQUIRE(out.size() == 1);
    CHECK(out[0].program == "first");
}

TEST_CASE("dedupe_earliest: same id in different agencies is not a duplicate") {
    GrantTable grants = {make_grant("A", "NSF", 2010), make_grant("A", "NIH", 2012)};
    CHECK(dedupe_earliest(grants).size() == 2);
}

TEST_CASE("dedupe_earliest with a continuation-suffix regex") {
    GrantTable grants = {make_grant("5R01-A1", "NIH", 2012), make_grant("5R01-A2", "NIH", 2010)};
    DedupeConfig cfg;
    cfg.strip_suffix_regex = "-A[0-9]+$";
    auto out = dedupe_earliest(grants, cfg);
    REQUIRE(out.size() == 1);
    CHECK(out[0].fiscal_year == 2010);
}

TEST_CASE("dedupe_earliest is idempotent and never grows") {
    GrantTable grants;
    for (int i = 0; i < 20; ++i) grants.push_back(make_grant("G" + std::to_string(i % 7), "NSF", 2010 + i % 4));
    auto once = dedupe_earliest(grants);
    auto twice = dedupe_earliest(once);
    CHECK(once.size() <= grants.size());
    REQUIRE(once.size() == twice.size());
    for (std::size_t i = 0; i < once.size(); ++i) {
        CHECK(once[i].grant_id == twice[i].grant_id);
        CHECK(once[i].fiscal_year == twice[i].fiscal_year);
    }
}

TEST_CASE("link builds the inverse index and reports orphans") {
    GrantTable grants = {make_grant("G1", "NSF", 2010), make_grant("G2", "NSF", 2011)};
    PublicationTable pubs(3);
    pubs[0].pub_id = "P1";
    pubs[0].grant_ids = {"G1"};
    pubs[1].pub_id = "P2";
    pubs[1].grant_ids = {"G1", "G2"};
    pubs[2].pub_id = "P3";
    pubs[2].grant_ids = {"GX"};
    for (auto& p : pubs) {
        p.pub_year = 2012;
        p.citations = 1;
    }

    auto ds = link(grants, pubs);
    REQUIRE(ds.grant_pubs.count("G1"));
    CHECK(ds.grant_pubs.at("G1") == std::vector<std::size_t>{0, 1});
    CHECK(ds.grant_pubs.at("G2") == std::vector<std::size_t>{1}); // multi-grant pub under both
    CHECK(ds.orphan_count == 1);
    REQUIRE(ds.orphans.size() == 1);
    CHECK(ds.orphans[0].first == "P3");

    // inverting the index reproduces the pub -> grant lists
    for (const auto& [gid, pub_idxs] : ds.grant_pubs) {
        for (std::size_t p : pub_idxs) {
            const auto& ids = ds.publications[p].grant_ids;
            CHECK(std::find(ids.begin(), ids.end(), gid) != ids.end());
        }
    }
}

TEST_CASE("link drops duplicate (grant, pub) pairs") {
    GrantTable grants = {make_grant("G1", "NSF", 2010)};
    PublicationTable pubs(1);
    pubs[0].pub_id = "P1";
    pubs[0].grant_ids = {"G1", "G1"};
    pubs[0].pub_year = 2011;
    auto ds = link(grants, pubs);
    CHECK(ds.grant_pubs.at("G1").size() == 1);
}

TEST_CASE("grants csv round-trips through write and load") {
    GrantTable grants = {make_grant("G1", "NSF", 2010)};
    grants[0].summary = "contains, a comma and \"quotes\"";
    const auto path = (std::filesystem::temp_directory_path() / "gn_roundtrip.csv").string();
    write_grants_csv(path, grants);
    auto loaded = load_grants(path, FileFormat::csv);
    REQUIRE(loaded.records.size() == 1);
    CHECK(loaded.records[0].summary == grants[0].summary);
    CHECK(loaded.records[0].award_amount == grants[0].award_amount);
}

TEST_CASE("citation events loader") {
    const std::string path = write_temp("gn_events.csv",
        "PUB_ID,YEAR,CITATIONS\n"
        "P1,2012,3\n"
        "P1,2013,5\n");
    auto events = load_citation_events(path);
    REQUIRE(events.size() == 2);
    CHECK(events[1].citations == 5);
}
