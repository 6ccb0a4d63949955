#include <random>

#include "doctest.h"
#include "support/fixtures.hpp"
#include "wugdef/text.hpp"
#include "wugdef/wug.hpp"

using namespace wugdef;
using namespace wugdef::testing;

namespace {

const char* kOneGraph =
    R"({"lemma":"bank","language":"en","diachronic":true,)"
    R"("usages":[)"
    R"({"usage_id":"u1","lemma":"bank","pos":"NN","context_tokens":["the","bank","was","steep"],"target_index":1,"grouping":"1","language":"en"},)"
    R"({"usage_id":"u2","lemma":"bank","context_tokens":["river","bank"],"target_index":1,"grouping":"1","language":"en"},)"
    R"({"usage_id":"u3","lemma":"bank","context_tokens":["bank","loan"],"target_index":0,"grouping":"2","language":"en"},)"
    R"({"usage_id":"u4","lemma":"bank","context_tokens":["a","bank","account"],"target_index":1,"grouping":"2","language":"en"}],)"
    R"("judgments":[{"usage_a":"u1","usage_b":"u3","annotator":"a1","score":1}],)"
    R"("clusters":[{"cluster_id":1,"member_ids":["u3","u4"]},{"cluster_id":0,"member_ids":["u1","u2"]}]})";

void write_tsv_graph(const std::filesystem::path& dir, const std::string& clusters_body) {
  write_file(dir / "uses.csv",
             "identifier\tcontext\tindexes_target_token\tgrouping\tlemma\n"
             "a1\tThe river bank was steep\t10:14\t1\tbank\n"
             "a2\tShe went to the bank today\t16:20\t1\tbank\n"
             "a3\tБанк закрыт\t0:4\t2\tbank\n");
  write_file(dir / "judgments.csv",
             "identifier1\tidentifier2\tannotator\tjudgment\n"
             "a1\ta2\tx\t1.0\n"
             "a1\ta3\tx\t0\n");
  write_file(dir / "clusters.csv", clusters_body);
}

TsvMapping dwug_mapping() {
  return tsv_mapping_from_json(nlohmann::json::parse(R"({
    "language": "en", "diachronic": true,
    "uses": {"usage_id": "identifier", "context": "context", "target": "indexes_target_token",
             "target_position": "char_span", "grouping": "grouping", "lemma": "lemma"},
    "judgments": {"usage_a": "identifier1", "usage_b": "identifier2", "annotator": "annotator", "score": "judgment"},
    "clusters": {"usage_id": "identifier", "cluster_id": "cluster"}
  })"));
}

WordUsageGraph random_graph(std::mt19937_64& rng, int n) {
  std::vector<std::pair<int, std::size_t>> shapes;
  int clusters = 1 + static_cast<int>(rng() % 5);
  for (int c = 0; c < clusters; ++c) shapes.emplace_back(c == 0 && rng() % 3 == 0 ? -1 : c, 1 + rng() % 6);
  auto g = make_graph("lemma" + std::to_string(n), shapes, rng() % 2);
  std::vector<std::string> ids;
  for (const auto& [id, u] : g.usages) ids.push_back(id);
  for (int j = 0; j < 4; ++j) {
    auto a = ids[rng() % ids.size()], b = ids[rng() % ids.size()];
    if (a != b) g.judgments.push_back({a, b, "ann" + std::to_string(j), 1 + static_cast<int>(rng() % 4)});
  }
  // a usage outside every cluster
  add_usage(g, make_usage("zz_unclustered", {"x", "y"}, 1, std::string("NN"), g.lemma));
  return g;
}

}  // namespace

TEST_CASE("well-formed JSONL graph loads with its invariants") {
  TempDir tmp;
  write_file(tmp / "bank.jsonl", std::string(kOneGraph) + "\n");
  auto report = load_graphs(tmp / "bank.jsonl", GraphFormat::kNormalizedJsonl);
  REQUIRE(report.ok());
  REQUIRE(report.graphs.size() == 1);
  const auto& g = report.graphs[0];
  CHECK(g.usages.size() == 4);
  CHECK(g.clusters.size() == 2);
  CHECK(g.clusters[0].cluster_id == 0);  // sorted on load
  CHECK(g.usage("u1").pos == std::optional<std::string>("NN"));
  CHECK(g.usage("u2").pos == std::nullopt);
  CHECK(g.usage("u1").target_token() == "bank");
  CHECK_NOTHROW(validate_graph(g));
}

TEST_CASE("JSONL validation failures are collected per file") {
  TempDir tmp;
  std::string dup = kOneGraph;
  dup.replace(dup.find("\"u2\""), 4, "\"u1\"");
  write_file(tmp / "a.jsonl", dup + "\n");
  std::string dangling = kOneGraph;
  dangling.replace(dangling.find("[\"u3\",\"u4\"]"), 11, "[\"u3\",\"u9\"]");
  write_file(tmp / "b.jsonl", dangling + "\n");
  write_file(tmp / "c.jsonl", std::string(kOneGraph) + "\n");
  auto report = load_graphs(tmp.path(), GraphFormat::kNormalizedJsonl);
  CHECK(report.graphs.size() == 1);
  REQUIRE(report.failures.size() == 2);
  CHECK(report.failures[0].code == ErrorCode::kDuplicateUsageId);
  CHECK(report.failures[1].code == ErrorCode::kDanglingReference);
  CHECK(report.failures[1].message.find("u9") != std::string::npos);
}

TEST_CASE("graph invariants are enforced") {
  auto g = make_graph("w", {{0, 3}, {1, 2}});
  SUBCASE("target index out of range") {
    g.usages.begin()->second.target_index = 99;
    CHECK_THROWS_AS(validate_graph(g), Error);
  }
  SUBCASE("overlapping clusters") {
    g.clusters[1].member_ids.insert(*g.clusters[0].member_ids.begin());
    try {
      validate_graph(g);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kInvalidGraph);
    }
  }
  SUBCASE("judgment score outside 1..4") {
    auto a = g.usages.begin()->first, b = std::next(g.usages.begin())->first;
    g.judgments.push_back({a, b, "x", 5});
    CHECK_THROWS_AS(validate_graph(g), Error);
  }
  SUBCASE("self judgment") {
    auto a = g.usages.begin()->first;
    g.judgments.push_back({a, a, "x", 2});
    CHECK_THROWS_AS(validate_graph(g), Error);
  }
}

TEST_CASE("TSV ingestion through a column mapping") {
  TempDir tmp;
  const auto dir = tmp / "bank";
  write_tsv_graph(dir, "identifier\tcluster\na1\t0\na2\t1\na3\t-1\n");
  auto g = load_tsv_graph(dir, dwug_mapping());
  CHECK(g.lemma == "bank");
  CHECK(g.usage("a1").target_index == 2);
  CHECK(g.usage("a1").target_token() == "bank");
  CHECK(g.usage("a2").target_token() == "bank");
  // code-point offsets: "Банк" starts at 0
  CHECK(g.usage("a3").target_index == 0);
  // the 0 ("cannot decide") judgment is dropped
  REQUIRE(g.judgments.size() == 1);
  CHECK(g.judgments[0].score == 1);
  CHECK(g.clusters.size() == 3);
  CHECK(g.find_cluster(-1) != nullptr);
}

TEST_CASE("TSV cluster member missing from the uses table is a DanglingReference naming the id") {
  TempDir tmp;
  write_tsv_graph(tmp / "bank", "identifier\tcluster\na1\t0\nghost_id\t0\n");
  auto mapping = dwug_mapping();
  auto report = load_graphs(tmp.path(), GraphFormat::kTsv, &mapping);
  REQUIRE(report.failures.size() == 1);
  CHECK(report.failures[0].code == ErrorCode::kDanglingReference);
  CHECK(report.failures[0].message.find("ghost_id") != std::string::npos);
}

TEST_CASE("TSV missing mapped column") {
  TempDir tmp;
  write_tsv_graph(tmp / "bank", "identifier\tcluster_label\na1\t0\n");
  auto mapping = dwug_mapping();
  auto report = load_graphs(tmp / "bank", GraphFormat::kTsv, &mapping);
  REQUIRE(report.failures.size() == 1);
  CHECK(report.failures[0].code == ErrorCode::kMissingColumn);
  CHECK(report.failures[0].message.find("cluster") != std::string::npos);
}

TEST_CASE("TSV token-index targets and a {lemma} clusters path") {
  TempDir tmp;
  write_file(tmp / "data" / "Abend" / "uses.tsv", "id\ttext\tidx\nx1\tam späten Abend\t2\nx2\tder Abend\t1\n");
  write_file(tmp / "clusters" / "Abend.tsv", "id\tc\nx1\t3\nx2\t3\n");
  auto mapping = tsv_mapping_from_json(nlohmann::json::parse(R"({
    "language": "de", "diachronic": false,
    "uses": {"file": "uses.tsv", "usage_id": "id", "context": "text", "target": "idx", "target_position": "token_index"},
    "clusters": {"file": "../../clusters/{lemma}.tsv", "usage_id": "id", "cluster_id": "c"}
  })"));
  auto report = load_graphs(tmp / "data", GraphFormat::kTsv, &mapping);
  REQUIRE(report.ok());
  REQUIRE(report.graphs.size() == 1);
  const auto& g = report.graphs[0];
  CHECK(g.lemma == "Abend");
  CHECK(g.language == "de");
  CHECK_FALSE(g.diachronic);
  CHECK(g.usage("x1").target_token() == "Abend");
  CHECK(g.judgments.empty());
  CHECK(g.clusters.at(0).size() == 2);
}

TEST_CASE("mapping config requires a target position kind") {
  CHECK_THROWS_AS(tsv_mapping_from_json(nlohmann::json::parse(
                      R"({"language":"en","uses":{"usage_id":"a","context":"b","target":"c"}})")),
                  Error);
}

TEST_CASE("a Russian-shaped collection of 24 targets loads as 24 graphs") {
  TempDir tmp;
  std::string lines;
  for (int i = 0; i < 24; ++i) {
    auto g = make_graph("слово" + std::to_string(i), {{0, 3}, {1, 1}}, false);
    g.language = "ru";
    lines += serialize_graph(g) + "\n";
  }
  write_file(tmp / "rudsi.jsonl", lines);
  auto report = load_graphs(tmp / "rudsi.jsonl", GraphFormat::kNormalizedJsonl);
  REQUIRE(report.ok());
  CHECK(report.graphs.size() == 24);
  auto stats = graph_stats(report.graphs);
  CHECK(stats.targets == 24);
  CHECK_FALSE(stats.diachronic);
}

TEST_CASE("eligible_clusters") {
  SUBCASE("sizes {1,2,3,5} plus a -1 cluster of 7") {
    auto g = make_graph("w", {{4, 5}, {0, 1}, {-1, 7}, {1, 2}, {2, 3}});
    auto e = eligible_clusters(g);
    REQUIRE(e.size() == 2);
    CHECK(e[0].cluster_id == 2);
    CHECK(e[0].size() == 3);
    CHECK(e[1].cluster_id == 4);
    CHECK(e[1].size() == 5);
  }
  SUBCASE("nothing filtered when all clusters qualify") {
    auto g = make_graph("w", {{0, 3}, {1, 4}, {2, 9}});
    CHECK(eligible_clusters(g).size() == 3);
  }
  SUBCASE("no clusters") {
    WordUsageGraph g;
    CHECK(eligible_clusters(g).empty());
  }
  SUBCASE("other thresholds") {
    auto g = make_graph("w", {{0, 1}, {1, 2}, {2, 3}});
    CHECK(eligible_clusters(g, 1).size() == 3);
    CHECK(eligible_clusters(g, 4).empty());
  }
}

TEST_CASE("graph_stats") {
  SUBCASE("hand-counted fixture") {
    // 3 of 5 clusters eligible, then 1 of 2
    std::vector<WordUsageGraph> gs{make_graph("a", {{0, 3}, {1, 4}, {2, 5}, {3, 2}, {-1, 6}}),
                                   make_graph("b", {{0, 3}, {1, 1}})};
    auto row = graph_stats(gs);
    CHECK(row.targets == 2);
    CHECK(row.clusters == 7);
    CHECK(row.eligible == 4);
    CHECK(row.diachronic);
  }
  SUBCASE("zero graphs") {
    auto row = graph_stats({});
    CHECK(row.targets == 0);
    CHECK(row.clusters == 0);
    CHECK(row.eligible == 0);
    CHECK_FALSE(row.diachronic);
  }
  SUBCASE("per language") {
    auto a = make_graph("a", {{0, 3}});
    auto b = make_graph("b", {{0, 3}, {1, 3}});
    b.language = "de";
    std::vector<WordUsageGraph> gs{a, b};
    auto rows = graph_stats_by_language(gs);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].collection == "de");
    CHECK(rows[0].eligible == 2);
    CHECK(rows[1].collection == "en");
  }
}

TEST_CASE("property: JSONL round trip, disjointness, idempotent eligibility") {
  std::mt19937_64 rng(20240611);
  TempDir tmp;
  for (int n = 0; n < 100; ++n) {
    auto g = random_graph(rng, n);
    REQUIRE_NOTHROW(validate_graph(g));
    const auto path = tmp / ("g" + std::to_string(n) + ".jsonl");
    write_file(path, serialize_graph(g) + "\n");
    auto once = load_graphs(path, GraphFormat::kNormalizedJsonl);
    REQUIRE(once.ok());
    write_file(path, serialize_graph(once.graphs[0]) + "\n");
    auto twice = load_graphs(path, GraphFormat::kNormalizedJsonl);
    REQUIRE(twice.ok());
    CHECK(once.graphs[0] == twice.graphs[0]);
    CHECK(serialize_graph(once.graphs[0]) == serialize_graph(twice.graphs[0]));

    std::size_t members = 0;
    for (const auto& c : g.clusters) members += c.size();
    CHECK(members <= g.usages.size());

    auto e1 = eligible_clusters(g);
    WordUsageGraph only_eligible = g;
    only_eligible.clusters = e1;
    CHECK(eligible_clusters(only_eligible) == e1);
    for (std::size_t i = 1; i < e1.size(); ++i) CHECK(e1[i - 1].cluster_id < e1[i].cluster_id);
  }
}

TEST_CASE("write_graphs writes one file per graph") {
  TempDir tmp;
  std::vector<WordUsageGraph> gs{make_graph("a", {{0, 3}}), make_graph("b", {{0, 4}})};
  write_graphs(tmp / "out", gs);
  auto report = load_graphs(tmp / "out", GraphFormat::kNormalizedJsonl);
  REQUIRE(report.ok());
  CHECK(report.graphs == gs);
}
