#include <sys/wait.h>

#include <cstdio>

#include "doctest.h"
#include "support/fixtures.hpp"
#include "wugdef/evalkit.hpp"
#include "wugdef/lesk.hpp"
#include "wugdef/text.hpp"

using namespace wugdef;
using namespace wugdef::testing;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

Run run(const std::string& args) {
  std::string cmd = std::string(WUGDEF_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = ::popen(cmd.c_str(), "r");
  REQUIRE(p);
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof(buf), p)) > 0) r.out.append(buf, n);
  int st = ::pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

// Two lemmas with POS-less usages whose tokens overlap chosen glosses.
void write_fixture(const TempDir& tmp) {
  std::vector<WordUsageGraph> graphs{make_graph("bank", {{0, 3}, {1, 4}, {2, 1}}), make_graph("plane", {{0, 3}, {1, 3}})};
  write_graphs(tmp / "graphs", graphs);
  write_file(tmp / "lexicon.tsv",
             "sense_id\tlemma\tpos\tgloss\n"
             "bank.1\tbank\tn\tsomething with c1 in it\n"
             "bank.2\tbank\tn\tsomething with c0 and n2\n"
             "plane.1\tplane\tn\ta c1 thing\n"
             "plane.2\tplane\tn\tanother thing\n");
}

}  // namespace

TEST_CASE("label --method lesk matches the library call") {
  TempDir tmp;
  write_fixture(tmp);
  auto r = run("label --method lesk --data " + q(tmp / "graphs") + " --lexicon " + q(tmp / "lexicon.tsv") +
               " --out " + q(tmp / "labels"));
  REQUIRE(r.status == 0);

  auto graphs = load_graphs(tmp / "graphs", GraphFormat::kNormalizedJsonl).graphs;
  auto lex = load_lexicon(tmp / "lexicon.tsv");
  std::vector<ClusterLabel> expected;
  for (const auto& g : graphs)
    for (const auto& c : eligible_clusters(g)) expected.push_back(lesk_label(g, c, lex));
  TempDir lib;
  auto paths = export_enriched(lib.path(), graphs, expected);
  REQUIRE(paths.size() == 2);
  for (const auto& p : paths) CHECK(read_file(tmp / "labels" / p.filename()) == read_file(p));
  CHECK(expected[0].sense_id == std::optional<std::string>("bank.2"));
}

TEST_CASE("build-eval is deterministic and score prints the report") {
  TempDir tmp;
  write_fixture(tmp);
  REQUIRE(run("label --method lesk --data " + q(tmp / "graphs") + " --lexicon " + q(tmp / "lexicon.tsv") + " --out " +
              q(tmp / "labels"))
              .status == 0);
  const std::string common = "build-eval --data " + q(tmp / "graphs") + " --labels " + q(tmp / "labels") + " --seed 7";
  REQUIRE(run(common + " --items " + q(tmp / "a.jsonl")).status == 0);
  REQUIRE(run(common + " --items " + q(tmp / "b.jsonl")).status == 0);
  CHECK(read_file(tmp / "a.jsonl") == read_file(tmp / "b.jsonl"));

  auto items = read_items(tmp / "a.jsonl");
  REQUIRE(items.size() == 4);
  std::string records;
  for (const auto& it : items) {
    AnnotationRecord rec{it.item_id, "x", it.presentation_order[0] == Slot::kTrue ? Choice::kFirst : Choice::kSecond,
                         std::nullopt, "t"};
    records += record_to_json(rec).dump() + "\n";
  }
  write_file(tmp / "records.jsonl", records);
  auto r = run("score --items " + q(tmp / "a.jsonl") + " --records " + q(tmp / "records.jsonl"));
  REQUIRE(r.status == 0);
  CHECK(r.out ==
        "dataset\tdefinition_language\tsystem\titems\taccuracy\tfits_both\tfits_none\tunresolved\n"
        "default\ten\tLesk\t4\t100.00\t0.00%\t0.00%\t0.00%\n");
}

TEST_CASE("stats, ingest and rouge") {
  TempDir tmp;
  write_fixture(tmp);
  auto s = run("stats --data " + q(tmp / "graphs"));
  REQUIRE(s.status == 0);
  CHECK(s.out == "collection\ttargets\tclusters\teligible\tdiachronic\nall\t2\t5\t4\tyes\n");

  REQUIRE(run("ingest --data " + q(tmp / "graphs") + " --out " + q(tmp / "copy")).status == 0);
  CHECK(read_file(tmp / "copy" / "bank.jsonl") == read_file(tmp / "graphs" / "bank.jsonl"));

  auto r = run("rouge --reference 'a b c d' --candidate 'a c'");
  REQUIRE(r.status == 0);
  CHECK(r.out == "recall\tprecision\tf\n0.500000\t1.000000\t0.666667\n");
}

TEST_CASE("errors give a nonzero exit") {
  TempDir tmp;
  write_fixture(tmp);
  CHECK(run("label --method lesk --data " + q(tmp / "graphs") + " --out " + q(tmp / "x")).status != 0);
  CHECK(run("label --method lesk --data " + q(tmp / "nowhere") + " --lexicon " + q(tmp / "lexicon.tsv") + " --out " +
            q(tmp / "x"))
            .status != 0);
  CHECK(run("label --method guess --data " + q(tmp / "graphs") + " --out " + q(tmp / "x")).status != 0);
  CHECK(run("score --items " + q(tmp / "none.jsonl") + " --records " + q(tmp / "none2.jsonl")).status != 0);
  CHECK(run("label --method defgen --data " + q(tmp / "graphs") + " --out " + q(tmp / "x")).status != 0);
  CHECK(run("").status != 0);
}
