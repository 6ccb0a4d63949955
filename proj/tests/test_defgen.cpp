#include <algorithm>
#include <atomic>
#include <random>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "wugdef/defgen.hpp"
#include "wugdef/text.hpp"

using namespace wugdef;
using namespace wugdef::testing;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kIo;
}

const char* kEntscheidungPrompt =
    "Ist eine Prüfung erforderlich, ob eine Entscheidung getroffen werden muss? "
    "What is the definition of Entscheidung?";
const char* kEntscheidungAnswer = "The act of making up your mind about something; a decision.";

// Answers the Entscheidung prompt with the sample answer and anything else
// with "def:<prompt>". Responses to the first batch are delayed so batches
// complete out of order.
class FakeGenerator {
 public:
  FakeGenerator() {
    server_.Post("/generate", [this](const httplib::Request& req, httplib::Response& res) {
      auto body = nlohmann::json::parse(req.body);
      last_params = body.at("params").dump();
      ++requests;
      nlohmann::json defs = nlohmann::json::array();
      bool first_batch = false;
      for (const auto& p : body.at("prompts")) {
        auto s = p.get<std::string>();
        if (s.rfind("u00 ", 0) == 0) first_batch = true;
        defs.push_back(s == kEntscheidungPrompt ? std::string(kEntscheidungAnswer) : "def:" + s);
      }
      if (first_batch) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      res.set_content(nlohmann::json{{"definitions", defs}}.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeGenerator() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  std::atomic<int> requests{0};
  std::string last_params;

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

std::vector<GeneratedDefinition> defs_of(const std::vector<std::string>& texts) {
  std::vector<GeneratedDefinition> out;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    char id[16];
    std::snprintf(id, sizeof(id), "u%02zu", i);
    out.push_back({id, texts[i], "en"});
  }
  return out;
}

}  // namespace

TEST_CASE("prompt templates") {
  auto en = PromptTemplate::english();
  auto u = make_usage("u1", {"the", "bank", "was", "steep"}, 1, std::nullopt, "bank");
  CHECK(build_prompt(en, u) == "the bank was steep What is the definition of bank?");

  auto ru = PromptTemplate::native("ru");
  auto r = make_usage("r1", {"мир", "во", "всём", "мире"}, 0, std::nullopt, "мир");
  CHECK(build_prompt(ru, r) == "мир во всём мире Что такое мир?");
  CHECK(ru.language() == "ru");

  CHECK(build_prompt(PromptTemplate::native("nb"), u) == "the bank was steep Hva betyr bank?");
  CHECK(PromptTemplate::native("no").pattern() == PromptTemplate::native("nn").pattern());
  CHECK(PromptTemplate::from_question("ru", "Что такое {target}?").pattern() == ru.pattern());

  CHECK(code_of([] { PromptTemplate("en", "{usage} What is it?"); }) == ErrorCode::kInvalidTemplate);
  CHECK(code_of([] { PromptTemplate("en", "{usage} {target} {target}"); }) == ErrorCode::kInvalidTemplate);
  // placeholders inside the usage are not expanded again
  auto tricky = make_usage("u2", {"{target}", "bank"}, 1, std::nullopt, "bank");
  CHECK(build_prompt(en, tricky) == "{target} bank What is the definition of bank?");
}

TEST_CASE("generate_for_cluster with a mock generator") {
  auto g = make_graph("bank", {{0, 3}});
  FunctionGenerator mock([](const GenerationRequest&) { return "  sense of bank \n"; });
  auto defs = generate_for_cluster(g, g.clusters[0], PromptTemplate::english(), mock);
  REQUIRE(defs.size() == 3);
  CHECK(defs[0].usage_id == "bank_0_000");
  CHECK(defs[2].usage_id == "bank_0_002");
  CHECK(defs[1].definition_text == "sense of bank");
  CHECK(defs[1].definition_language == "en");

  FunctionGenerator blank([](const GenerationRequest& r) { return r.usage_id == "bank_0_001" ? "   " : "x"; });
  try {
    generate_for_cluster(g, g.clusters[0], PromptTemplate::english(), blank);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kEmptyGeneration);
    CHECK(std::string(e.what()).find("bank_0_001") != std::string::npos);
  }
}

TEST_CASE("pre-generated definitions") {
  TempDir tmp;
  auto g = make_graph("bank", {{0, 3}});
  write_file(tmp / "defs.jsonl",
             R"({"usage_id":"bank_0_000","definition":"a","language":"en"})"
             "\n"
             R"({"usage_id":"bank_0_002","definition":"b","language":"en"})"
             "\n");
  auto source = PregeneratedDefinitions::load(tmp / "defs.jsonl");
  try {
    generate_for_cluster(g, g.clusters[0], PromptTemplate::english(), source);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMissingPregenerated);
    CHECK(std::string(e.what()).find("bank_0_001") != std::string::npos);
  }
}

TEST_CASE("remote generator stores the answer verbatim and keeps request order") {
  FakeGenerator server;
  RemoteGeneratorOptions opts;
  opts.url = server.url();
  opts.params = {{"num_beams", 5}};
  opts.batch_size = 2;
  opts.parallelism = 3;
  RemoteGenerator gen(opts);

  std::vector<GenerationRequest> reqs{{"e", kEntscheidungPrompt, "en"}};
  auto out = gen.generate(reqs);
  REQUIRE(out.size() == 1);
  CHECK(out[0].text == kEntscheidungAnswer);
  CHECK(server.last_params == R"({"num_beams":5})");

  reqs.clear();
  for (int i = 0; i < 7; ++i) {
    char p[16];
    std::snprintf(p, sizeof(p), "u%02d x", i);
    reqs.push_back({std::to_string(i), p, "en"});
  }
  server.requests = 0;
  out = gen.generate(reqs);
  REQUIRE(out.size() == 7);
  for (int i = 0; i < 7; ++i) CHECK(out[i].text == "def:" + reqs[i].prompt);
  CHECK(server.requests == 4);
}

TEST_CASE("remote generator that is not running") {
  int port;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }
  RemoteGeneratorOptions opts;
  opts.url = "http://127.0.0.1:" + std::to_string(port);
  opts.max_retries = 0;
  opts.timeout_seconds = 2;
  std::vector<GenerationRequest> reqs{{"a", "p", "en"}};
  CHECK(code_of([&] { RemoteGenerator(opts).generate(reqs); }) == ErrorCode::kGeneratorUnavailable);
}

TEST_CASE("select_prototypical") {
  SUBCASE("single definition") {
    HashingEmbedder e;
    auto d = defs_of({"only one"});
    CHECK(select_prototypical(d, e) == d[0]);
  }
  SUBCASE("hand-computed cosines pick the third") {
    TableEmbedder e({{"a", Vector({1, 0})}, {"b", Vector({0, 1})}, {"c", Vector({0.6, 0.8})}});
    auto d = defs_of({"a", "b", "c"});
    CHECK(select_prototypical(d, e).definition_text == "c");
  }
  SUBCASE("two identical definitions beat the odd one") {
    HashingEmbedder e;
    auto d = defs_of({"a river edge", "money place", "a river edge"});
    auto pick = select_prototypical(d, e);
    CHECK(pick.definition_text == "a river edge");
    CHECK(pick.usage_id == "u00");
  }
  SUBCASE("duplicates are embedded once, whitespace is collapsed, raw text survives") {
    TableEmbedder e({{"a b", Vector({1, 0})}, {"c", Vector({0, 1})}});
    auto d = defs_of({"a  b", "c", "a b", "a\tb"});
    auto pick = select_prototypical(d, e);
    CHECK(e.texts_embedded == 2);
    CHECK(pick.usage_id == "u00");
    CHECK(pick.definition_text == "a  b");
  }
  SUBCASE("zero embedding") {
    TableEmbedder e({{"a", Vector({0, 0})}, {"b", Vector({0, 1})}});
    auto d = defs_of({"a", "b"});
    CHECK(code_of([&] { select_prototypical(d, e); }) == ErrorCode::kZeroVector);
  }
}

TEST_CASE("property: majority wins, scaling and permutation do not matter") {
  std::mt19937_64 rng(5);
  for (int n = 0; n < 100; ++n) {
    // equal norms, as every provider here emits unit vectors
    auto x = normalized(random_vector(rng, 4)), y = normalized(random_vector(rng, 4));
    const std::size_t m = 2 + rng() % 4, k = 1 + rng() % (m - 1);
    std::vector<std::string> texts(m, "x");
    texts.insert(texts.end(), k, "y");
    std::shuffle(texts.begin(), texts.end(), rng);
    TableEmbedder e({{"x", x}, {"y", y}});
    auto d = defs_of(texts);
    CHECK(select_prototypical(d, e).definition_text == "x");

    const double f = 0.5 + static_cast<double>(rng() % 50);
    TableEmbedder scaled_e({{"x", scaled(x, f)}, {"y", scaled(y, f)}});
    auto a = select_prototypical(d, e);
    CHECK(select_prototypical(d, scaled_e) == a);
    auto shuffled = d;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(select_prototypical(shuffled, e) == a);
  }
}

TEST_CASE("defgen_label composes generation and selection") {
  auto g = make_graph("bank", {{0, 5}});
  std::mt19937_64 rng(8);
  TableEmbedder e({});
  std::vector<std::string> ids;
  std::vector<Vector> vs;
  for (const auto& id : g.clusters[0].member_ids) {
    ids.push_back(id);
    vs.push_back(random_vector(rng, 5));
    e.set("def of " + id, vs.back());
  }
  FunctionGenerator mock([](const GenerationRequest& r) { return "def of " + r.usage_id; });
  auto label = defgen_label(g, g.clusters[0], PromptTemplate::english(), mock, e);
  CHECK(label.method == Method::kDefgen);
  CHECK(label.generated.size() == 5);
  CHECK(label.definition_text == "def of " + ids[oracle::prototype_oracle(ids, vs)]);
  CHECK_FALSE(label.sense_id);

  FunctionGenerator same([](const GenerationRequest&) { return "one meaning"; });
  HashingEmbedder h;
  CHECK(defgen_label(g, g.clusters[0], PromptTemplate::english(), same, h).definition_text == "one meaning");
}
