#include "wugdef/defgen.hpp"

#include <algorithm>
#include <future>
#include <thread>

#include "httplib.h"
#include "http_util.hpp"
#include "json_util.hpp"
#include "wugdef/error.hpp"
#include "wugdef/text.hpp"

namespace wugdef {
namespace {

constexpr std::string_view kUsage = "{usage}";
constexpr std::string_view kTarget = "{target}";

std::size_t count_occurrences(std::string_view s, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = s.find(needle); pos != std::string_view::npos; pos = s.find(needle, pos + needle.size())) ++n;
  return n;
}

}  // namespace

PromptTemplate::PromptTemplate(std::string language, std::string pattern)
    : language_(std::move(language)), pattern_(std::move(pattern)) {
  if (count_occurrences(pattern_, kUsage) != 1 || count_occurrences(pattern_, kTarget) != 1) {
    throw Error(ErrorCode::kInvalidTemplate,
                "prompt template must contain {usage} and {target} exactly once: '" + pattern_ + "'");
  }
}

PromptTemplate PromptTemplate::from_question(std::string language, std::string_view question) {
  return PromptTemplate(std::move(language), std::string(kUsage) + " " + std::string(question));
}

PromptTemplate PromptTemplate::native(std::string_view language) {
  if (language == "en") return from_question("en", "What is the definition of {target}?");
  if (language == "no" || language == "nb" || language == "nn") {
    return from_question(std::string(language), "Hva betyr {target}?");
  }
  if (language == "ru") return from_question("ru", "Что такое {target}?");
  if (language == "de") return from_question("de", "Was ist die Definition von {target}?");
  throw Error(ErrorCode::kInvalidTemplate, "no built-in prompt for language '" + std::string(language) + "'");
}

std::string PromptTemplate::render(std::string_view usage_text, std::string_view target) const {
  std::string out;
  std::string_view rest = pattern_;
  while (!rest.empty()) {
    auto u = rest.find(kUsage);
    auto t = rest.find(kTarget);
    auto next = std::min(u, t);
    if (next == std::string_view::npos) {
      out.append(rest);
      break;
    }
    out.append(rest.substr(0, next));
    if (next == u) {
      out.append(usage_text);
      rest.remove_prefix(next + kUsage.size());
    } else {
      out.append(target);
      rest.remove_prefix(next + kTarget.size());
    }
  }
  return out;
}

std::string build_prompt(const PromptTemplate& tpl, const Usage& usage) {
  return tpl.render(usage.text(), usage.target_token());
}

RemoteGenerator::RemoteGenerator(RemoteGeneratorOptions options) : options_(std::move(options)) {
  detail::parse_endpoint(options_.url, ErrorCode::kGeneratorUnavailable);
  if (options_.batch_size == 0) options_.batch_size = 1;
  if (options_.parallelism == 0) options_.parallelism = 1;
}

std::vector<std::string> RemoteGenerator::request_batch(std::span<const GenerationRequest> batch) const {
  const auto ep = detail::parse_endpoint(options_.url, ErrorCode::kGeneratorUnavailable);
  httplib::Client client(ep.origin);
  client.set_connection_timeout(options_.timeout_seconds, 0);
  client.set_read_timeout(options_.timeout_seconds, 0);
  std::vector<std::string> prompts;
  for (const auto& r : batch) prompts.push_back(r.prompt);
  const std::string body = nlohmann::json{{"prompts", prompts}, {"params", options_.params}}.dump();

  std::string last_error;
  for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(50 * attempt));
    auto res = client.Post(ep.base_path + "/generate", body, "application/json");
    if (!res) {
      last_error = "connection failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw Error(ErrorCode::kGeneratorUnavailable, "generator returned HTTP " + std::to_string(res->status));
    }
    try {
      auto defs = nlohmann::json::parse(res->body).at("definitions").get<std::vector<std::string>>();
      if (defs.size() != batch.size()) {
        throw Error(ErrorCode::kGeneratorUnavailable, "generator returned " + std::to_string(defs.size()) +
                                                          " definitions for " + std::to_string(batch.size()) +
                                                          " prompts");
      }
      return defs;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kGeneratorUnavailable, std::string("malformed /generate response: ") + e.what());
    }
  }
  throw Error(ErrorCode::kGeneratorUnavailable, "generator at " + options_.url + ": " + last_error);
}

std::vector<GenerationOutput> RemoteGenerator::generate(std::span<const GenerationRequest> requests) const {
  std::vector<std::span<const GenerationRequest>> batches;
  for (std::size_t start = 0; start < requests.size(); start += options_.batch_size) {
    batches.push_back(requests.subspan(start, std::min(options_.batch_size, requests.size() - start)));
  }
  std::vector<std::vector<std::string>> answers(batches.size());
  for (std::size_t wave = 0; wave < batches.size(); wave += options_.parallelism) {
    std::vector<std::future<std::vector<std::string>>> inflight;
    const std::size_t end = std::min(batches.size(), wave + options_.parallelism);
    for (std::size_t b = wave; b < end; ++b) {
      inflight.push_back(std::async(std::launch::async, [this, batch = batches[b]] { return request_batch(batch); }));
    }
    for (std::size_t b = wave; b < end; ++b) answers[b] = inflight[b - wave].get();
  }
  std::vector<GenerationOutput> out;
  out.reserve(requests.size());
  for (auto& a : answers) {
    for (auto& text : a) out.push_back({std::move(text), std::nullopt});
  }
  return out;
}

PregeneratedDefinitions::PregeneratedDefinitions(std::map<std::string, GenerationOutput> by_usage)
    : by_usage_(std::move(by_usage)) {}

PregeneratedDefinitions PregeneratedDefinitions::load(const std::filesystem::path& path) {
  std::map<std::string, GenerationOutput> rows;
  auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(i + 1);
    auto j = detail::parse_json(lines[i], where);
    auto id = detail::require_string(j, "usage_id");
    GenerationOutput o{detail::require_string(j, "definition"), detail::optional_string(j, "language")};
    if (!rows.emplace(id, std::move(o)).second) {
      throw Error(ErrorCode::kParse, where + ": duplicate usage_id '" + id + "'");
    }
  }
  return PregeneratedDefinitions(std::move(rows));
}

std::vector<GenerationOutput> PregeneratedDefinitions::generate(std::span<const GenerationRequest> requests) const {
  std::vector<GenerationOutput> out;
  std::vector<std::string> missing;
  for (const auto& r : requests) {
    auto it = by_usage_.find(r.usage_id);
    if (it == by_usage_.end()) {
      missing.push_back(r.usage_id);
      continue;
    }
    out.push_back(it->second);
  }
  if (!missing.empty()) {
    throw Error(ErrorCode::kMissingPregenerated, "no pre-generated definition for usage_id(s): " + join(missing, ", "));
  }
  return out;
}

std::vector<GenerationOutput> FunctionGenerator::generate(std::span<const GenerationRequest> requests) const {
  std::vector<GenerationOutput> out;
  out.reserve(requests.size());
  for (const auto& r : requests) out.push_back({fn_(r), std::nullopt});
  return out;
}

std::vector<GeneratedDefinition> generate_for_cluster(const WordUsageGraph& graph, const Cluster& cluster,
                                                      const PromptTemplate& tpl, const DefinitionSource& source) {
  std::vector<GenerationRequest> requests;
  for (const auto& id : cluster.member_ids) {
    requests.push_back({id, build_prompt(tpl, graph.usage(id)), tpl.language()});
  }
  auto outputs = source.generate(requests);
  if (outputs.size() != requests.size()) {
    throw Error(ErrorCode::kGeneratorUnavailable, source.name() + " returned " + std::to_string(outputs.size()) +
                                                      " outputs for " + std::to_string(requests.size()) + " usages");
  }
  std::vector<GeneratedDefinition> defs;
  std::vector<std::string> empty;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    auto text = trim(outputs[i].text);
    if (text.empty()) empty.push_back(requests[i].usage_id);
    defs.push_back({requests[i].usage_id, std::move(text), outputs[i].language.value_or(tpl.language())});
  }
  if (!empty.empty()) {
    throw Error(ErrorCode::kEmptyGeneration, "empty generation for usage_id(s): " + join(empty, ", "));
  }
  return defs;
}

GeneratedDefinition select_prototypical(std::span<const GeneratedDefinition> defs, const EmbeddingProvider& provider) {
  if (defs.empty()) throw Error(ErrorCode::kEmptyInput, "no definitions to select from");
  // Canonical order makes the centroid (and so the choice) independent of
  // the caller's ordering.
  std::vector<const GeneratedDefinition*> ordered;
  for (const auto& d : defs) ordered.push_back(&d);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto* a, const auto* b) { return a->usage_id < b->usage_id; });

  std::vector<std::string> unique;
  std::map<std::string, std::size_t> slot;
  std::vector<std::size_t> slot_of(ordered.size());
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    auto text = collapse_whitespace(ordered[i]->definition_text);
    auto [it, inserted] = slot.emplace(text, unique.size());
    if (inserted) unique.push_back(text);
    slot_of[i] = it->second;
  }
  const auto vectors = provider.embed_batch(unique);
  std::vector<Vector> occurrences;
  occurrences.reserve(ordered.size());
  for (auto s : slot_of) occurrences.push_back(vectors[s]);
  const Vector mean = centroid(occurrences);

  std::vector<double> sim(vectors.size());
  for (std::size_t s = 0; s < vectors.size(); ++s) sim[s] = cosine(vectors[s], mean);
  std::size_t best = 0;
  for (std::size_t i = 1; i < ordered.size(); ++i) {
    if (sim[slot_of[i]] > sim[slot_of[best]]) best = i;
  }
  return *ordered[best];
}

ClusterLabel defgen_label(const WordUsageGraph& graph, const Cluster& cluster, const PromptTemplate& tpl,
                          const DefinitionSource& source, const EmbeddingProvider& provider) {
  auto defs = generate_for_cluster(graph, cluster, tpl, source);
  auto chosen = select_prototypical(defs, provider);
  ClusterLabel label;
  label.lemma = graph.lemma;
  label.cluster_id = cluster.cluster_id;
  label.definition_text = chosen.definition_text;
  label.definition_language = chosen.definition_language;
  label.method = Method::kDefgen;
  label.generated = std::move(defs);
  return label;
}

}  // namespace wugdef
