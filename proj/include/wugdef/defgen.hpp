#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "wugdef/embeddings.hpp"
#include "wugdef/labels.hpp"
#include "wugdef/wug.hpp"

namespace wugdef {

// Prompt pattern with exactly one {usage} and one {target} placeholder.
class PromptTemplate {
 public:
  // Throws Error{InvalidTemplate}.
  PromptTemplate(std::string language, std::string pattern);

  // "{usage} " followed by a question that mentions {target}.
  static PromptTemplate from_question(std::string language, std::string_view question);
  // Built-in native prompts for en, no (nb/nn), ru and de.
  static PromptTemplate native(std::string_view language);
  static PromptTemplate english() { return native("en"); }

  const std::string& language() const { return language_; }
  const std::string& pattern() const { return pattern_; }

  // Single-pass substitution; placeholder text inside the arguments is not
  // expanded again.
  std::string render(std::string_view usage_text, std::string_view target) const;

 private:
  std::string language_;
  std::string pattern_;
};

// Usage tokens joined by single spaces in place of {usage}, the token at
// target_index in place of {target}.
std::string build_prompt(const PromptTemplate& tpl, const Usage& usage);

struct GenerationRequest {
  std::string usage_id;
  std::string prompt;
  std::string language;  // prompt language
};

struct GenerationOutput {
  std::string text;
  std::optional<std::string> language;  // defaults to the prompt language
};

// Where per-usage definitions come from: a live generator or a file of
// pre-generated outputs. Implementations return one output per request, in
// request order.
class DefinitionSource {
 public:
  virtual ~DefinitionSource() = default;
  virtual std::vector<GenerationOutput> generate(std::span<const GenerationRequest> requests) const = 0;
  virtual std::string name() const = 0;
};

struct RemoteGeneratorOptions {
  std::string url;
  nlohmann::json params = nlohmann::json::object();  // forwarded untouched
  std::size_t batch_size = 16;
  std::size_t parallelism = 4;  // concurrent batch requests
  int max_retries = 2;
  int timeout_seconds = 300;
};

// Client for POST /generate {"prompts": [...], "params": {...}} ->
// {"definitions": [...]}. Batches may complete in any order; results are
// reassembled in request order.
class RemoteGenerator final : public DefinitionSource {
 public:
  explicit RemoteGenerator(RemoteGeneratorOptions options);
  std::vector<GenerationOutput> generate(std::span<const GenerationRequest> requests) const override;
  std::string name() const override { return "remote:" + options_.url; }

 private:
  std::vector<std::string> request_batch(std::span<const GenerationRequest> batch) const;

  RemoteGeneratorOptions options_;
};

// Definitions keyed by usage_id, read from JSONL rows
// {"usage_id", "definition", "language"}.
class PregeneratedDefinitions final : public DefinitionSource {
 public:
  explicit PregeneratedDefinitions(std::map<std::string, GenerationOutput> by_usage);
  static PregeneratedDefinitions load(const std::filesystem::path& path);

  // Throws Error{MissingPregenerated} naming every absent usage_id.
  std::vector<GenerationOutput> generate(std::span<const GenerationRequest> requests) const override;
  std::string name() const override { return "pregenerated"; }

 private:
  std::map<std::string, GenerationOutput> by_usage_;
};

// In-process generator backed by a callable; used for mocks and scripting.
class FunctionGenerator final : public DefinitionSource {
 public:
  using Fn = std::function<std::string(const GenerationRequest&)>;
  explicit FunctionGenerator(Fn fn, std::string name = "function") : fn_(std::move(fn)), name_(std::move(name)) {}
  std::vector<GenerationOutput> generate(std::span<const GenerationRequest> requests) const override;
  std::string name() const override { return name_; }

 private:
  Fn fn_;
  std::string name_;
};

// One trimmed definition per member usage, ascending usage_id. Blank outputs
// raise Error{EmptyGeneration} listing the affected usages.
std::vector<GeneratedDefinition> generate_for_cluster(const WordUsageGraph& graph, const Cluster& cluster,
                                                      const PromptTemplate& tpl, const DefinitionSource& source);

// The definition whose embedding has the highest cosine similarity to the
// mean embedding of all definitions. Texts are whitespace-collapsed before
// embedding; identical texts are embedded once but weigh once per occurrence
// in the mean. Ties go to the smallest usage_id.
GeneratedDefinition select_prototypical(std::span<const GeneratedDefinition> defs, const EmbeddingProvider& provider);

ClusterLabel defgen_label(const WordUsageGraph& graph, const Cluster& cluster, const PromptTemplate& tpl,
                          const DefinitionSource& source, const EmbeddingProvider& provider);

}  // namespace wugdef
