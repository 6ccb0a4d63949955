#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wugdef/embeddings.hpp"
#include "wugdef/labels.hpp"
#include "wugdef/lexicon.hpp"
#include "wugdef/wug.hpp"

namespace wugdef {

// Gloss embeddings in lexicon sense order.
struct GlossIndex {
  std::vector<std::string> sense_ids;
  std::vector<std::string> glosses;
  std::vector<Vector> vectors;
  std::string language;
  bool normalized = false;  // rows (and queries) are L2-normalized

  std::size_t size() const { return sense_ids.size(); }
  std::size_t dim() const { return vectors.empty() ? 0 : vectors.front().dim(); }
};

// Throws Error{EmptyLexicon}; provider errors propagate.
GlossIndex build_index(const Lexicon& lex, const EmbeddingProvider& provider, bool normalize = false);

// Exhaustive top-k by dot product, descending, ties by index order.
// |top_k| = min(k, index size). Throws Error{InvalidArgument} for k == 0 and
// Error{DimMismatch}.
RetrievalResult retrieve(const GlossIndex& index, const Vector& query, std::size_t k);

// Labels the cluster with the sense that appears in the most member usages'
// top-k lists (each usage counts a sense at most once). Ties go to the larger
// summed dot score, then to the earlier index position.
ClusterLabel retrieval_label(const WordUsageGraph& graph, const Cluster& cluster, const GlossIndex& index,
                             const EmbeddingProvider& provider, std::size_t k);

// Same decision rule over already-computed per-usage results.
ClusterLabel retrieval_label_from_results(const std::string& lemma, int cluster_id, const GlossIndex& index,
                                          std::vector<RetrievalResult> per_usage);

// Unordered usage pairs whose median judgment is exactly 1 and whose usages
// both sit in eligible clusters. Each pair is (smaller id, larger id).
std::vector<std::pair<std::string, std::string>> unrelated_labeled_pairs(const WordUsageGraph& graph,
                                                                         std::size_t min_size = 3);

struct KCollision {
  std::size_t k = 0;
  std::size_t pairs = 0;
  std::size_t collisions = 0;
  double probability = 0.0;
};

struct TuneKResult {
  std::size_t k = 0;
  std::vector<KCollision> per_k;  // in ascending k order
};

// For each candidate k, labels every eligible cluster, gives each member usage
// its cluster's definition, and measures how often usage pairs judged as
// unrelated (median score 1) end up with the same definition. Returns the k
// with the lowest rate; ties go to the smaller k.
// Throws Error{NoJudgedPairs} when no such pair exists.
TuneKResult tune_k(std::span<const WordUsageGraph> graphs, const GlossIndex& index, const EmbeddingProvider& provider,
                   std::vector<std::size_t> candidates = {1, 3, 10}, std::size_t min_size = 3);

}  // namespace wugdef
