#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "wugdef/labels.hpp"
#include "wugdef/lexicon.hpp"
#include "wugdef/wug.hpp"

namespace wugdef {

struct OverlapScore {
  std::string sense_id;
  std::size_t score = 0;
};

// Member usages' context tokens concatenated in ascending usage_id order.
std::vector<std::string> cluster_context(const WordUsageGraph& graph, const Cluster& cluster);

// Majority POS over member usages that carry one; nullopt when none do or
// when the top count is tied.
std::optional<std::string> cluster_pos(const WordUsageGraph& graph, const Cluster& cluster);

// Overlap of each candidate sense with the cluster context, in lexicon order:
// the number of distinct lowercased tokens shared by context and gloss.
std::vector<OverlapScore> lesk_scores(const WordUsageGraph& graph, const Cluster& cluster, const Lexicon& lex);

// Gloss of the highest-overlap candidate; ties go to the earlier sense.
// Throws Error{LemmaNotInLexicon} when the lexicon has no sense for the lemma.
ClusterLabel lesk_label(const WordUsageGraph& graph, const Cluster& cluster, const Lexicon& lex);

}  // namespace wugdef
