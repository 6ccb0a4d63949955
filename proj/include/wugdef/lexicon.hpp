#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wugdef {

struct Sense {
  std::string sense_id;
  std::string lemma;
  std::optional<std::string> pos;
  std::string gloss;
  std::vector<std::string> gloss_tokens;  // whitespace split of gloss

  bool operator==(const Sense&) const = default;
};

struct LexiconOptions {
  bool case_fold = true;     // lemma and POS lookups ignore ASCII case
  std::string language = "en";  // language of the glosses
};

// An inventory of senses indexed by lemma. The per-lemma order is the order
// senses were supplied in, and is the tie-break order used by the labelers.
class Lexicon {
 public:
  // Throws Error{DuplicateSenseId} or Error{EmptyField} (blank gloss).
  explicit Lexicon(std::vector<Sense> senses, LexiconOptions options = {});

  std::span<const Sense> all_senses() const { return senses_; }
  std::size_t size() const { return senses_.size(); }
  bool empty() const { return senses_.empty(); }
  const std::string& language() const { return options_.language; }

  // Senses of `lemma`, filtered by `pos` when given. If no sense matches the
  // POS, all senses of the lemma are returned. Empty for an unknown lemma.
  std::vector<Sense> senses_of(const std::string& lemma, const std::optional<std::string>& pos = std::nullopt) const;

  const Sense* find(const std::string& sense_id) const;
  // Position of the sense in the global sense order.
  std::size_t order_of(const std::string& sense_id) const;

 private:
  std::string key(const std::string& s) const;

  std::vector<Sense> senses_;
  LexiconOptions options_;
  std::map<std::string, std::vector<std::size_t>> by_lemma_;
  std::map<std::string, std::size_t> by_id_;
};

// TSV (header: sense_id, lemma, pos, gloss) or JSONL with the same keys,
// chosen by the .jsonl extension.
Lexicon load_lexicon(const std::filesystem::path& path, LexiconOptions options = {});

}  // namespace wugdef
