#include "wugdef/lexicon.hpp"

#include "json_util.hpp"
#include "wugdef/error.hpp"
#include "wugdef/text.hpp"

namespace wugdef {

Lexicon::Lexicon(std::vector<Sense> senses, LexiconOptions options)
    : senses_(std::move(senses)), options_(std::move(options)) {
  for (std::size_t i = 0; i < senses_.size(); ++i) {
    auto& s = senses_[i];
    if (trim(s.gloss).empty()) throw Error(ErrorCode::kEmptyField, "sense '" + s.sense_id + "' has an empty gloss");
    if (s.gloss_tokens.empty()) s.gloss_tokens = split_whitespace(s.gloss);
    if (!by_id_.emplace(s.sense_id, i).second) {
      throw Error(ErrorCode::kDuplicateSenseId, "duplicate sense_id '" + s.sense_id + "'");
    }
    by_lemma_[key(s.lemma)].push_back(i);
  }
}

std::string Lexicon::key(const std::string& s) const { return options_.case_fold ? lowercase_ascii(s) : s; }

std::vector<Sense> Lexicon::senses_of(const std::string& lemma, const std::optional<std::string>& pos) const {
  std::vector<Sense> out;
  auto it = by_lemma_.find(key(lemma));
  if (it == by_lemma_.end()) return out;
  if (pos) {
    const auto want = key(*pos);
    for (auto i : it->second) {
      if (senses_[i].pos && key(*senses_[i].pos) == want) out.push_back(senses_[i]);
    }
    if (!out.empty()) return out;
  }
  for (auto i : it->second) out.push_back(senses_[i]);
  return out;
}

const Sense* Lexicon::find(const std::string& sense_id) const {
  auto it = by_id_.find(sense_id);
  return it == by_id_.end() ? nullptr : &senses_[it->second];
}

std::size_t Lexicon::order_of(const std::string& sense_id) const {
  auto it = by_id_.find(sense_id);
  if (it == by_id_.end()) throw Error(ErrorCode::kInvalidArgument, "unknown sense_id '" + sense_id + "'");
  return it->second;
}

Lexicon load_lexicon(const std::filesystem::path& path, LexiconOptions options) {
  std::vector<Sense> senses;
  auto make_pos = [](const std::string& p) {
    auto t = trim(p);
    return t.empty() ? std::optional<std::string>() : std::optional<std::string>(t);
  };
  if (path.extension() == ".jsonl") {
    auto lines = read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (trim(lines[i]).empty()) continue;
      const std::string where = path.string() + ":" + std::to_string(i + 1);
      auto j = detail::parse_json(lines[i], where);
      Sense s;
      s.sense_id = detail::require_string(j, "sense_id");
      s.lemma = detail::require_string(j, "lemma");
      s.pos = make_pos(detail::optional_string(j, "pos").value_or(""));
      s.gloss = detail::require_string(j, "gloss");
      senses.push_back(std::move(s));
    }
  } else {
    auto table = read_delimited(path, '\t');
    const auto c_id = table.column("sense_id");
    const auto c_lemma = table.column("lemma");
    const auto c_pos = table.column("pos");
    const auto c_gloss = table.column("gloss");
    for (const auto& row : table.rows) {
      senses.push_back({row[c_id], row[c_lemma], make_pos(row[c_pos]), row[c_gloss], {}});
    }
  }
  return Lexicon(std::move(senses), std::move(options));
}

}  // namespace wugdef
