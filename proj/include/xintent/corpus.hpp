#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "xintent/errors.hpp"

namespace xintent {

inline constexpr std::size_t kDefaultMaxLen = 80;
inline constexpr char kMultiIntentSeparator = '#';

// One word of a dependency-parsed utterance. `index` is 1-based, `head` is
// the 1-based index of the governor (0 = attached to the artificial root).
struct Token {
  int index = 0;
  std::string form;
  std::string upos;
  int head = 0;
  std::string deprel;

  bool operator==(const Token&) const = default;
};

struct ParsedUtterance {
  std::string id;
  std::string text;
  std::vector<Token> tokens;
  std::string intent;
  std::optional<std::vector<std::string>> slots;  // BIO tags, opaque

  std::size_t size() const { return tokens.size(); }
  bool operator==(const ParsedUtterance&) const = default;
};

// Binary explanation signal aligned to tokens (1 = part of the explanation).
using Mask = std::vector<std::uint8_t>;

struct AnnotatedUtterance {
  ParsedUtterance utterance;
  std::optional<Mask> mask;  // engaged once annotated

  bool operator==(const AnnotatedUtterance&) const = default;
};

struct Dataset {
  std::vector<AnnotatedUtterance> records;
  std::vector<std::string> labels;  // distinct intents, first-appearance order

  bool operator==(const Dataset&) const = default;
};

// Ingestion bookkeeping: nothing is dropped silently.
struct IngestStats {
  std::size_t emitted = 0;
  std::size_t multi_intent_dropped = 0;
  std::size_t truncated = 0;
  std::size_t rejected = 0;
  std::vector<std::string> reject_reasons;  // "<id>: <why>"
};

// ASCII lowercase copy.
std::string ascii_lower(std::string s);

// Lowercases, strips the subtype after ':' and maps the legacy Stanford
// object label onto its universal name (dobj -> obj). Unknown labels pass
// through lowercased. Idempotent.
std::string normalize_deprel(const std::string& label);

// The 17-tag universal POS inventory and the 37 universal relation names
// records are validated against after normalization.
bool is_universal_pos(const std::string& upos);
bool is_universal_deprel(const std::string& deprel);

// Static English stopword list (179 words) embedded from data/stopwords_en.txt.
const std::vector<std::string>& stopword_list();
const std::unordered_set<std::string>& stopword_set();
bool is_stopword(const std::string& lowercased);

// Checks every ParsedUtterance invariant (index sequence, single root,
// acyclic connected heads, inventories, slot alignment, length bound).
// Returns an explanation for the first violation, or nullopt when valid.
std::optional<std::string> validate_utterance(const ParsedUtterance& u,
                                              std::size_t max_len = kDefaultMaxLen);

// Reads CoNLL-U sentence blocks ('# text', '# intent', optional '# slots'
// and '# sent_id' metadata). Multi-intent utterances (intent containing '#')
// are dropped and counted; over-long utterances are truncated to max_len and
// counted; records that violate invariants are rejected with a reason.
// Malformed column counts abort with a ParseError naming the line.
Dataset parse_conllu(std::istream& in, IngestStats* stats = nullptr,
                     std::size_t max_len = kDefaultMaxLen);

// Line-delimited record serialization. Schema per line:
//   {"id":.., "tokens":[..], "upos":[..], "head":[..], "deprel":[..],
//    "intent":.., "explanation_mask":[..]?, "slots":[..]?}
void write_jsonl(const Dataset& dataset, std::ostream& out);
Dataset read_jsonl(std::istream& in, IngestStats* stats = nullptr,
                   std::size_t max_len = kDefaultMaxLen);

}  // namespace xintent
