#include "xintent/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

namespace xintent {

namespace detail {
extern const char* const kStopwords[];
extern const std::size_t kStopwordCount;
}  // namespace detail

namespace {

const std::unordered_set<std::string> kUposInventory = {
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET",  "INTJ", "NOUN", "NUM",
    "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X"};

const std::unordered_set<std::string> kDeprelInventory = {
    "acl",      "advcl",    "advmod",     "amod",       "appos",  "aux",
    "case",     "cc",       "ccomp",      "clf",        "compound", "conj",
    "cop",      "csubj",    "dep",        "det",        "discourse", "dislocated",
    "expl",     "fixed",    "flat",       "goeswith",   "iobj",   "list",
    "mark",     "nmod",     "nsubj",      "nummod",     "obj",    "obl",
    "orphan",   "parataxis", "punct",     "reparandum", "root",   "vocative",
    "xcomp"};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(s);
  while (std::getline(ss, item, sep)) out.push_back(item);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream ss(s);
  std::string item;
  while (ss >> item) out.push_back(item);
  return out;
}

std::string joined_forms(const std::vector<Token>& tokens) {
  std::string text;
  for (const Token& t : tokens) {
    if (!text.empty()) text += ' ';
    text += t.form;
  }
  return text;
}

void reject(IngestStats* stats, const std::string& id, const std::string& why) {
  if (stats == nullptr) return;
  stats->rejected += 1;
  stats->reject_reasons.push_back(id + ": " + why);
}

void add_record(Dataset& dataset, ParsedUtterance u, std::optional<Mask> mask) {
  if (std::find(dataset.labels.begin(), dataset.labels.end(), u.intent) ==
      dataset.labels.end()) {
    dataset.labels.push_back(u.intent);
  }
  dataset.records.push_back({std::move(u), std::move(mask)});
}

}  // namespace

std::string ascii_lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string normalize_deprel(const std::string& label) {
  std::string lower = ascii_lower(label);
  const std::size_t colon = lower.find(':');
  if (colon != std::string::npos) lower.resize(colon);
  if (lower == "dobj") return "obj";
  return lower;
}

bool is_universal_pos(const std::string& upos) { return kUposInventory.count(upos) > 0; }

bool is_universal_deprel(const std::string& deprel) {
  return kDeprelInventory.count(deprel) > 0;
}

const std::vector<std::string>& stopword_list() {
  static const std::vector<std::string> words(detail::kStopwords,
                                              detail::kStopwords + detail::kStopwordCount);
  return words;
}

const std::unordered_set<std::string>& stopword_set() {
  static const std::unordered_set<std::string> set(stopword_list().begin(),
                                                   stopword_list().end());
  return set;
}

bool is_stopword(const std::string& lowercased) {
  return stopword_set().count(lowercased) > 0;
}

std::optional<std::string> validate_utterance(const ParsedUtterance& u,
                                              std::size_t max_len) {
  const std::size_t m = u.tokens.size();
  if (m == 0) return "utterance has no tokens";
  if (m > max_len) {
    return "utterance has " + std::to_string(m) + " tokens, limit is " +
           std::to_string(max_len);
  }
  int root = -1;
  for (std::size_t i = 0; i < m; ++i) {
    const Token& t = u.tokens[i];
    if (t.index != static_cast<int>(i) + 1) {
      return "token indexes are not the sequence 1.." + std::to_string(m);
    }
    if (t.head < 0 || t.head > static_cast<int>(m)) {
      return "token " + std::to_string(t.index) + " has head " +
             std::to_string(t.head) + " outside [0," + std::to_string(m) + "]";
    }
    if (t.head == t.index) {
      return "token " + std::to_string(t.index) + " is its own head";
    }
    if (t.head == 0) {
      if (root != -1) return "more than one root token";
      root = t.index;
    }
    if (!is_universal_pos(t.upos)) {
      return "token " + std::to_string(t.index) + " has unknown POS tag '" + t.upos + "'";
    }
    if (!is_universal_deprel(t.deprel)) {
      return "token " + std::to_string(t.index) + " has unknown relation '" + t.deprel + "'";
    }
  }
  if (root == -1) return "no root token (head = 0) present";

  // Reachability from the root decides both connectivity and acyclicity.
  std::vector<std::vector<int>> children(m + 1);
  for (const Token& t : u.tokens) children[t.head].push_back(t.index);
  std::vector<bool> seen(m + 1, false);
  std::vector<int> stack = {root};
  seen[root] = true;
  std::size_t reached = 0;
  while (!stack.empty()) {
    const int node = stack.back();
    stack.pop_back();
    reached += 1;
    for (int child : children[node]) {
      if (!seen[child]) {
        seen[child] = true;
        stack.push_back(child);
      }
    }
  }
  if (reached != m) return "head indices do not form a single tree";

  if (u.slots.has_value() && u.slots->size() != m) {
    return "slots length " + std::to_string(u.slots->size()) +
           " does not match token count " + std::to_string(m);
  }
  return std::nullopt;
}

namespace {

struct Block {
  std::string sent_id;
  std::optional<std::string> text;
  std::optional<std::string> intent;
  std::optional<std::string> slots;
  std::vector<Token> tokens;
  std::string defect;  // first structural defect seen while scanning
  bool empty() const {
    return tokens.empty() && !text && !intent && !slots && sent_id.empty() &&
           defect.empty();
  }
};

void finish_block(Block& block, std::size_t ordinal, Dataset& dataset,
                  IngestStats* stats, std::size_t max_len) {
  const std::string id = block.sent_id.empty() ? "u" + std::to_string(ordinal)
                                               : block.sent_id;
  if (!block.defect.empty()) {
    reject(stats, id, block.defect);
    return;
  }
  if (!block.intent.has_value()) {
    reject(stats, id, "missing '# intent' metadata");
    return;
  }
  if (block.intent->find(kMultiIntentSeparator) != std::string::npos) {
    if (stats != nullptr) stats->multi_intent_dropped += 1;
    return;
  }
  if (block.tokens.empty()) {
    reject(stats, id, "utterance has no tokens");
    return;
  }

  ParsedUtterance u;
  u.id = id;
  u.intent = *block.intent;
  u.tokens = std::move(block.tokens);
  if (block.slots.has_value()) u.slots = split_ws(*block.slots);

  if (u.tokens.size() > max_len) {
    u.tokens.resize(max_len);
    if (u.slots.has_value() && u.slots->size() > max_len) u.slots->resize(max_len);
    if (stats != nullptr) stats->truncated += 1;
  }
  u.text = block.text.value_or(joined_forms(u.tokens));

  if (auto why = validate_utterance(u, max_len)) {
    reject(stats, id, *why);
    return;
  }
  if (stats != nullptr) stats->emitted += 1;
  add_record(dataset, std::move(u), std::nullopt);
}

}  // namespace

Dataset parse_conllu(std::istream& in, IngestStats* stats, std::size_t max_len) {
  Dataset dataset;
  Block block;
  std::size_t ordinal = 0;
  std::size_t line_no = 0;
  std::string line;

  auto flush = [&]() {
    if (block.empty()) return;
    ordinal += 1;
    finish_block(block, ordinal, dataset, stats, max_len);
    block = Block{};
  };

  while (std::getline(in, line)) {
    line_no += 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    if (line[0] == '#') {
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos) continue;  // plain comment
      std::string key = line.substr(1, eq - 1);
      std::string value = line.substr(eq + 1);
      auto trim = [](std::string& s) {
        const auto b = s.find_first_not_of(" \t");
        const auto e = s.find_last_not_of(" \t");
        s = (b == std::string::npos) ? std::string() : s.substr(b, e - b + 1);
      };
      trim(key);
      trim(value);
      if (key == "text") block.text = value;
      else if (key == "intent") block.intent = value;
      else if (key == "slots") block.slots = value;
      else if (key == "sent_id") block.sent_id = value;
      continue;
    }

    const std::vector<std::string> cols = split(line, '\t');
    if (cols.size() != 10) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected 10 tab-separated columns, got " +
                       std::to_string(cols.size()));
    }
    if (!block.defect.empty()) continue;  // already doomed, keep scanning

    const std::string& idcol = cols[0];
    if (idcol.find('-') != std::string::npos) {
      block.defect = "multiword token range '" + idcol + "' not supported";
      continue;
    }
    if (idcol.find('.') != std::string::npos) {
      block.defect = "empty node '" + idcol + "' not supported";
      continue;
    }
    Token t;
    try {
      t.index = std::stoi(idcol);
      t.head = std::stoi(cols[6]);
    } catch (const std::exception&) {
      block.defect = "non-numeric ID or HEAD column";
      continue;
    }
    t.form = cols[1];
    t.upos = cols[3];
    t.deprel = normalize_deprel(cols[7]);
    block.tokens.push_back(std::move(t));
  }
  flush();
  return dataset;
}

void write_jsonl(const Dataset& dataset, std::ostream& out) {
  for (const AnnotatedUtterance& record : dataset.records) {
    const ParsedUtterance& u = record.utterance;
    nlohmann::ordered_json j;
    j["id"] = u.id;
    nlohmann::ordered_json tokens = nlohmann::ordered_json::array();
    nlohmann::ordered_json upos = nlohmann::ordered_json::array();
    nlohmann::ordered_json head = nlohmann::ordered_json::array();
    nlohmann::ordered_json deprel = nlohmann::ordered_json::array();
    for (const Token& t : u.tokens) {
      tokens.push_back(t.form);
      upos.push_back(t.upos);
      head.push_back(t.head);
      deprel.push_back(t.deprel);
    }
    j["tokens"] = std::move(tokens);
    j["upos"] = std::move(upos);
    j["head"] = std::move(head);
    j["deprel"] = std::move(deprel);
    j["intent"] = u.intent;
    if (record.mask.has_value()) {
      nlohmann::ordered_json mask = nlohmann::ordered_json::array();
      for (std::uint8_t bit : *record.mask) mask.push_back(static_cast<int>(bit));
      j["explanation_mask"] = std::move(mask);
    }
    if (u.slots.has_value()) j["slots"] = *u.slots;
    out << j.dump() << '\n';
  }
}

Dataset read_jsonl(std::istream& in, IngestStats* stats, std::size_t max_len) {
  Dataset dataset;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    line_no += 1;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    std::string id = "line " + std::to_string(line_no);
    try {
      id = j.at("id").get<std::string>();
      ParsedUtterance u;
      u.id = id;
      u.intent = j.at("intent").get<std::string>();
      const auto& tokens = j.at("tokens");
      const auto& upos = j.at("upos");
      const auto& head = j.at("head");
      const auto& deprel = j.at("deprel");
      if (upos.size() != tokens.size() || head.size() != tokens.size() ||
          deprel.size() != tokens.size()) {
        reject(stats, id, "parallel arrays have mismatched lengths");
        continue;
      }
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        Token t;
        t.index = static_cast<int>(i) + 1;
        t.form = tokens[i].get<std::string>();
        t.upos = upos[i].get<std::string>();
        t.head = head[i].get<int>();
        t.deprel = normalize_deprel(deprel[i].get<std::string>());
        u.tokens.push_back(std::move(t));
      }
      if (j.contains("slots")) u.slots = j["slots"].get<std::vector<std::string>>();
      std::optional<Mask> mask;
      if (j.contains("explanation_mask")) {
        Mask bits;
        for (const auto& v : j["explanation_mask"]) {
          const int b = v.get<int>();
          if (b != 0 && b != 1) throw UserError("mask entries must be 0 or 1");
          bits.push_back(static_cast<std::uint8_t>(b));
        }
        if (bits.size() != u.tokens.size()) {
          reject(stats, id, "explanation_mask length does not match token count");
          continue;
        }
        mask = std::move(bits);
      }
      u.text = joined_forms(u.tokens);
      if (auto why = validate_utterance(u, max_len)) {
        reject(stats, id, *why);
        continue;
      }
      if (stats != nullptr) stats->emitted += 1;
      add_record(dataset, std::move(u), std::move(mask));
    } catch (const nlohmann::json::exception& e) {
      reject(stats, id, std::string("bad record: ") + e.what());
    } catch (const UserError& e) {
      reject(stats, id, e.what());
    }
  }
  return dataset;
}

}  // namespace xintent
