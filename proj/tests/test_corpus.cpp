#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "xintent/corpus.hpp"
#include "xintent/errors.hpp"
#include "xintent/rng.hpp"

using namespace xintent;

namespace {

std::string fixture_path(const std::string& name) {
  return std::string(XINTENT_FIXTURE_DIR) + "/" + name;
}

Dataset load_fixture(const std::string& name, IngestStats* stats = nullptr) {
  std::ifstream in(fixture_path(name));
  REQUIRE(in.good());
  return parse_conllu(in, stats);
}

// Minimal well-formed block builder for malformed-input tests.
std::string block(const std::vector<std::string>& lines) {
  std::string out = "# text = placeholder\n# intent = demo\n";
  for (const auto& l : lines) out += l + "\n";
  out += "\n";
  return out;
}

std::string conllu_row(int index, const std::string& form, const std::string& upos,
                       int head, const std::string& deprel) {
  std::ostringstream os;
  os << index << "\t" << form << "\t" << form << "\t" << upos << "\t_\t_\t" << head
     << "\t" << deprel << "\t_\t_";
  return os.str();
}

}  // namespace

TEST_CASE("normalize_deprel lowercases, strips subtypes and maps dobj") {
  CHECK(normalize_deprel("Nsubj") == "nsubj");
  CHECK(normalize_deprel("nmod:poss") == "nmod");
  CHECK(normalize_deprel("dobj") == "obj");
  CHECK(normalize_deprel("DOBJ:prt") == "obj");
  CHECK(normalize_deprel("obl:tmod") == "obl");
  CHECK(normalize_deprel("root") == "root");
  CHECK(normalize_deprel("") == "");
}

TEST_CASE("normalize_deprel is idempotent over randomized labels") {
  const std::vector<std::string> bases = {"nsubj", "obj", "obl",  "dobj", "nmod",
                                          "acl",   "root", "flat", "compound"};
  const std::vector<std::string> subtypes = {"", ":poss", ":relcl", ":tmod", ":prt"};
  Rng rng(5);
  for (int i = 0; i < 500; ++i) {
    std::string label = bases[rng.below(bases.size())] + subtypes[rng.below(subtypes.size())];
    for (auto& ch : label) {
      if (rng.below(2) == 0) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    }
    const std::string once = normalize_deprel(label);
    CHECK(normalize_deprel(once) == once);
  }
}

TEST_CASE("stopword list matches the shipped data file") {
  const auto& list = stopword_list();
  CHECK(list.size() == 179);

  std::ifstream in(std::string(XINTENT_SOURCE_DIR) + "/data/stopwords_en.txt");
  REQUIRE(in.good());
  std::vector<std::string> expected;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) expected.push_back(line);
  }
  CHECK(list == expected);
}

TEST_CASE("stopword membership covers the words the annotator depends on") {
  for (const char* w : {"what", "where", "is", "the", "me", "a", "to", "i"}) {
    CHECK(is_stopword(w));
  }
  for (const char* w : {"need", "show", "flight", "book", "price", "play"}) {
    CHECK_FALSE(is_stopword(w));
  }
  // Membership is on lowercased forms; the set itself is lowercase.
  CHECK(stopword_set().count("what") == 1);
  CHECK(stopword_set().count("What") == 0);
}

TEST_CASE("parse_conllu reads the bundled fixtures") {
  IngestStats stats;
  const Dataset ds = load_fixture("worked_examples.conllu", &stats);
  CHECK(ds.records.size() == 5);
  CHECK(stats.emitted == 5);
  CHECK(stats.rejected == 0);
  CHECK(ds.records[0].utterance.id == "ex-watch");
  CHECK(ds.records[0].utterance.intent == "SearchCreativeWork");
  // Subtyped relations arrive normalized.
  for (const auto& rec : ds.records) {
    for (const auto& tok : rec.utterance.tokens) {
      CHECK(tok.deprel.find(':') == std::string::npos);
      CHECK(tok.deprel == normalize_deprel(tok.deprel));
    }
  }
  // Labels in first-appearance order, deduplicated.
  const std::vector<std::string> expected_labels = {"SearchCreativeWork", "BookRestaurant",
                                                    "atis-meal", "atis-ground-fare"};
  CHECK(ds.labels == expected_labels);
}

TEST_CASE("parse_conllu drops multi-intent utterances without rejecting them") {
  IngestStats stats;
  const Dataset ds = load_fixture("snips_style.conllu", &stats);
  CHECK(ds.records.size() == 12);
  CHECK(stats.emitted == 12);
  CHECK(stats.multi_intent_dropped == 1);
  CHECK(stats.rejected == 0);
  // The dropped record's intent never reaches the label inventory.
  for (const auto& label : ds.labels) CHECK(label.find('#') == std::string::npos);
}

TEST_CASE("parse_conllu aborts on a malformed column count") {
  std::istringstream in(block({"1\tHello\thello\tINTJ\t_\t_\t0\troot\t_"}));
  CHECK_THROWS_AS(parse_conllu(in), ParseError);
  try {
    std::istringstream again(block({"1\tHello\thello\tINTJ\t_\t_\t0\troot\t_"}));
    parse_conllu(again);
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("10") != std::string::npos);
  }
}

TEST_CASE("parse_conllu rejects structural defects with reasons") {
  struct Case {
    std::vector<std::string> rows;
    std::string needle;  // expected substring of the reject reason
  };
  const std::vector<Case> cases = {
      // Multiword token range.
      {{"1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_", conllu_row(1, "do", "AUX", 0, "root"),
        conllu_row(2, "not", "PART", 1, "advmod")},
       "multiword"},
      // Empty node.
      {{conllu_row(1, "ok", "VERB", 0, "root"), "1.1\tghost\t_\t_\t_\t_\t_\t_\t_\t_"},
       "empty node"},
      // Non-numeric head.
      {{"1\tok\tok\tVERB\t_\t_\tx\troot\t_\t_"}, "non-numeric"},
      // Head out of range.
      {{conllu_row(1, "ok", "VERB", 0, "root"), conllu_row(2, "now", "ADV", 5, "advmod")},
       "outside"},
      // Self-loop.
      {{conllu_row(1, "ok", "VERB", 0, "root"), conllu_row(2, "now", "ADV", 2, "advmod")},
       "own head"},
      // Two roots.
      {{conllu_row(1, "go", "VERB", 0, "root"), conllu_row(2, "stop", "VERB", 0, "root")},
       "root"},
      // No root at all (2 <-> 3 cycle off token 1 is impossible without head 0,
      // so drop the root row entirely).
      {{conllu_row(1, "a", "NOUN", 2, "obj"), conllu_row(2, "b", "VERB", 1, "obj")},
       "root"},
      // Unknown POS tag.
      {{conllu_row(1, "ok", "VRB", 0, "root")}, "POS"},
      // Unknown relation.
      {{conllu_row(1, "ok", "VERB", 0, "zzz")}, "relation"},
      // Non-contiguous indices.
      {{conllu_row(1, "ok", "VERB", 0, "root"), conllu_row(3, "now", "ADV", 1, "advmod")},
       "index"},
  };
  for (const auto& c : cases) {
    CAPTURE(c.needle);
    std::istringstream in(block(c.rows));
    IngestStats stats;
    const Dataset ds = parse_conllu(in, &stats);
    CHECK(ds.records.empty());
    CHECK(stats.rejected == 1);
    REQUIRE(stats.reject_reasons.size() == 1);
    CHECK(stats.reject_reasons[0].find(c.needle) != std::string::npos);
  }
}

TEST_CASE("parse_conllu rejects a block without an intent") {
  std::istringstream in("# text = hi\n" + std::string(conllu_row(1, "hi", "INTJ", 0, "root")) +
                        "\n\n");
  IngestStats stats;
  const Dataset ds = parse_conllu(in, &stats);
  CHECK(ds.records.empty());
  CHECK(stats.rejected == 1);
  REQUIRE(stats.reject_reasons.size() == 1);
  CHECK(stats.reject_reasons[0].find("intent") != std::string::npos);
}

TEST_CASE("parse_conllu truncates over-long utterances to max_len") {
  // A 85-token chain: token 1 is the root, token i attaches to i-1. Every
  // head survives truncation, so the record stays valid.
  std::ostringstream src;
  src << "# text = long\n# intent = demo\n# sent_id = long-1\n";
  src << conllu_row(1, "go", "VERB", 0, "root") << "\n";
  for (int i = 2; i <= 85; ++i) src << conllu_row(i, "w" + std::to_string(i), "NOUN", i - 1, "obj") << "\n";
  src << "\n";
  std::istringstream in(src.str());
  IngestStats stats;
  const Dataset ds = parse_conllu(in, &stats);
  REQUIRE(ds.records.size() == 1);
  CHECK(stats.truncated == 1);
  CHECK(ds.records[0].utterance.size() == kDefaultMaxLen);
  CHECK(ds.records[0].utterance.tokens.back().form == "w80");
  CHECK(validate_utterance(ds.records[0].utterance) == std::nullopt);
}

TEST_CASE("truncation that severs a head is rejected, not emitted") {
  // Token 2 attaches to token 81, which truncation removes.
  std::ostringstream src;
  src << "# text = long\n# intent = demo\n";
  src << conllu_row(1, "go", "VERB", 0, "root") << "\n";
  src << conllu_row(2, "w2", "NOUN", 81, "obj") << "\n";
  for (int i = 3; i <= 81; ++i) src << conllu_row(i, "w" + std::to_string(i), "NOUN", 1, "obj") << "\n";
  src << "\n";
  std::istringstream in(src.str());
  IngestStats stats;
  const Dataset ds = parse_conllu(in, &stats);
  CHECK(ds.records.empty());
  CHECK(stats.truncated == 1);
  CHECK(stats.rejected == 1);
}

TEST_CASE("validate_utterance accepts every fixture record") {
  for (const char* name : {"worked_examples.conllu", "snips_style.conllu"}) {
    const Dataset ds = load_fixture(name);
    for (const auto& rec : ds.records) {
      CHECK(validate_utterance(rec.utterance) == std::nullopt);
    }
  }
}

TEST_CASE("jsonl round trip is byte-stable and structure-preserving") {
  // Annotated snips fixture: exercises masks and the slots passthrough.
  IngestStats stats;
  Dataset ds = load_fixture("snips_style.conllu", &stats);
  // Attach a mask to half the records to cover both branches.
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    if (i % 2 == 0) ds.records[i].mask = Mask(ds.records[i].utterance.size(), 0);
    if (i % 2 == 0 && !ds.records[i].mask->empty()) (*ds.records[i].mask)[0] = 1;
  }

  std::ostringstream first;
  write_jsonl(ds, first);
  std::istringstream back(first.str());
  IngestStats rt_stats;
  const Dataset round = read_jsonl(back, &rt_stats);
  CHECK(rt_stats.rejected == 0);
  REQUIRE(round.records.size() == ds.records.size());
  CHECK(round.labels == ds.labels);
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    const auto& a = ds.records[i];
    const auto& b = round.records[i];
    CHECK(a.utterance.id == b.utterance.id);
    CHECK(a.utterance.tokens == b.utterance.tokens);
    CHECK(a.utterance.intent == b.utterance.intent);
    CHECK(a.utterance.slots == b.utterance.slots);
    CHECK(a.mask == b.mask);
  }

  // The schema does not carry the raw text, so equality is checked on a
  // second serialization instead: write(read(write(ds))) == write(ds).
  std::ostringstream second;
  write_jsonl(round, second);
  CHECK(first.str() == second.str());
}

TEST_CASE("read_jsonl rejects malformed records and aborts on broken JSON") {
  const std::string good =
      R"({"id":"a","tokens":["hi"],"upos":["INTJ"],"head":[0],"deprel":["root"],"intent":"x"})";

  SUBCASE("broken JSON is a hard parse error") {
    std::istringstream in(good + "\n{not json}\n");
    CHECK_THROWS_AS(read_jsonl(in), ParseError);
  }

  SUBCASE("mask with out-of-domain values is rejected") {
    std::istringstream in(
        R"({"id":"a","tokens":["hi"],"upos":["INTJ"],"head":[0],"deprel":["root"],"intent":"x","explanation_mask":[2]})"
        "\n");
    IngestStats stats;
    const Dataset ds = read_jsonl(in, &stats);
    CHECK(ds.records.empty());
    CHECK(stats.rejected == 1);
    CHECK(stats.reject_reasons[0].find("mask") != std::string::npos);
  }

  SUBCASE("mask length mismatch is rejected") {
    std::istringstream in(
        R"({"id":"a","tokens":["hi"],"upos":["INTJ"],"head":[0],"deprel":["root"],"intent":"x","explanation_mask":[1,0]})"
        "\n");
    IngestStats stats;
    const Dataset ds = read_jsonl(in, &stats);
    CHECK(ds.records.empty());
    CHECK(stats.rejected == 1);
  }

  SUBCASE("parallel array length mismatch is rejected") {
    std::istringstream in(
        R"({"id":"a","tokens":["hi","there"],"upos":["INTJ"],"head":[0,1],"deprel":["root","discourse"],"intent":"x"})"
        "\n");
    IngestStats stats;
    const Dataset ds = read_jsonl(in, &stats);
    CHECK(ds.records.empty());
    CHECK(stats.rejected == 1);
  }

  SUBCASE("missing required field is rejected") {
    std::istringstream in(
        R"({"id":"a","tokens":["hi"],"upos":["INTJ"],"head":[0],"deprel":["root"]})"
        "\n");
    IngestStats stats;
    const Dataset ds = read_jsonl(in, &stats);
    CHECK(ds.records.empty());
    CHECK(stats.rejected == 1);
  }
}

TEST_CASE("read_jsonl never emits a record that fails validation") {
  // Randomized adversarial records: whatever survives ingestion must pass
  // validate_utterance and carry an aligned 0/1 mask.
  Rng rng(99);
  const std::vector<std::string> upos_pool = {"NOUN", "VERB", "PROPN", "XX", ""};
  const std::vector<std::string> rel_pool = {"root", "obj", "nsubj", "zzz", ""};
  std::ostringstream lines;
  for (int i = 0; i < 400; ++i) {
    const int m = 1 + static_cast<int>(rng.below(5));
    std::string toks, upos, heads, rels, mask;
    for (int t = 0; t < m; ++t) {
      const std::string sep = t ? "," : "";
      toks += sep + "\"w" + std::to_string(t) + "\"";
      upos += sep + "\"" + upos_pool[rng.below(upos_pool.size())] + "\"";
      heads += sep + std::to_string(static_cast<int>(rng.below(m + 3)) - 1);
      rels += sep + "\"" + rel_pool[rng.below(rel_pool.size())] + "\"";
      mask += sep + std::to_string(rng.below(3));
    }
    lines << "{\"id\":\"r" << i << "\",\"tokens\":[" << toks << "],\"upos\":[" << upos
          << "],\"head\":[" << heads << "],\"deprel\":[" << rels << "],\"intent\":\"x\"";
    if (rng.below(2) == 0) lines << ",\"explanation_mask\":[" << mask << "]";
    lines << "}\n";
  }
  std::istringstream in(lines.str());
  IngestStats stats;
  const Dataset ds = read_jsonl(in, &stats);
  CHECK(stats.emitted + stats.rejected == 400);
  for (const auto& rec : ds.records) {
    CHECK(validate_utterance(rec.utterance) == std::nullopt);
    if (rec.mask) {
      CHECK(rec.mask->size() == rec.utterance.size());
      for (auto v : *rec.mask) CHECK((v == 0 || v == 1));
    }
  }
}

TEST_CASE("ascii_lower folds only ASCII letters") {
  CHECK(ascii_lower("HeLLo") == "hello");
  CHECK(ascii_lower("ABC-123") == "abc-123");
  CHECK(ascii_lower("") == "");
}
