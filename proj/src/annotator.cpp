#include "xintent/annotator.hpp"

namespace xintent {

int main_predicate(const ParsedUtterance& utterance) {
  for (const Token& t : utterance.tokens) {
    if (t.head == 0) return t.index;
  }
  return 0;  // unreachable for validated input
}

std::vector<TraversalTrace::Level1Hit> level1_arguments(const ParsedUtterance& utterance,
                                                        int root) {
  std::vector<TraversalTrace::Level1Hit> hits;
  for (const Token& t : utterance.tokens) {
    if (t.head != root) continue;
    const bool admitted = t.deprel == "obj" || t.deprel == "xcomp" ||
                          ((t.deprel == "nsubj" || t.deprel == "obl") && t.upos == "NOUN");
    if (admitted) hits.push_back({t.index, t.deprel});
  }
  return hits;
}

std::vector<int> compound_expansion(const ParsedUtterance& utterance,
                                    const std::vector<TraversalTrace::Level1Hit>& level1) {
  std::vector<int> found;
  for (const Token& t : utterance.tokens) {
    if (t.deprel != "compound" || t.upos == "PROPN") continue;
    for (const auto& hit : level1) {
      if (t.head == hit.index) {
        found.push_back(t.index);
        break;
      }
    }
  }
  return found;
}

AnnotatedUtterance annotate(const ParsedUtterance& utterance, TraversalTrace* trace) {
  const int root = main_predicate(utterance);
  const auto level1 = level1_arguments(utterance, root);
  const auto compounds = compound_expansion(utterance, level1);

  const std::size_t m = utterance.tokens.size();
  Mask mask(m, 0);
  auto mark = [&](int index) { mask[static_cast<std::size_t>(index) - 1] = 1; };
  mark(root);
  for (const auto& hit : level1) mark(hit.index);
  for (int index : compounds) mark(index);

  std::vector<int> removed;
  for (const Token& t : utterance.tokens) {
    if (mask[static_cast<std::size_t>(t.index) - 1] == 1 && is_stopword(ascii_lower(t.form))) {
      mask[static_cast<std::size_t>(t.index) - 1] = 0;
      removed.push_back(t.index);
    }
  }

  if (trace != nullptr) {
    trace->root_index = root;
    trace->level1 = level1;
    trace->compounds = compounds;
    trace->removed_stopwords = removed;
    trace->all_zero = std::all_of(mask.begin(), mask.end(),
                                  [](std::uint8_t b) { return b == 0; });
  }
  return AnnotatedUtterance{utterance, mask};
}

}  // namespace xintent
