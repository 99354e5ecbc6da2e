#pragma once

#include <string>
#include <vector>

#include "xintent/corpus.hpp"

namespace xintent {

// Record of every decision the silver annotator took for one utterance.
// Token indices are 1-based, matching Token::index.
struct TraversalTrace {
  int root_index = 0;

  struct Level1Hit {
    int index = 0;
    std::string deprel;  // relation that admitted the node
    bool operator==(const Level1Hit&) const = default;
  };
  std::vector<Level1Hit> level1;        // arguments of the main predicate
  std::vector<int> compounds;           // level-2 compound modifiers
  std::vector<int> removed_stopwords;   // marked nodes dropped at the last step
  bool all_zero = false;                // final mask selected nothing
};

// Index (1-based) of the unique token attached to the artificial root.
// Precondition: the utterance passed validation (single-root tree).
int main_predicate(const ParsedUtterance& utterance);

// Children of the main predicate admitted as arguments: obj and xcomp with
// any part of speech, nsubj and obl only when the dependent is a common noun.
std::vector<TraversalTrace::Level1Hit> level1_arguments(const ParsedUtterance& utterance,
                                                        int root);

// Children of the level-1 nodes with relation compound whose part of speech
// is not a proper noun.
std::vector<int> compound_expansion(const ParsedUtterance& utterance,
                                    const std::vector<TraversalTrace::Level1Hit>& level1);

// Full traversal: main predicate, level-1 arguments, compound expansion,
// then stopword removal on the marked set. Pure; an all-zero mask is legal
// and flagged in the trace.
AnnotatedUtterance annotate(const ParsedUtterance& utterance,
                            TraversalTrace* trace = nullptr);

}  // namespace xintent
