#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "xintent/corpus.hpp"
#include "xintent/predict_fn.hpp"

namespace xintent {

// 0-based token positions forming a predicted or gold explanation.
struct Rationale {
  std::vector<std::size_t> indices;  // strictly ascending

  static Rationale from_mask(const Mask& mask);
  bool empty() const { return indices.empty(); }
  std::size_t size() const { return indices.size(); }
  // Maximal runs of consecutive indices as inclusive [first, last] pairs.
  std::vector<std::pair<std::size_t, std::size_t>> spans() const;
};

// Positions of the min(k, m) largest attribution values; ties go to the
// earlier position.
Rationale topk_rationale(std::span<const double> attributions, std::size_t k);

// Per-instance token-overlap F1. Conventions: both rationales empty -> 1,
// exactly one empty -> 0, zero precision and recall -> 0. m is the token
// count of the utterance both rationales align to; the corpus score is the
// mean over instances.
double token_f1(const Rationale& pred, const Rationale& gold, std::size_t m);

// Corpus-level span F1, micro-averaged over spans: a predicted/gold span
// pair counts as a hit when its intersection-over-union exceeds 0.5.
double iou_f1(const std::vector<Rationale>& preds, const std::vector<Rationale>& golds);

// p_full(target) - p_kept(target) where the kept text is the rationale
// tokens in original order. Zero when the rationale covers the input.
double sufficiency(const PredictFn& predict_fn, const std::vector<std::string>& tokens,
                   const Rationale& rationale, int target_class);

// p_full(target) - p_complement(target) where the complement deletes the
// rationale tokens. Zero when the rationale is empty.
double comprehensiveness(const PredictFn& predict_fn, const std::vector<std::string>& tokens,
                         const Rationale& rationale, int target_class);

struct ClassStats {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct ClassificationReport {
  double accuracy = 0.0;
  std::vector<std::pair<std::string, ClassStats>> per_class;  // inventory order
  std::size_t total = 0;
};

// Exact-match accuracy plus one-vs-rest precision/recall/F1 per label, with
// the zero convention for empty denominators. Labels outside the inventory
// raise a UserError.
ClassificationReport classification_report(const std::vector<std::string>& pred,
                                           const std::vector<std::string>& gold,
                                           const std::vector<std::string>& labels);

// Evaluation summary assembled by the evaluate command.
struct MetricsReport {
  double accuracy = 0.0;
  double token_f1 = 0.0;
  double iou_f1 = 0.0;
  double comprehensiveness = 0.0;
  double sufficiency = 0.0;
  std::vector<std::pair<std::string, ClassStats>> per_class;
  std::size_t count = 0;
};

// counts[i][j] = raters who put item i into category j; every row must sum
// to `raters`.
struct AgreementTable {
  std::size_t raters = 0;
  std::vector<std::vector<std::size_t>> counts;
};

struct KappaResult {
  double kappa = 0.0;
  double p_bar = 0.0;    // mean observed per-item agreement
  double p_e = 0.0;      // expected chance agreement
  std::size_t items = 0;
  std::size_t raters = 0;
};

// Fleiss' kappa. Returns exactly 1.0 when observed agreement is perfect;
// raises a UserError for fewer than two raters, ragged rows, or the
// degenerate chance-agreement-1 case.
KappaResult fleiss_kappa(const AgreementTable& table);

}  // namespace xintent
