#include "xintent/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace xintent {

namespace {

void check_bounds(const Rationale& r, std::size_t m, const char* which) {
  for (std::size_t idx : r.indices) {
    if (idx >= m) {
      throw std::out_of_range(std::string(which) + " rationale index " + std::to_string(idx) +
                              " outside utterance of length " + std::to_string(m));
    }
  }
}

std::size_t intersection_size(const Rationale& a, const Rationale& b) {
  std::size_t count = 0;
  auto it = a.indices.begin();
  for (std::size_t idx : b.indices) {
    while (it != a.indices.end() && *it < idx) ++it;
    if (it != a.indices.end() && *it == idx) ++count;
  }
  return count;
}

using Span = std::pair<std::size_t, std::size_t>;

bool span_hit(const Span& p, const Span& g) {
  const std::size_t lo = std::max(p.first, g.first);
  const std::size_t hi = std::min(p.second, g.second);
  if (lo > hi) return false;
  const double inter = static_cast<double>(hi - lo + 1);
  const double len_p = static_cast<double>(p.second - p.first + 1);
  const double len_g = static_cast<double>(g.second - g.first + 1);
  return inter / (len_p + len_g - inter) > 0.5;
}

double f1_from(double precision, double recall) {
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

std::vector<std::string> select_tokens(const std::vector<std::string>& tokens,
                                       const Rationale& rationale, bool keep_rationale) {
  std::vector<std::string> kept;
  kept.reserve(tokens.size());
  auto it = rationale.indices.begin();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const bool in_rationale = it != rationale.indices.end() && *it == i;
    if (in_rationale) ++it;
    if (in_rationale == keep_rationale) kept.push_back(tokens[i]);
  }
  return kept;
}

double probability_drop(const PredictFn& predict_fn, const std::vector<std::string>& tokens,
                        const Rationale& rationale, int target_class, bool keep_rationale) {
  check_bounds(rationale, tokens.size(), "faithfulness");
  const std::vector<double> full = predict_fn(tokens);
  if (target_class < 0 || static_cast<std::size_t>(target_class) >= full.size()) {
    throw std::out_of_range("target class " + std::to_string(target_class) +
                            " outside probability vector of length " +
                            std::to_string(full.size()));
  }
  const std::vector<double> ablated =
      predict_fn(select_tokens(tokens, rationale, keep_rationale));
  if (ablated.size() != full.size()) {
    throw std::runtime_error("predict returned inconsistent class counts");
  }
  const auto j = static_cast<std::size_t>(target_class);
  return full[j] - ablated[j];
}

}  // namespace

Rationale Rationale::from_mask(const Mask& mask) {
  Rationale r;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] == 1) r.indices.push_back(i);
  }
  return r;
}

std::vector<Span> Rationale::spans() const {
  std::vector<Span> out;
  for (std::size_t i = 0; i < indices.size();) {
    std::size_t j = i;
    while (j + 1 < indices.size() && indices[j + 1] == indices[j] + 1) ++j;
    out.emplace_back(indices[i], indices[j]);
    i = j + 1;
  }
  return out;
}

Rationale topk_rationale(std::span<const double> attributions, std::size_t k) {
  if (attributions.empty()) throw std::invalid_argument("attributions must be nonempty");
  if (k < 1) throw std::invalid_argument("rationale budget k must be >= 1");
  std::vector<std::size_t> order(attributions.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (attributions[a] != attributions[b]) return attributions[a] > attributions[b];
    return a < b;
  });
  order.resize(std::min(k, order.size()));
  std::sort(order.begin(), order.end());
  return Rationale{std::move(order)};
}

double token_f1(const Rationale& pred, const Rationale& gold, std::size_t m) {
  check_bounds(pred, m, "predicted");
  check_bounds(gold, m, "gold");
  if (pred.empty() && gold.empty()) return 1.0;
  if (pred.empty() || gold.empty()) return 0.0;
  const double inter = static_cast<double>(intersection_size(pred, gold));
  const double precision = inter / static_cast<double>(pred.size());
  const double recall = inter / static_cast<double>(gold.size());
  return f1_from(precision, recall);
}

double iou_f1(const std::vector<Rationale>& preds, const std::vector<Rationale>& golds) {
  if (preds.size() != golds.size()) {
    throw std::invalid_argument("prediction and gold rationale counts differ");
  }
  std::size_t pred_total = 0;
  std::size_t gold_total = 0;
  std::size_t pred_hits = 0;
  std::size_t gold_matched = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const std::vector<Span> ps = preds[i].spans();
    const std::vector<Span> gs = golds[i].spans();
    pred_total += ps.size();
    gold_total += gs.size();
    for (const Span& p : ps) {
      if (std::any_of(gs.begin(), gs.end(), [&](const Span& g) { return span_hit(p, g); })) {
        ++pred_hits;
      }
    }
    for (const Span& g : gs) {
      if (std::any_of(ps.begin(), ps.end(), [&](const Span& p) { return span_hit(p, g); })) {
        ++gold_matched;
      }
    }
  }
  if (pred_total == 0 && gold_total == 0) return 1.0;
  if (pred_total == 0 || gold_total == 0) return 0.0;
  const double precision = static_cast<double>(pred_hits) / static_cast<double>(pred_total);
  const double recall = static_cast<double>(gold_matched) / static_cast<double>(gold_total);
  return f1_from(precision, recall);
}

double sufficiency(const PredictFn& predict_fn, const std::vector<std::string>& tokens,
                   const Rationale& rationale, int target_class) {
  return probability_drop(predict_fn, tokens, rationale, target_class, true);
}

double comprehensiveness(const PredictFn& predict_fn, const std::vector<std::string>& tokens,
                         const Rationale& rationale, int target_class) {
  return probability_drop(predict_fn, tokens, rationale, target_class, false);
}

ClassificationReport classification_report(const std::vector<std::string>& pred,
                                           const std::vector<std::string>& gold,
                                           const std::vector<std::string>& labels) {
  if (pred.size() != gold.size()) {
    throw std::invalid_argument("prediction and gold label counts differ");
  }
  if (pred.empty()) throw std::invalid_argument("classification report needs at least one pair");
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < labels.size(); ++i) index[labels[i]] = i;

  std::vector<std::size_t> tp(labels.size(), 0), fp(labels.size(), 0), fn(labels.size(), 0),
      support(labels.size(), 0);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const auto pit = index.find(pred[i]);
    const auto git = index.find(gold[i]);
    if (pit == index.end()) throw UserError("predicted label \"" + pred[i] + "\" not in inventory");
    if (git == index.end()) throw UserError("gold label \"" + gold[i] + "\" not in inventory");
    support[git->second] += 1;
    if (pit->second == git->second) {
      ++correct;
      tp[git->second] += 1;
    } else {
      fp[pit->second] += 1;
      fn[git->second] += 1;
    }
  }

  ClassificationReport report;
  report.total = pred.size();
  report.accuracy = static_cast<double>(correct) / static_cast<double>(pred.size());
  for (std::size_t j = 0; j < labels.size(); ++j) {
    ClassStats s;
    const double denom_p = static_cast<double>(tp[j] + fp[j]);
    const double denom_r = static_cast<double>(tp[j] + fn[j]);
    s.precision = denom_p == 0.0 ? 0.0 : static_cast<double>(tp[j]) / denom_p;
    s.recall = denom_r == 0.0 ? 0.0 : static_cast<double>(tp[j]) / denom_r;
    s.f1 = f1_from(s.precision, s.recall);
    s.support = support[j];
    report.per_class.emplace_back(labels[j], s);
  }
  return report;
}

KappaResult fleiss_kappa(const AgreementTable& table) {
  if (table.raters < 2) throw UserError("Fleiss' kappa needs at least two raters");
  if (table.counts.empty()) throw UserError("Fleiss' kappa needs at least one item");
  const std::size_t categories = table.counts.front().size();
  if (categories == 0) throw UserError("Fleiss' kappa needs at least one category");

  const double n = static_cast<double>(table.raters);
  std::vector<std::size_t> category_sums(categories, 0);
  double p_sum = 0.0;
  for (const auto& row : table.counts) {
    if (row.size() != categories) throw UserError("agreement table rows are ragged");
    std::size_t row_sum = 0;
    std::size_t sq = 0;
    for (std::size_t j = 0; j < categories; ++j) {
      row_sum += row[j];
      sq += row[j] * row[j];
      category_sums[j] += row[j];
    }
    if (row_sum != table.raters) {
      throw UserError("agreement table row does not sum to the rater count");
    }
    p_sum += (static_cast<double>(sq) - n) / (n * (n - 1.0));
  }

  KappaResult result;
  result.items = table.counts.size();
  result.raters = table.raters;
  result.p_bar = p_sum / static_cast<double>(result.items);

  const double total = n * static_cast<double>(result.items);
  result.p_e = 0.0;
  for (std::size_t j = 0; j < categories; ++j) {
    const double p_j = static_cast<double>(category_sums[j]) / total;
    result.p_e += p_j * p_j;
  }

  if (result.p_bar == 1.0) {
    result.kappa = 1.0;
    return result;
  }
  if (result.p_e == 1.0) {
    throw UserError("Fleiss' kappa is undefined: chance agreement is 1 "
                    "while observed agreement is below 1");
  }
  result.kappa = (result.p_bar - result.p_e) / (1.0 - result.p_e);
  return result;
}

}  // namespace xintent
