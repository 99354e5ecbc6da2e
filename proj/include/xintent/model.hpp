#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "xintent/corpus.hpp"

namespace xintent {

// Token ids are dense; id 0 is the padding token whose embedding row is
// pinned to the zero vector (it doubles as the integrated-gradients
// baseline), id 1 collects out-of-vocabulary tokens.
struct Vocabulary {
  static constexpr int kPadId = 0;
  static constexpr int kUnkId = 1;

  std::vector<std::string> id_to_token = {"<pad>", "<unk>"};
  std::unordered_map<std::string, int> token_to_id = {{"<pad>", 0}, {"<unk>", 1}};
  std::vector<std::string> labels;

  int size() const { return static_cast<int>(id_to_token.size()); }
  int num_classes() const { return static_cast<int>(labels.size()); }
  // Expects a lowercased token; unknown tokens map to kUnkId.
  int lookup(const std::string& token) const;
  // -1 when the label is not in the inventory.
  int label_index(const std::string& label) const;

  // Lowercased forms in first-appearance order; labels from dataset.labels.
  static Vocabulary build(const Dataset& dataset, std::size_t max_len = kDefaultMaxLen);
};

// Mean of non-pad token embeddings -> affine map -> softmax.
struct ClassifierParams {
  Vocabulary vocab;
  int dim = 64;
  std::vector<double> embeddings;  // |V| x dim, row-major, row 0 all zero
  std::vector<double> weights;     // c x dim, row-major
  std::vector<double> bias;        // c

  const double* embedding_row(int id) const { return embeddings.data() + static_cast<std::size_t>(id) * dim; }
  const double* weight_row(int c) const { return weights.data() + static_cast<std::size_t>(c) * dim; }
};

struct TrainConfig {
  double lambda = 0.0;
  int epochs = 10;
  int batch_size = 32;
  double learning_rate = 0.001;
  int ig_steps = 50;
  std::uint64_t seed = 0;
  std::size_t max_len = kDefaultMaxLen;
  int dim = 64;
};

struct TrainStats {
  double cross_entropy = 0.0;  // final-epoch means per sample
  double prior = 0.0;
  double joint = 0.0;
};

struct TrainResult {
  ClassifierParams params;
  TrainStats final_losses;
};

struct AttributionMap {
  std::string id;
  std::string method;                // "ig" or "lime"
  std::vector<double> per_class;     // m x c row-major; empty for lime
  std::vector<double> attributions;  // length m
  std::vector<double> probabilities; // length c
  int predicted_class = 0;
};

// Class probabilities for a token-id sequence. Pad ids are excluded from the
// pooled mean; an all-pad or empty sequence yields softmax(bias). Ids outside
// the vocabulary throw.
std::vector<double> forward(const ClassifierParams& params, std::span<const int> ids);

// -ln(p[gold]) with p clamped at 1e-12. Out-of-range gold throws.
double cross_entropy(std::span<const double> probabilities, int gold_class);

// Riemann-sum integrated gradients of the softmax probability of
// target_class along the straight path from the all-zero (pad) baseline,
// sampled at k/steps for k = 1..steps. One scalar per input position.
std::vector<double> integrated_gradients(const ClassifierParams& params,
                                         std::span<const int> ids, int target_class,
                                         int steps);

// All classes at once: m x steps quadrature shared across the c outputs.
// Row-major m x c. Column j equals integrated_gradients(.., j, steps).
std::vector<double> ig_probability_matrix(const ClassifierParams& params,
                                          std::span<const int> ids, int steps);

// Attribution of the pre-softmax class scores. The integrand of the path
// integral is constant in the interpolation parameter, so the k/steps
// Riemann sum equals the closed form for every step count; this returns
// that exact value. Row-major m x c.
std::vector<double> ig_logit_matrix(const ClassifierParams& params,
                                    std::span<const int> ids);
// Literal step-loop evaluation of the same quadrature (test hook).
std::vector<double> ig_logit_matrix_quadrature(const ClassifierParams& params,
                                               std::span<const int> ids, int steps);

// Arithmetic mean across classes per token (row mean of an m x c matrix).
std::vector<double> class_averaged_attribution(std::span<const double> per_class,
                                               std::size_t m, std::size_t c);

// Sum of squared differences between attributions and binary targets.
double prior_loss(std::span<const double> attributions, std::span<const std::uint8_t> targets);

double joint_loss(double ce, double prior, double lambda);

// Joint loss and its exact gradient for one sample; the prior channel is the
// class-averaged logit attribution (see ig_logit_matrix). Used by train()
// and by the finite-difference checks.
struct SampleGradient {
  double ce = 0.0;
  double prior = 0.0;
  std::vector<double> d_embeddings;  // |V| x dim
  std::vector<double> d_weights;     // c x dim
  std::vector<double> d_bias;        // c
};
double sample_joint_loss(const ClassifierParams& params, std::span<const int> ids,
                         int gold_class, std::span<const std::uint8_t> targets,
                         double lambda);
SampleGradient sample_joint_gradient(const ClassifierParams& params,
                                     std::span<const int> ids, int gold_class,
                                     std::span<const std::uint8_t> targets, double lambda);

// Mini-batch Adam training of the joint objective. Deterministic given
// config.seed; the pad embedding row is re-zeroed after every update.
TrainResult train(const Dataset& dataset, const TrainConfig& config);

// Lowercase, map out-of-vocabulary tokens to <unk>, truncate to max_len.
std::vector<int> tokens_to_ids(const Vocabulary& vocab,
                               std::span<const std::string> tokens,
                               std::size_t max_len = kDefaultMaxLen);

std::vector<double> predict_proba(const ClassifierParams& params,
                                  std::span<const std::string> tokens,
                                  std::size_t max_len = kDefaultMaxLen);

// Argmax with lowest-index tie-break.
int argmax_lowest(std::span<const double> values);

std::pair<std::string, std::vector<double>> predict(const ClassifierParams& params,
                                                    std::span<const std::string> tokens,
                                                    std::size_t max_len = kDefaultMaxLen);

// Versioned single-object model file; numbers carry 17 significant digits so
// save -> load -> save is byte-identical.
void save_model(const ClassifierParams& params, std::ostream& out);
ClassifierParams load_model(std::istream& in);

}  // namespace xintent
