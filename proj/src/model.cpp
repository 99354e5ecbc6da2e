#include "xintent/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "xintent/kernels.hpp"
#include "xintent/rng.hpp"

namespace xintent {

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
constexpr double kInitScale = 0.1;

void check_ids(const ClassifierParams& params, std::span<const int> ids) {
  for (int id : ids) {
    if (id < 0 || id >= params.vocab.size()) {
      throw std::out_of_range("token id " + std::to_string(id) +
                              " outside vocabulary of size " +
                              std::to_string(params.vocab.size()));
    }
  }
}

// Mean of the non-pad embedding rows; zero vector when none. Reports the
// count of real tokens through n_out.
std::vector<double> pooled_mean(const ClassifierParams& params, std::span<const int> ids,
                                std::size_t* n_out) {
  std::vector<double> h(static_cast<std::size_t>(params.dim), 0.0);
  std::size_t n = 0;
  for (int id : ids) {
    if (id == Vocabulary::kPadId) continue;
    kernels::axpy(1.0, params.embedding_row(id), h.data(), h.size());
    ++n;
  }
  if (n > 0) kernels::scal(1.0 / static_cast<double>(n), h.data(), h.size());
  if (n_out != nullptr) *n_out = n;
  return h;
}

std::vector<double> affine(const ClassifierParams& params, const std::vector<double>& h) {
  const int c = params.vocab.num_classes();
  std::vector<double> s(static_cast<std::size_t>(c));
  for (int l = 0; l < c; ++l) {
    s[static_cast<std::size_t>(l)] =
        kernels::dot(params.weight_row(l), h.data(), h.size()) + params.bias[static_cast<std::size_t>(l)];
  }
  return s;
}

std::vector<double> softmax(std::vector<double> s) {
  if (s.empty()) throw std::invalid_argument("softmax over zero classes");
  const double mx = *std::max_element(s.begin(), s.end());
  double sum = 0.0;
  for (double& v : s) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : s) v /= sum;
  return s;
}

// Mean of the rows of W; the class-averaged logit attribution of position i
// is x_i . wbar / n.
std::vector<double> mean_weight_row(const ClassifierParams& params) {
  const int c = params.vocab.num_classes();
  std::vector<double> wbar(static_cast<std::size_t>(params.dim), 0.0);
  for (int l = 0; l < c; ++l) {
    kernels::axpy(1.0 / c, params.weight_row(l), wbar.data(), wbar.size());
  }
  return wbar;
}

// Joint loss and gradient of one sample, accumulated into caller buffers.
// The prior channel is the class-averaged logit attribution; its quadrature
// is exact at every step count, so the closed form below differentiates the
// S-step sum exactly.
void accumulate_sample_gradient(const ClassifierParams& params, std::span<const int> ids,
                                int gold_class, std::span<const std::uint8_t> targets,
                                double lambda, double* d_emb, double* d_w, double* d_b,
                                double* ce_out, double* prior_out) {
  const int c = params.vocab.num_classes();
  const int d = params.dim;
  const std::size_t dim = static_cast<std::size_t>(d);

  std::size_t n = 0;
  const std::vector<double> h = pooled_mean(params, ids, &n);
  const std::vector<double> p = softmax(affine(params, h));
  *ce_out = cross_entropy(p, gold_class);

  std::vector<double> delta = p;
  delta[static_cast<std::size_t>(gold_class)] -= 1.0;

  for (int l = 0; l < c; ++l) {
    d_b[l] += delta[static_cast<std::size_t>(l)];
    kernels::axpy(delta[static_cast<std::size_t>(l)], h.data(), d_w + l * dim, dim);
  }
  if (n > 0) {
    std::vector<double> gh(dim, 0.0);
    for (int l = 0; l < c; ++l) {
      kernels::axpy(delta[static_cast<std::size_t>(l)], params.weight_row(l), gh.data(), dim);
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (int id : ids) {
      if (id == Vocabulary::kPadId) continue;
      kernels::axpy(inv_n, gh.data(), d_emb + static_cast<std::size_t>(id) * dim, dim);
    }
  }

  *prior_out = 0.0;
  if (lambda <= 0.0) return;
  if (targets.size() != ids.size()) {
    throw std::invalid_argument("mask length does not match token count");
  }

  const std::vector<double> wbar = mean_weight_row(params);
  const double inv_n = n > 0 ? 1.0 / static_cast<double>(n) : 0.0;
  std::vector<double> q(dim, 0.0);  // sum_i r_i x_i
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const bool pad = ids[i] == Vocabulary::kPadId;
    const double* x = params.embedding_row(ids[i]);
    const double a = pad ? 0.0 : kernels::dot(x, wbar.data(), dim) * inv_n;
    const double diff = a - static_cast<double>(targets[i]);
    *prior_out += diff * diff;
    if (pad) continue;
    const double r = 2.0 * diff;
    kernels::axpy(lambda * r * inv_n, wbar.data(),
                  d_emb + static_cast<std::size_t>(ids[i]) * dim, dim);
    kernels::axpy(r, x, q.data(), dim);
  }
  kernels::scal(lambda * inv_n / c, q.data(), dim);
  for (int l = 0; l < c; ++l) {
    kernels::axpy(1.0, q.data(), d_w + l * dim, dim);
  }
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (unsigned char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (ch < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", ch);
          out += buf;
        } else {
          out += static_cast<char>(ch);
        }
    }
  }
  return out;
}

void write_number_array(std::ostream& out, const std::vector<double>& values) {
  out << '[';
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out << ',';
    out << format_double(values[i]);
  }
  out << ']';
}

}  // namespace

int Vocabulary::lookup(const std::string& token) const {
  const auto it = token_to_id.find(token);
  return it == token_to_id.end() ? kUnkId : it->second;
}

int Vocabulary::label_index(const std::string& label) const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) return static_cast<int>(i);
  }
  return -1;
}

Vocabulary Vocabulary::build(const Dataset& dataset, std::size_t max_len) {
  Vocabulary v;
  v.labels = dataset.labels;
  for (const AnnotatedUtterance& rec : dataset.records) {
    const auto& tokens = rec.utterance.tokens;
    const std::size_t m = std::min(tokens.size(), max_len);
    for (std::size_t i = 0; i < m; ++i) {
      std::string word = ascii_lower(tokens[i].form);
      if (v.token_to_id.emplace(word, v.size()).second) {
        v.id_to_token.push_back(std::move(word));
      }
    }
  }
  return v;
}

std::vector<double> forward(const ClassifierParams& params, std::span<const int> ids) {
  if (params.vocab.num_classes() == 0) throw std::invalid_argument("model has no classes");
  check_ids(params, ids);
  return softmax(affine(params, pooled_mean(params, ids, nullptr)));
}

double cross_entropy(std::span<const double> probabilities, int gold_class) {
  if (gold_class < 0 || static_cast<std::size_t>(gold_class) >= probabilities.size()) {
    throw std::out_of_range("gold class " + std::to_string(gold_class) +
                            " outside probability vector of length " +
                            std::to_string(probabilities.size()));
  }
  return -std::log(std::max(probabilities[static_cast<std::size_t>(gold_class)], 1e-12));
}

std::vector<double> ig_probability_matrix(const ClassifierParams& params,
                                          std::span<const int> ids, int steps) {
  if (steps < 1) throw std::invalid_argument("integration steps must be >= 1");
  const int c = params.vocab.num_classes();
  if (c == 0) throw std::invalid_argument("model has no classes");
  check_ids(params, ids);
  const std::size_t m = ids.size();
  const std::size_t dim = static_cast<std::size_t>(params.dim);
  std::vector<double> result(m * static_cast<std::size_t>(c), 0.0);

  std::size_t n = 0;
  const std::vector<double> h = pooled_mean(params, ids, &n);
  if (n == 0) return result;  // input coincides with the baseline

  // Along the straight path alpha*x the logits are alpha*u + b with u = W h,
  // so each quadrature point contributes its softmax Jacobian exactly.
  std::vector<double> u(static_cast<std::size_t>(c));
  for (int l = 0; l < c; ++l) {
    u[static_cast<std::size_t>(l)] = kernels::dot(params.weight_row(l), h.data(), dim);
  }
  std::vector<double> qbar(static_cast<std::size_t>(c) * c, 0.0);
  std::vector<double> s(static_cast<std::size_t>(c));
  for (int k = 1; k <= steps; ++k) {
    const double alpha = static_cast<double>(k) / steps;
    for (int l = 0; l < c; ++l) {
      s[static_cast<std::size_t>(l)] = alpha * u[static_cast<std::size_t>(l)] +
                                       params.bias[static_cast<std::size_t>(l)];
    }
    const std::vector<double> p = softmax(s);
    for (int j = 0; j < c; ++j) {
      for (int l = 0; l < c; ++l) {
        qbar[static_cast<std::size_t>(j) * c + l] +=
            p[static_cast<std::size_t>(j)] *
            ((j == l ? 1.0 : 0.0) - p[static_cast<std::size_t>(l)]);
      }
    }
  }
  kernels::scal(1.0 / steps, qbar.data(), qbar.size());

  // v_j = W^T qbar_j; attribution of position i for class j is x_i . v_j / n.
  std::vector<double> v(static_cast<std::size_t>(c) * dim, 0.0);
  for (int j = 0; j < c; ++j) {
    for (int l = 0; l < c; ++l) {
      kernels::axpy(qbar[static_cast<std::size_t>(j) * c + l], params.weight_row(l),
                    v.data() + static_cast<std::size_t>(j) * dim, dim);
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < m; ++i) {
    if (ids[i] == Vocabulary::kPadId) continue;
    const double* x = params.embedding_row(ids[i]);
    for (int j = 0; j < c; ++j) {
      result[i * c + static_cast<std::size_t>(j)] =
          kernels::dot(x, v.data() + static_cast<std::size_t>(j) * dim, dim) * inv_n;
    }
  }
  return result;
}

std::vector<double> integrated_gradients(const ClassifierParams& params,
                                         std::span<const int> ids, int target_class,
                                         int steps) {
  const int c = params.vocab.num_classes();
  if (target_class < 0 || target_class >= c) {
    throw std::out_of_range("target class " + std::to_string(target_class) +
                            " outside label inventory of size " + std::to_string(c));
  }
  const std::vector<double> matrix = ig_probability_matrix(params, ids, steps);
  std::vector<double> column(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    column[i] = matrix[i * static_cast<std::size_t>(c) + static_cast<std::size_t>(target_class)];
  }
  return column;
}

std::vector<double> ig_logit_matrix(const ClassifierParams& params, std::span<const int> ids) {
  const int c = params.vocab.num_classes();
  if (c == 0) throw std::invalid_argument("model has no classes");
  check_ids(params, ids);
  const std::size_t dim = static_cast<std::size_t>(params.dim);
  std::vector<double> result(ids.size() * static_cast<std::size_t>(c), 0.0);
  std::size_t n = 0;
  for (int id : ids) {
    if (id != Vocabulary::kPadId) ++n;
  }
  if (n == 0) return result;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == Vocabulary::kPadId) continue;
    const double* x = params.embedding_row(ids[i]);
    for (int l = 0; l < c; ++l) {
      result[i * c + static_cast<std::size_t>(l)] =
          kernels::dot(x, params.weight_row(l), dim) * inv_n;
    }
  }
  return result;
}

std::vector<double> ig_logit_matrix_quadrature(const ClassifierParams& params,
                                               std::span<const int> ids, int steps) {
  if (steps < 1) throw std::invalid_argument("integration steps must be >= 1");
  const int c = params.vocab.num_classes();
  if (c == 0) throw std::invalid_argument("model has no classes");
  check_ids(params, ids);
  const std::size_t dim = static_cast<std::size_t>(params.dim);
  std::vector<double> acc(ids.size() * static_cast<std::size_t>(c), 0.0);
  std::size_t n = 0;
  for (int id : ids) {
    if (id != Vocabulary::kPadId) ++n;
  }
  if (n == 0) return acc;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int k = 1; k <= steps; ++k) {
    // The score gradient W_l / n does not depend on the path position, so
    // every step contributes the same term.
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (ids[i] == Vocabulary::kPadId) continue;
      const double* x = params.embedding_row(ids[i]);
      for (int l = 0; l < c; ++l) {
        acc[i * c + static_cast<std::size_t>(l)] +=
            kernels::dot(x, params.weight_row(l), dim) * inv_n;
      }
    }
  }
  kernels::scal(1.0 / steps, acc.data(), acc.size());
  return acc;
}

std::vector<double> class_averaged_attribution(std::span<const double> per_class,
                                               std::size_t m, std::size_t c) {
  if (c == 0 || per_class.size() != m * c) {
    throw std::invalid_argument("per-class attribution matrix has wrong shape");
  }
  std::vector<double> a(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < c; ++j) sum += per_class[i * c + j];
    a[i] = sum / static_cast<double>(c);
  }
  return a;
}

double prior_loss(std::span<const double> attributions, std::span<const std::uint8_t> targets) {
  if (attributions.size() != targets.size()) {
    throw std::invalid_argument("attribution and target lengths differ");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < attributions.size(); ++i) {
    const double diff = attributions[i] - static_cast<double>(targets[i]);
    sum += diff * diff;
  }
  return sum;
}

double joint_loss(double ce, double prior, double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
  return ce + lambda * prior;
}

double sample_joint_loss(const ClassifierParams& params, std::span<const int> ids,
                         int gold_class, std::span<const std::uint8_t> targets,
                         double lambda) {
  const std::vector<double> p = forward(params, ids);
  const double ce = cross_entropy(p, gold_class);
  if (lambda <= 0.0) return ce;
  const std::vector<double> a = class_averaged_attribution(
      ig_logit_matrix(params, ids), ids.size(),
      static_cast<std::size_t>(params.vocab.num_classes()));
  return joint_loss(ce, prior_loss(a, targets), lambda);
}

SampleGradient sample_joint_gradient(const ClassifierParams& params,
                                     std::span<const int> ids, int gold_class,
                                     std::span<const std::uint8_t> targets, double lambda) {
  SampleGradient g;
  g.d_embeddings.assign(params.embeddings.size(), 0.0);
  g.d_weights.assign(params.weights.size(), 0.0);
  g.d_bias.assign(params.bias.size(), 0.0);
  accumulate_sample_gradient(params, ids, gold_class, targets, lambda,
                             g.d_embeddings.data(), g.d_weights.data(), g.d_bias.data(),
                             &g.ce, &g.prior);
  return g;
}

TrainResult train(const Dataset& dataset, const TrainConfig& config) {
  if (dataset.records.empty()) throw UserError("training corpus is empty");
  if (dataset.labels.size() < 2) {
    throw UserError("training requires at least two intent classes, found " +
                    std::to_string(dataset.labels.size()));
  }
  if (config.lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
  if (config.epochs < 1 || config.batch_size < 1 || config.ig_steps < 1 ||
      config.dim < 1 || config.max_len < 1 || !(config.learning_rate > 0.0)) {
    throw std::invalid_argument("invalid training configuration");
  }
  if (config.lambda > 0.0) {
    for (const AnnotatedUtterance& rec : dataset.records) {
      if (!rec.mask.has_value()) {
        throw UserError("record \"" + rec.utterance.id +
                        "\" has no explanation_mask (required when lambda > 0)");
      }
    }
  }

  ClassifierParams params;
  params.vocab = Vocabulary::build(dataset, config.max_len);
  params.dim = config.dim;
  const std::size_t dim = static_cast<std::size_t>(params.dim);
  const std::size_t vocab_size = static_cast<std::size_t>(params.vocab.size());
  const std::size_t c = static_cast<std::size_t>(params.vocab.num_classes());

  Rng rng(config.seed);
  params.embeddings.assign(vocab_size * dim, 0.0);
  for (std::size_t id = 1; id < vocab_size; ++id) {
    for (std::size_t k = 0; k < dim; ++k) {
      params.embeddings[id * dim + k] = rng.range(-kInitScale, kInitScale);
    }
  }
  params.weights.resize(c * dim);
  for (double& w : params.weights) w = rng.range(-kInitScale, kInitScale);
  params.bias.assign(c, 0.0);

  struct Sample {
    std::vector<int> ids;
    std::vector<std::uint8_t> targets;
    int gold = 0;
  };
  std::vector<Sample> samples;
  samples.reserve(dataset.records.size());
  for (const AnnotatedUtterance& rec : dataset.records) {
    Sample s;
    const auto& tokens = rec.utterance.tokens;
    const std::size_t m = std::min(tokens.size(), config.max_len);
    s.ids.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
      s.ids.push_back(params.vocab.lookup(ascii_lower(tokens[i].form)));
    }
    if (config.lambda > 0.0) {
      const Mask& mask = *rec.mask;
      s.targets.assign(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(m));
    }
    s.gold = params.vocab.label_index(rec.utterance.intent);
    samples.push_back(std::move(s));
  }

  std::vector<double> d_emb(params.embeddings.size());
  std::vector<double> d_w(params.weights.size());
  std::vector<double> d_b(params.bias.size());
  std::vector<double> m_emb(params.embeddings.size(), 0.0), v_emb(params.embeddings.size(), 0.0);
  std::vector<double> m_w(params.weights.size(), 0.0), v_w(params.weights.size(), 0.0);
  std::vector<double> m_b(params.bias.size(), 0.0), v_b(params.bias.size(), 0.0);

  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  const std::size_t batch_size = static_cast<std::size_t>(config.batch_size);
  double beta1_t = 1.0;
  double beta2_t = 1.0;
  TrainStats stats;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_ce = 0.0;
    double epoch_prior = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t end = std::min(start + batch_size, order.size());
      std::fill(d_emb.begin(), d_emb.end(), 0.0);
      std::fill(d_w.begin(), d_w.end(), 0.0);
      std::fill(d_b.begin(), d_b.end(), 0.0);
      for (std::size_t pos = start; pos < end; ++pos) {
        const Sample& s = samples[order[pos]];
        double ce = 0.0;
        double prior = 0.0;
        accumulate_sample_gradient(params, s.ids, s.gold, s.targets, config.lambda,
                                   d_emb.data(), d_w.data(), d_b.data(), &ce, &prior);
        epoch_ce += ce;
        epoch_prior += prior;
      }
      const double inv_batch = 1.0 / static_cast<double>(end - start);
      kernels::scal(inv_batch, d_emb.data(), d_emb.size());
      kernels::scal(inv_batch, d_w.data(), d_w.size());
      kernels::scal(inv_batch, d_b.data(), d_b.size());

      beta1_t *= kAdamBeta1;
      beta2_t *= kAdamBeta2;
      kernels::adam_step(params.embeddings.data(), d_emb.data(), m_emb.data(), v_emb.data(),
                         params.embeddings.size(), config.learning_rate, kAdamBeta1,
                         kAdamBeta2, kAdamEps, beta1_t, beta2_t);
      kernels::adam_step(params.weights.data(), d_w.data(), m_w.data(), v_w.data(),
                         params.weights.size(), config.learning_rate, kAdamBeta1, kAdamBeta2,
                         kAdamEps, beta1_t, beta2_t);
      kernels::adam_step(params.bias.data(), d_b.data(), m_b.data(), v_b.data(),
                         params.bias.size(), config.learning_rate, kAdamBeta1, kAdamBeta2,
                         kAdamEps, beta1_t, beta2_t);
      std::fill_n(params.embeddings.begin(), dim, 0.0);  // keep the pad row pinned
    }
    if (epoch == config.epochs - 1) {
      const double inv_count = 1.0 / static_cast<double>(samples.size());
      stats.cross_entropy = epoch_ce * inv_count;
      stats.prior = epoch_prior * inv_count;
      stats.joint = stats.cross_entropy + config.lambda * stats.prior;
    }
  }
  return TrainResult{std::move(params), stats};
}

std::vector<int> tokens_to_ids(const Vocabulary& vocab, std::span<const std::string> tokens,
                               std::size_t max_len) {
  const std::size_t m = std::min(tokens.size(), max_len);
  std::vector<int> ids;
  ids.reserve(m);
  for (std::size_t i = 0; i < m; ++i) ids.push_back(vocab.lookup(ascii_lower(tokens[i])));
  return ids;
}

std::vector<double> predict_proba(const ClassifierParams& params,
                                  std::span<const std::string> tokens, std::size_t max_len) {
  const std::vector<int> ids = tokens_to_ids(params.vocab, tokens, max_len);
  return forward(params, ids);
}

int argmax_lowest(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("argmax over empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return static_cast<int>(best);
}

std::pair<std::string, std::vector<double>> predict(const ClassifierParams& params,
                                                    std::span<const std::string> tokens,
                                                    std::size_t max_len) {
  std::vector<double> probs = predict_proba(params, tokens, max_len);
  const int j = argmax_lowest(probs);
  return {params.vocab.labels[static_cast<std::size_t>(j)], std::move(probs)};
}

void save_model(const ClassifierParams& params, std::ostream& out) {
  out << "{\"version\":1,\"labels\":[";
  for (std::size_t i = 0; i < params.vocab.labels.size(); ++i) {
    if (i > 0) out << ',';
    out << '"' << json_escape(params.vocab.labels[i]) << '"';
  }
  out << "],\"vocab\":{";
  for (int id = 0; id < params.vocab.size(); ++id) {
    if (id > 0) out << ',';
    out << '"' << json_escape(params.vocab.id_to_token[static_cast<std::size_t>(id)])
        << "\":" << id;
  }
  out << "},\"dim\":" << params.dim << ",\"embeddings\":";
  write_number_array(out, params.embeddings);
  out << ",\"W\":";
  write_number_array(out, params.weights);
  out << ",\"b\":";
  write_number_array(out, params.bias);
  out << "}\n";
}

ClassifierParams load_model(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw UserError(std::string("model file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw UserError("model file must hold a single JSON object");
  if (!j.contains("version") || !j["version"].is_number_integer() || j["version"] != 1) {
    throw UserError("unsupported model file version (expected 1)");
  }
  for (const char* field : {"labels", "vocab", "dim", "embeddings", "W", "b"}) {
    if (!j.contains(field)) {
      throw UserError(std::string("model file is missing field \"") + field + "\"");
    }
  }

  ClassifierParams params;
  try {
    params.vocab.labels = j["labels"].get<std::vector<std::string>>();
    params.dim = j["dim"].get<int>();
    params.embeddings = j["embeddings"].get<std::vector<double>>();
    params.weights = j["W"].get<std::vector<double>>();
    params.bias = j["b"].get<std::vector<double>>();
    const auto& vocab_obj = j["vocab"];
    if (!vocab_obj.is_object()) throw UserError("model field \"vocab\" must be an object");
    params.vocab.id_to_token.assign(vocab_obj.size(), std::string());
    params.vocab.token_to_id.clear();
    for (auto it = vocab_obj.begin(); it != vocab_obj.end(); ++it) {
      const int id = it.value().get<int>();
      if (id < 0 || static_cast<std::size_t>(id) >= vocab_obj.size() ||
          !params.vocab.id_to_token[static_cast<std::size_t>(id)].empty()) {
        throw UserError("model vocabulary ids must be dense and unique");
      }
      params.vocab.id_to_token[static_cast<std::size_t>(id)] = it.key();
      params.vocab.token_to_id[it.key()] = id;
    }
  } catch (const nlohmann::json::exception& e) {
    throw UserError(std::string("model file field has wrong type: ") + e.what());
  }

  if (params.dim < 1) throw UserError("model dim must be positive");
  if (params.vocab.labels.empty()) throw UserError("model has no labels");
  if (params.vocab.size() < 2 || params.vocab.id_to_token[0] != "<pad>" ||
      params.vocab.id_to_token[1] != "<unk>") {
    throw UserError("model vocabulary must reserve id 0 for <pad> and id 1 for <unk>");
  }
  const std::size_t dim = static_cast<std::size_t>(params.dim);
  const std::size_t c = params.vocab.labels.size();
  if (params.embeddings.size() != static_cast<std::size_t>(params.vocab.size()) * dim) {
    throw UserError("embedding matrix size does not match vocab x dim");
  }
  if (params.weights.size() != c * dim) {
    throw UserError("weight matrix size does not match classes x dim");
  }
  if (params.bias.size() != c) throw UserError("bias length does not match class count");
  for (double v : params.embeddings) {
    if (!std::isfinite(v)) throw UserError("model parameters must be finite");
  }
  for (double v : params.weights) {
    if (!std::isfinite(v)) throw UserError("model parameters must be finite");
  }
  for (double v : params.bias) {
    if (!std::isfinite(v)) throw UserError("model parameters must be finite");
  }
  for (std::size_t k = 0; k < dim; ++k) {
    if (params.embeddings[k] != 0.0) {
      throw UserError("pad embedding row must be identically zero");
    }
  }
  return params;
}

}  // namespace xintent
