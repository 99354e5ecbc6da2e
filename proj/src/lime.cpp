#include "xintent/lime.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "xintent/rng.hpp"

namespace xintent {

namespace {

void check_config(const LimeConfig& config) {
  if (config.num_samples < 1) throw std::invalid_argument("num_samples must be >= 1");
  if (!(config.kernel_width > 0.0)) throw std::invalid_argument("kernel_width must be positive");
  if (config.ridge_alpha < 0.0) throw std::invalid_argument("ridge_alpha must be nonnegative");
}

}  // namespace

PerturbationSet perturb_samples(std::size_t m, const LimeConfig& config) {
  if (m < 1) throw std::invalid_argument("perturbation requires at least one token");
  check_config(config);
  const std::size_t rows = static_cast<std::size_t>(config.num_samples);

  PerturbationSet set;
  set.m = m;
  set.masks.assign(rows * m, 1);
  set.distances.assign(rows, 0.0);

  Rng rng(config.seed);
  for (std::size_t k = 1; k < rows; ++k) {
    std::uint8_t* row = set.masks.data() + k * m;
    std::size_t dropped = 0;
    do {
      dropped = 0;
      for (std::size_t i = 0; i < m; ++i) {
        const bool drop = rng.below(2) == 1;
        row[i] = drop ? 0 : 1;
        dropped += drop ? 1 : 0;
      }
    } while (dropped == 0);
    // cos(row, ones) = sqrt(ones_in_row / m); the all-zero row gets the
    // maximal distance 1 without a special case.
    const double ones = static_cast<double>(m - dropped);
    set.distances[k] = 1.0 - std::sqrt(ones / static_cast<double>(m));
  }
  return set;
}

std::vector<double> fit_surrogate(const PerturbationSet& samples,
                                  std::span<const double> outputs, const LimeConfig& config,
                                  double* intercept) {
  check_config(config);
  const std::size_t m = samples.m;
  const std::size_t rows = samples.rows();
  if (m < 1 || rows < 1) throw std::invalid_argument("empty perturbation set");
  if (outputs.size() != rows || samples.distances.size() != rows) {
    throw std::invalid_argument("outputs and distances must cover every perturbation row");
  }

  const std::size_t dim = m + 1;  // intercept feature at index 0
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim),
                                            static_cast<Eigen::Index>(dim));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  const double kw2 = config.kernel_width * config.kernel_width;

  std::vector<Eigen::Index> ones;
  ones.reserve(dim);
  for (std::size_t k = 0; k < rows; ++k) {
    const std::uint8_t* row = samples.row(k);
    ones.clear();
    ones.push_back(0);
    for (std::size_t i = 0; i < m; ++i) {
      if (row[i] == 1) ones.push_back(static_cast<Eigen::Index>(i + 1));
    }
    const double d = samples.distances[k];
    const double w = std::exp(-(d * d) / kw2);
    for (Eigen::Index p : ones) {
      rhs(p) += w * outputs[k];
      for (Eigen::Index q : ones) a(p, q) += w;
    }
  }
  for (std::size_t i = 1; i < dim; ++i) {
    a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += config.ridge_alpha;
  }

  Eigen::VectorXd beta;
  if (config.ridge_alpha > 0.0) {
    beta = a.ldlt().solve(rhs);  // positive definite once ridge is added
  } else {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (!lu.isInvertible()) {
      throw std::runtime_error("surrogate system is singular (ridge_alpha = 0)");
    }
    beta = lu.solve(rhs);
  }

  if (intercept != nullptr) *intercept = beta(0);
  std::vector<double> coefficients(m);
  for (std::size_t i = 0; i < m; ++i) {
    coefficients[i] = beta(static_cast<Eigen::Index>(i + 1));
  }
  return coefficients;
}

std::vector<std::string> apply_mask(const std::vector<std::string>& tokens,
                                    const std::uint8_t* mask) {
  std::vector<std::string> kept;
  kept.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (mask[i] == 1) kept.push_back(tokens[i]);
  }
  return kept;
}

AttributionMap lime_explain(const PredictFn& predict_fn, const std::vector<std::string>& tokens,
                            const std::string& instance_id, int target_class,
                            const LimeConfig& config) {
  if (tokens.empty()) throw std::invalid_argument("lime requires at least one token");
  check_config(config);

  LimeConfig local = config;
  local.seed = seed_for_instance(config.seed, instance_id);
  const PerturbationSet set = perturb_samples(tokens.size(), local);

  std::vector<double> full_probs;
  std::vector<double> outputs(set.rows(), 0.0);
  for (std::size_t k = 0; k < set.rows(); ++k) {
    std::vector<double> probs;
    try {
      probs = predict_fn(apply_mask(tokens, set.row(k)));
    } catch (const std::exception& e) {
      throw std::runtime_error("predict failed on perturbation row " + std::to_string(k) +
                               ": " + e.what());
    }
    if (k == 0) {
      if (probs.empty()) throw std::runtime_error("predict returned no probabilities");
      if (target_class < 0) target_class = argmax_lowest(probs);
      if (static_cast<std::size_t>(target_class) >= probs.size()) {
        throw std::out_of_range("target class " + std::to_string(target_class) +
                                " outside probability vector of length " +
                                std::to_string(probs.size()));
      }
      full_probs = probs;
    } else if (probs.size() != full_probs.size()) {
      throw std::runtime_error("predict returned inconsistent class count on row " +
                               std::to_string(k));
    }
    outputs[k] = probs[static_cast<std::size_t>(target_class)];
  }

  AttributionMap map;
  map.id = instance_id;
  map.method = "lime";
  map.attributions = fit_surrogate(set, outputs, local);
  map.probabilities = std::move(full_probs);
  map.predicted_class = argmax_lowest(map.probabilities);
  return map;
}

}  // namespace xintent
