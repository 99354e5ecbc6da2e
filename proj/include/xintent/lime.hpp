#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "xintent/model.hpp"
#include "xintent/predict_fn.hpp"

namespace xintent {

struct LimeConfig {
  int num_samples = 1000;
  double kernel_width = 25.0;
  double ridge_alpha = 1.0;
  std::uint64_t seed = 0;
};

// Token-presence perturbations of one instance. Row 0 is the instance
// itself; every other row drops a uniformly drawn nonempty token subset.
struct PerturbationSet {
  std::size_t m = 0;
  std::vector<std::uint8_t> masks;  // num_samples x m, row-major
  std::vector<double> distances;    // cosine distance to the all-ones row

  const std::uint8_t* row(std::size_t k) const { return masks.data() + k * m; }
  std::size_t rows() const { return m == 0 ? 0 : masks.size() / m; }
};

PerturbationSet perturb_samples(std::size_t m, const LimeConfig& config);

// Weighted ridge regression of the outputs on the presence features with
// sample weights exp(-distance^2 / kernel_width^2). Returns the m token
// coefficients; the unpenalized intercept is reported on request. A singular
// system is only possible with ridge_alpha = 0 and raises an error.
std::vector<double> fit_surrogate(const PerturbationSet& samples,
                                  std::span<const double> outputs, const LimeConfig& config,
                                  double* intercept = nullptr);

// Keeps the tokens whose mask bit is 1, preserving order (deletion
// semantics, the same text ablation the faithfulness metrics use).
std::vector<std::string> apply_mask(const std::vector<std::string>& tokens,
                                    const std::uint8_t* mask);

// Perturb -> predict per row -> fit. The RNG stream is derived from
// (config.seed, instance_id) so results do not depend on corpus order.
// target_class < 0 selects the class the model predicts on the full input.
AttributionMap lime_explain(const PredictFn& predict_fn, const std::vector<std::string>& tokens,
                            const std::string& instance_id, int target_class,
                            const LimeConfig& config);

}  // namespace xintent
