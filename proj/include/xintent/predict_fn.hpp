#pragma once

#include <functional>
#include <string>
#include <vector>

namespace xintent {

// Black-box classifier interface shared by the explainer and the
// faithfulness metrics: token strings in, class probabilities out.
using PredictFn = std::function<std::vector<double>(const std::vector<std::string>&)>;

}  // namespace xintent
