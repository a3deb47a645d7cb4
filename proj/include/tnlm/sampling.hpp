#pragma once

#include <cstddef>
#include <vector>

#include "tnlm/model.hpp"

namespace tnlm {

class CounterRng;

/// prob(s_k | prefix) for k = prefix.size(), over the symbols of site k.
/// Throws ConditioningError when the prefix has zero probability.
std::vector<double> conditional_distribution(const BornMarginals& marginals, const Sequence& prefix);
std::vector<double> conditional_distribution(const TensorNetwork& net, const Sequence& prefix);

/// Exact autoregressive draws. Each symbol is chosen by inverse CDF over the
/// symbol order: the first index whose cumulative probability exceeds a
/// uniform draw (strict u < cumulative). The uniform for draw d, position k
/// is output d * n + k of the sampling stream of `rng`, so results do not
/// depend on how draws are scheduled.
std::vector<Sequence> sample(const TensorNetwork& net, std::size_t count, const CounterRng& rng);

}  // namespace tnlm
