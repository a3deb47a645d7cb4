#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <utility>
#include <vector>

#include "tnlm/manifold.hpp"
#include "tnlm/model.hpp"

namespace tnlm {

struct TrainConfig {
    double learning_rate = 0.05;
    std::size_t steps = 1000;
    std::size_t batch_size = 1;
    std::uint64_t seed = 0;
    bool shuffle = true;
    std::size_t checkpoint_every = 0;  ///< 0 disables checkpoints
    double isometry_tol = kDefaultIsometryTol;

    void validate() const;
};

struct LossRecord {
    std::size_t step = 0;
    double loss = 0.0;  ///< F(u|S) / |S| after the step
    double wall_seconds = 0.0;
    double max_isometry_violation = 0.0;
};

/// Per-step records. wall_seconds is informational and excluded from
/// comparisons and from the CSV file, both of which are deterministic.
struct LossTrace {
    std::vector<LossRecord> records;

    bool same_values(const LossTrace& other) const;
};

/// CSV with header "step,loss,max_isometry_violation"; values printed with
/// 17 significant digits.
void write_loss_trace_csv(const LossTrace& trace, std::ostream& os);

using WeightedSequence = std::pair<Sequence, std::uint64_t>;

/// F(u|s) = -log |<s|Psi>|^2. Works for non-isometric parameters too.
double sequence_free_energy(const TensorNetwork& net, const Sequence& s);

/// Wirtinger derivative dF/d(conj u) of F(u|s) for every vertex tensor,
/// accumulated in reverse through the contraction. The directional
/// derivative of F along xi is 2 Re <G, xi>. Throws SingularGradient if the
/// amplitude of s vanishes.
VertexArrays gradient(const TensorNetwork& net, const Sequence& s);

/// Multiplicity-weighted mean gradient of a batch; summation in batch order.
VertexArrays mean_gradient(const TensorNetwork& net, const std::vector<WeightedSequence>& batch);

/// retract(net, tangent_project(net, -mean gradient), eta).
TensorNetwork sgd_step(const TensorNetwork& net, const std::vector<WeightedSequence>& batch, double eta);

/// Called with (step, network) every checkpoint_every steps.
using CheckpointFn = std::function<void(std::size_t, const TensorNetwork&)>;

struct TrainResult {
    TensorNetwork network;
    LossTrace trace;
};

/// Mini-batch Riemannian descent over the multiset expanded into individual
/// draws. With shuffling, each epoch visits a fresh permutation drawn from the
/// shuffle stream of cfg.seed; otherwise the draws are cycled in
/// lexicographic order.
TrainResult train(const TensorNetwork& net, const SampleMultiset& sample, const TrainConfig& cfg,
                  const CheckpointFn& checkpoint = {});

}  // namespace tnlm
