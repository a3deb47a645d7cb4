#include "tnlm/training.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "tnlm/errors.hpp"
#include "tnlm/rng.hpp"

namespace tnlm {
namespace {

std::string sequence_string(const Sequence& s) {
    std::ostringstream os;
    os << '(';
    for (std::size_t k = 0; k < s.size(); ++k) os << (k ? "," : "") << s[k];
    os << ')';
    return os.str();
}

DenseTensor slice_axis(const DenseTensor& t, std::size_t axis, std::size_t index) {
    DenseTensor basis({t.dim(axis)});
    basis[index] = 1.0;
    return contract(t, basis, {{axis, 0}});
}

// Environment of every vertex for <s|u_gamma|1>, i.e. dA/du_v, on trees.
VertexArrays tree_environments(const TensorNetwork& net, const Sequence& s, Complex& amp) {
    const TreeMessages m = tree_messages(net, s, true);
    amp = m.amplitude;
    const Quiver& q = net.quiver();
    VertexArrays env;
    for (VertexId v = 0; v < net.num_vertices(); ++v) {
        ComplexVector below = ComplexVector::Ones(1);
        for (EdgeId e : q.outgoing(v)) {
            const ComplexVector& f = m.up[e];
            ComplexVector next(below.size() * f.size());
            for (Eigen::Index i = 0; i < below.size(); ++i) next.segment(i * f.size(), f.size()) = below(i) * f;
            below = std::move(next);
        }
        const ComplexMatrix e = below * m.down[q.incoming(v)[0]].transpose();
        env.push_back(DenseTensor::from_matrix(e, net.tensor(v).shape()));
    }
    return env;
}

// Same for general DAGs: slice the Out legs at s, then contract every other
// vertex of the closed network.
VertexArrays dag_environments(const TensorNetwork& net, const Sequence& s, Complex& amp) {
    const Quiver& q = net.quiver();
    // Fixed index per edge: the symbol on Out edges, 0 on the trivial In edge.
    std::vector<std::size_t> fixed(q.num_edges(), SIZE_MAX);
    for (std::size_t k = 0; k < q.out_edges().size(); ++k) fixed[q.out_edges()[k]] = s[k];
    for (EdgeId e : q.in_edges()) fixed[e] = 0;

    std::vector<detail::LabeledTensor> sliced(net.num_vertices());
    for (VertexId v = 0; v < net.num_vertices(); ++v) {
        DenseTensor t = net.tensor(v);
        std::vector<std::size_t> labels;
        std::size_t axis = 0;
        for (EdgeId e : net.axis_edges(v)) {
            if (fixed[e] != SIZE_MAX) {
                t = slice_axis(t, axis, fixed[e]);
            } else {
                labels.push_back(e);
                ++axis;
            }
        }
        sliced[v] = {std::move(t), std::move(labels)};
    }

    const auto order = topological_order(net.layering());
    VertexArrays env;
    amp = 0.0;
    for (VertexId v = 0; v < net.num_vertices(); ++v) {
        detail::LabeledTensor rest;
        for (VertexId w : order)
            if (w != v) rest = detail::contract_labeled(rest, sliced[w]);
        const DenseTensor reduced = detail::arrange(rest, sliced[v].labels);

        // Scatter back into the full vertex shape: zero unless every Out leg
        // carries its symbol.
        const auto axes = net.axis_edges(v);
        DenseTensor full(net.tensor(v).shape());
        std::vector<std::size_t> idx(axes.size(), 0);
        for (std::size_t flat = 0; flat < full.size(); ++flat) {
            bool match = true;
            std::size_t r = 0;
            for (std::size_t k = 0; k < axes.size(); ++k) {
                if (fixed[axes[k]] != SIZE_MAX) {
                    match = match && idx[k] == fixed[axes[k]];
                } else {
                    r = r * full.dim(k) + idx[k];
                }
            }
            if (match) full[flat] = reduced[r];
            for (std::size_t k = axes.size(); k-- > 0;) {
                if (++idx[k] < full.dim(k)) break;
                idx[k] = 0;
            }
        }
        if (v == 0) {
            for (std::size_t k = 0; k < full.size(); ++k) amp += net.tensor(v)[k] * full[k];
        }
        env.push_back(std::move(full));
    }
    return env;
}

}  // namespace

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
        throw ArgumentError("learning rate must be positive");
    if (batch_size == 0) throw ArgumentError("batch size must be at least 1");
    if (!(isometry_tol > 0.0)) throw ArgumentError("isometry tolerance must be positive");
}

bool LossTrace::same_values(const LossTrace& other) const {
    if (records.size() != other.records.size()) return false;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& a = records[i];
        const auto& b = other.records[i];
        if (a.step != b.step || a.loss != b.loss || a.max_isometry_violation != b.max_isometry_violation)
            return false;
    }
    return true;
}

void write_loss_trace_csv(const LossTrace& trace, std::ostream& os) {
    os << "step,loss,max_isometry_violation\n";
    os << std::setprecision(17);
    for (const auto& r : trace.records) os << r.step << ',' << r.loss << ',' << r.max_isometry_violation << '\n';
}

double sequence_free_energy(const TensorNetwork& net, const Sequence& s) {
    const double p = std::norm(amplitude(net, s));
    return p > 0.0 ? -std::log(p) : std::numeric_limits<double>::infinity();
}

VertexArrays gradient(const TensorNetwork& net, const Sequence& s) {
    if (!net.is_pure_state_model()) throw PreconditionError("gradient requires a pure-state model");
    check_sequence(net, s);
    Complex amp;
    VertexArrays env = net.quiver().is_tree() ? tree_environments(net, s, amp) : dag_environments(net, s, amp);
    if (!(std::norm(amp) > std::numeric_limits<double>::min()))
        throw SingularGradient("zero amplitude at sequence " + sequence_string(s) + ": gradient undefined");
    // F = -log(A conj(A)) with A linear in u: dF/d(conj u) = -conj(dA/du) / conj(A).
    const Complex scale = -1.0 / std::conj(amp);
    for (DenseTensor& e : env) {
        for (Complex& z : e.data()) z = scale * std::conj(z);
    }
    return env;
}

VertexArrays mean_gradient(const TensorNetwork& net, const std::vector<WeightedSequence>& batch) {
    if (batch.empty()) throw ArgumentError("empty batch");
    VertexArrays total;
    std::uint64_t weight = 0;
    for (const auto& [s, m] : batch) {
        if (m == 0) throw ArgumentError("batch multiplicities must be positive");
        VertexArrays g = gradient(net, s);
        const auto factor = static_cast<double>(m);
        if (total.empty()) {
            total.reserve(g.size());
            for (DenseTensor& t : g) total.push_back(factor * std::move(t));
        } else {
            for (std::size_t v = 0; v < g.size(); ++v) total[v] += factor * g[v];
        }
        weight += m;
    }
    for (DenseTensor& t : total) t *= 1.0 / static_cast<double>(weight);
    return total;
}

TensorNetwork sgd_step(const TensorNetwork& net, const std::vector<WeightedSequence>& batch, double eta) {
    VertexArrays g = mean_gradient(net, batch);
    for (DenseTensor& t : g) t *= -1.0;
    return retract(net, tangent_project(net, g), eta);
}

TrainResult train(const TensorNetwork& net, const SampleMultiset& sample, const TrainConfig& cfg,
                  const CheckpointFn& checkpoint) {
    cfg.validate();
    sample.check_against(net);
    TrainResult result{net, {}};
    if (cfg.steps == 0) return result;
    if (sample.empty()) throw ArgumentError("cannot train on an empty sample");

    std::vector<const Sequence*> draws;
    draws.reserve(sample.cardinality());
    for (const auto& [s, m] : sample.entries())
        for (std::uint64_t k = 0; k < m; ++k) draws.push_back(&s);

    CounterRng order_rng(cfg.seed, streams::shuffle);
    std::vector<std::size_t> order(draws.size());
    std::size_t cursor = order.size();
    auto next_draw = [&]() -> const Sequence& {
        if (cursor == order.size()) {
            for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
            if (cfg.shuffle) {
                for (std::size_t i = order.size(); i > 1; --i)
                    std::swap(order[i - 1], order[order_rng.uniform_index(i)]);
            }
            cursor = 0;
        }
        return *draws[order[cursor++]];
    };

    const auto start = std::chrono::steady_clock::now();
    const auto total = static_cast<double>(sample.cardinality());
    for (std::size_t step = 1; step <= cfg.steps; ++step) {
        // Merge repeated draws; first-appearance order keeps the sum deterministic.
        std::vector<WeightedSequence> batch;
        std::map<Sequence, std::size_t> slot;
        for (std::size_t b = 0; b < cfg.batch_size; ++b) {
            const Sequence& s = next_draw();
            const auto [it, fresh] = slot.emplace(s, batch.size());
            if (fresh)
                batch.emplace_back(s, 1);
            else
                ++batch[it->second].second;
        }
        try {
            result.network = sgd_step(result.network, batch, cfg.learning_rate);
        } catch (const SingularityError& e) {
            // The step dwarfs the current point: the iteration has diverged.
            throw SingularityError("training diverged at step " + std::to_string(step) +
                                       " (try a smaller learning rate or larger batch): " + e.what(),
                                   e.smallest_singular_value());
        }

        LossRecord record;
        record.step = step;
        record.loss = negative_log_likelihood(result.network, sample).value / total;
        record.max_isometry_violation = result.network.max_isometry_violation();
        record.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (record.max_isometry_violation > cfg.isometry_tol) {
            throw Error("isometry violation " + std::to_string(record.max_isometry_violation) + " after step " +
                        std::to_string(step) + " exceeds tolerance");
        }
        result.trace.records.push_back(record);
        if (checkpoint && cfg.checkpoint_every > 0 && step % cfg.checkpoint_every == 0)
            checkpoint(step, result.network);
    }
    return result;
}

}  // namespace tnlm
