#include "tnlm/network.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "tnlm/errors.hpp"
#include "tnlm/rng.hpp"

namespace tnlm {
namespace {

using RowMajorMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatrixMap = Eigen::Map<const RowMajorMatrix>;

ConstMatrixMap vertex_matrix(const TensorNetwork& net, VertexId v) {
    const DenseTensor& t = net.tensor(v);
    return ConstMatrixMap(t.data().data(), static_cast<Eigen::Index>(net.out_dim(v)),
                          static_cast<Eigen::Index>(net.in_dim(v)));
}

ComplexVector kron_vectors(const std::vector<const ComplexVector*>& factors) {
    ComplexVector acc = ComplexVector::Ones(1);
    for (const ComplexVector* f : factors) {
        ComplexVector next(acc.size() * f->size());
        for (Eigen::Index i = 0; i < acc.size(); ++i) next.segment(i * f->size(), f->size()) = acc(i) * *f;
        acc = std::move(next);
    }
    return acc;
}

void check_layering(const TensorNetwork& net, const Layering& layering) {
    const Quiver& q = net.quiver();
    if (layering.layer_of.size() != q.num_vertices()) throw ArgumentError("layering does not match network");
    std::vector<int> count(q.num_vertices(), 0);
    for (std::size_t l = 0; l < layering.size(); ++l) {
        for (VertexId v : layering.layers[l]) {
            if (v >= q.num_vertices() || layering.layer_of[v] != l)
                throw ArgumentError("layering: inconsistent layer assignment");
            ++count[v];
        }
    }
    for (int c : count)
        if (c != 1) throw ArgumentError("layering is not a partition of the vertices");
    for (EdgeId e : q.internal_edges()) {
        const Edge& ed = q.edge(e);
        if (layering.layer_of[*ed.source] >= layering.layer_of[*ed.target])
            throw ArgumentError("layering: edge " + std::to_string(e) + " does not point forward");
    }
}

}  // namespace

TensorNetwork::TensorNetwork(Quiver quiver, std::vector<std::size_t> edge_dims, std::vector<DenseTensor> tensors,
                             IsometryCheck check, double tol)
    : quiver_(std::make_shared<const Quiver>(std::move(quiver))),
      edge_dims_(std::move(edge_dims)),
      tensors_(std::move(tensors)),
      tol_(tol) {
    layering_ = std::make_shared<const Layering>(topological_layers(*quiver_));
    validate(check);
}

TensorNetwork::TensorNetwork(std::shared_ptr<const Quiver> quiver, std::shared_ptr<const Layering> layering,
                             std::vector<std::size_t> edge_dims, std::vector<DenseTensor> tensors,
                             IsometryCheck check, double tol)
    : quiver_(std::move(quiver)),
      layering_(std::move(layering)),
      edge_dims_(std::move(edge_dims)),
      tensors_(std::move(tensors)),
      tol_(tol) {
    validate(check);
}

void TensorNetwork::validate(IsometryCheck check) const {
    const Quiver& q = *quiver_;
    if (edge_dims_.size() != q.num_edges())
        throw ShapeError("expected " + std::to_string(q.num_edges()) + " edge dimensions, got " +
                         std::to_string(edge_dims_.size()));
    for (std::size_t d : edge_dims_)
        if (d == 0) throw ShapeError("edge dimensions must be positive");
    if (tensors_.size() != q.num_vertices())
        throw ShapeError("expected " + std::to_string(q.num_vertices()) + " vertex tensors, got " +
                         std::to_string(tensors_.size()));
    for (VertexId v = 0; v < q.num_vertices(); ++v) {
        if (tensors_[v].shape() != vertex_shape(v))
            throw ShapeError("vertex " + std::to_string(v) + " tensor shape does not match its edges");
        if (in_dim(v) > out_dim(v))
            throw NoIsometryPossible("vertex " + std::to_string(v) + ": incoming dimension " +
                                     std::to_string(in_dim(v)) + " exceeds outgoing dimension " +
                                     std::to_string(out_dim(v)));
        if (check == IsometryCheck::enforce) {
            const double violation = isometry_violation(tensors_[v], split(v));
            if (violation > tol_)
                throw ArgumentError("vertex " + std::to_string(v) + " is not an isometry (violation " +
                                    std::to_string(violation) + ")");
        }
    }
}

std::vector<EdgeId> TensorNetwork::axis_edges(VertexId v) const {
    std::vector<EdgeId> axes = quiver_->outgoing(v);
    const auto& in = quiver_->incoming(v);
    axes.insert(axes.end(), in.begin(), in.end());
    return axes;
}

Shape TensorNetwork::vertex_shape(VertexId v) const {
    Shape shape;
    for (EdgeId e : axis_edges(v)) shape.push_back(edge_dims_.at(e));
    return shape;
}

IndexSplit TensorNetwork::split(VertexId v) const {
    return IndexSplit::out_then_in(quiver_->outgoing(v).size(), quiver_->incoming(v).size());
}

std::size_t TensorNetwork::in_dim(VertexId v) const {
    std::size_t d = 1;
    for (EdgeId e : quiver_->incoming(v)) d *= edge_dims_.at(e);
    return d;
}

std::size_t TensorNetwork::out_dim(VertexId v) const {
    std::size_t d = 1;
    for (EdgeId e : quiver_->outgoing(v)) d *= edge_dims_.at(e);
    return d;
}

Shape TensorNetwork::site_dims() const {
    Shape dims;
    for (EdgeId e : quiver_->out_edges()) dims.push_back(edge_dims_[e]);
    return dims;
}

bool TensorNetwork::is_pure_state_model() const {
    return quiver_->in_edges().size() == 1 && edge_dims_[quiver_->in_edges()[0]] == 1;
}

double TensorNetwork::max_isometry_violation() const {
    double worst = 0.0;
    for (VertexId v = 0; v < tensors_.size(); ++v)
        worst = std::max(worst, isometry_violation(tensors_[v], split(v)));
    return worst;
}

TensorNetwork TensorNetwork::with_tensors(std::vector<DenseTensor> tensors, IsometryCheck check) const {
    return TensorNetwork(quiver_, layering_, edge_dims_, std::move(tensors), check, tol_);
}

std::vector<std::size_t> isometric_edge_dims(const Quiver& q, std::size_t symbol_dim, std::size_t bond_cap,
                                             std::size_t in_dim) {
    if (symbol_dim == 0 || bond_cap == 0 || in_dim == 0)
        throw ArgumentError("isometric_edge_dims: dimensions must be positive");
    const Layering layering = topological_layers(q);
    std::vector<std::size_t> dims(q.num_edges(), 0);
    for (EdgeId e : q.out_edges()) dims[e] = symbol_dim;

    const auto order = topological_order(layering);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const VertexId v = *it;
        const auto& outs = q.outgoing(v);
        const auto& ins = q.incoming(v);
        std::size_t out_prod = 1;
        for (EdgeId e : outs) out_prod *= dims[e];
        if (ins.size() == 1) {
            const EdgeId e = ins[0];
            dims[e] = q.edge(e).kind == EdgeKind::in ? in_dim : std::min(bond_cap, out_prod);
        } else if (ins.size() == outs.size()) {
            for (std::size_t k = 0; k < ins.size(); ++k) {
                if (q.edge(ins[k]).kind == EdgeKind::in)
                    throw ArgumentError("isometric_edge_dims: In edge on a multi-input vertex");
                dims[ins[k]] = dims[outs[k]];
            }
        } else if (!ins.empty()) {
            throw ArgumentError("isometric_edge_dims: cannot size vertex " + std::to_string(v));
        }
    }
    if (in_dim > 1) {
        for (EdgeId e : q.in_edges()) {
            const VertexId t = *q.edge(e).target;
            std::size_t out_prod = 1;
            for (EdgeId o : q.outgoing(t)) out_prod *= dims[o];
            if (in_dim > out_prod) throw NoIsometryPossible("isometric_edge_dims: In dimension too large");
        }
    }
    return dims;
}

TensorNetwork random_network(Quiver q, std::vector<std::size_t> edge_dims, CounterRng& rng) {
    std::vector<DenseTensor> tensors;
    for (VertexId v = 0; v < q.num_vertices(); ++v) {
        Shape shape;
        std::size_t in = 1, out = 1;
        for (EdgeId e : q.outgoing(v)) {
            shape.push_back(edge_dims.at(e));
            out *= edge_dims.at(e);
        }
        for (EdgeId e : q.incoming(v)) {
            shape.push_back(edge_dims.at(e));
            in *= edge_dims.at(e);
        }
        // (out x in) row-major is exactly the (outs..., ins...) layout.
        tensors.push_back(reshape(random_isometry(in, out, rng), std::move(shape)));
    }
    return TensorNetwork(std::move(q), std::move(edge_dims), std::move(tensors));
}

namespace detail {

LabeledTensor contract_labeled(const LabeledTensor& a, const LabeledTensor& b) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    std::vector<bool> a_used(a.labels.size(), false), b_used(b.labels.size(), false);
    for (std::size_t i = 0; i < a.labels.size(); ++i) {
        for (std::size_t j = 0; j < b.labels.size(); ++j) {
            if (a.labels[i] == b.labels[j]) {
                pairs.emplace_back(i, j);
                a_used[i] = b_used[j] = true;
            }
        }
    }
    LabeledTensor out{contract(a.tensor, b.tensor, pairs), {}};
    for (std::size_t i = 0; i < a.labels.size(); ++i)
        if (!a_used[i]) out.labels.push_back(a.labels[i]);
    for (std::size_t j = 0; j < b.labels.size(); ++j)
        if (!b_used[j]) out.labels.push_back(b.labels[j]);
    return out;
}

DenseTensor arrange(const LabeledTensor& t, const std::vector<std::size_t>& order) {
    if (order.size() != t.labels.size()) throw ArgumentError("arrange: label count mismatch");
    std::vector<std::size_t> perm;
    for (std::size_t label : order) {
        const auto it = std::find(t.labels.begin(), t.labels.end(), label);
        if (it == t.labels.end()) throw ArgumentError("arrange: unknown label " + std::to_string(label));
        perm.push_back(static_cast<std::size_t>(it - t.labels.begin()));
    }
    return permute(t.tensor, perm);
}

}  // namespace detail

DenseTensor evaluate(const TensorNetwork& net) {
    detail::LabeledTensor frontier;
    for (VertexId v : topological_order(net.layering()))
        frontier = detail::contract_labeled(frontier, {net.tensor(v), net.axis_edges(v)});
    std::vector<std::size_t> order = net.quiver().out_edges();
    const auto& in = net.quiver().in_edges();
    order.insert(order.end(), in.begin(), in.end());
    return detail::arrange(frontier, order);
}

DenseTensor state(const TensorNetwork& net) {
    if (!net.is_pure_state_model())
        throw PreconditionError("state() requires exactly one In edge of dimension 1");
    return reshape(evaluate(net), net.site_dims());
}

void check_sequence(const TensorNetwork& net, const Sequence& s) {
    if (s.size() != net.num_sites())
        throw ArgumentError("sequence length " + std::to_string(s.size()) + " does not match network length " +
                            std::to_string(net.num_sites()));
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (s[k] >= net.site_dim(k))
            throw ArgumentError("symbol " + std::to_string(s[k]) + " at position " + std::to_string(k) +
                                " is out of range");
    }
}

TreeMessages tree_messages(const TensorNetwork& net, const Sequence& s, bool with_down) {
    const Quiver& q = net.quiver();
    if (!q.is_tree()) throw UnsupportedTopology("tree_messages requires a tree network");
    if (!net.is_pure_state_model()) throw PreconditionError("tree_messages requires a pure-state model");
    check_sequence(net, s);

    TreeMessages m;
    m.up.resize(q.num_edges());
    const auto& outs = q.out_edges();
    for (std::size_t site = 0; site < outs.size(); ++site) {
        ComplexVector basis = ComplexVector::Zero(static_cast<Eigen::Index>(net.edge_dim(outs[site])));
        basis(static_cast<Eigen::Index>(s[site])) = 1.0;
        m.up[outs[site]] = std::move(basis);
    }

    const auto order = topological_order(net.layering());
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const VertexId v = *it;
        std::vector<const ComplexVector*> children;
        for (EdgeId e : q.outgoing(v)) children.push_back(&m.up[e]);
        m.up[q.incoming(v)[0]] = vertex_matrix(net, v).transpose() * kron_vectors(children);
    }
    const EdgeId root_edge = q.in_edges()[0];
    m.amplitude = m.up[root_edge](0);
    if (!with_down) return m;

    m.down.resize(q.num_edges());
    m.down[root_edge] = ComplexVector::Ones(1);
    for (VertexId v : order) {
        const auto& child_edges = q.outgoing(v);
        const ComplexVector w = vertex_matrix(net, v) * m.down[q.incoming(v)[0]];
        // w is a tensor over the child axes; contract all but one with the
        // upward messages to obtain each child's downward message.
        std::vector<std::size_t> dims;
        for (EdgeId e : child_edges) dims.push_back(net.edge_dim(e));
        for (std::size_t t = 0; t < child_edges.size(); ++t) {
            ComplexVector d = ComplexVector::Zero(static_cast<Eigen::Index>(dims[t]));
            std::vector<std::size_t> idx(dims.size(), 0);
            for (Eigen::Index flat = 0; flat < w.size(); ++flat) {
                Complex weight = w(flat);
                for (std::size_t o = 0; o < dims.size() && weight != Complex{}; ++o)
                    if (o != t) weight *= m.up[child_edges[o]](static_cast<Eigen::Index>(idx[o]));
                d(static_cast<Eigen::Index>(idx[t])) += weight;
                for (std::size_t k = dims.size(); k-- > 0;) {
                    if (++idx[k] < dims[k]) break;
                    idx[k] = 0;
                }
            }
            m.down[child_edges[t]] = std::move(d);
        }
    }
    return m;
}

Complex amplitude(const TensorNetwork& net, const Sequence& s) {
    if (!net.is_pure_state_model())
        throw PreconditionError("amplitude() requires exactly one In edge of dimension 1");
    check_sequence(net, s);
    if (net.quiver().is_tree()) return tree_messages(net, s, false).amplitude;
    return state(net).at(std::span<const std::size_t>(s));
}

std::vector<EdgeId> cut_edges(const TensorNetwork& net, const Layering& layering, std::size_t k) {
    if (k > layering.size()) throw ArgumentError("cut index out of range");
    const Quiver& q = net.quiver();
    const auto depth = static_cast<long>(layering.size());
    const auto cut = static_cast<long>(k);
    std::vector<EdgeId> edges;
    for (EdgeId e = 0; e < q.num_edges(); ++e) {
        const Edge& ed = q.edge(e);
        const long from = ed.source ? static_cast<long>(layering.layer_of[*ed.source]) : -1;
        const long to = ed.target ? static_cast<long>(layering.layer_of[*ed.target]) : depth;
        if (from < cut && cut <= to) edges.push_back(e);
    }
    return edges;
}

Shape cut_dims(const TensorNetwork& net, const Layering& layering, std::size_t k) {
    Shape dims;
    for (EdgeId e : cut_edges(net, layering, k)) dims.push_back(net.edge_dim(e));
    return dims;
}

DenseTensor layer_map(const TensorNetwork& net, const Layering& layering, std::size_t l) {
    check_layering(net, layering);
    if (l >= layering.size())
        throw ArgumentError("layer index " + std::to_string(l) + " out of range (" +
                            std::to_string(layering.size()) + " layers)");
    const Quiver& q = net.quiver();
    // Labels: an edge's id on the output side, id + E on the input side.
    const std::size_t shift = q.num_edges();
    detail::LabeledTensor acc;
    for (VertexId v : layering.layers[l]) {
        std::vector<std::size_t> labels = q.outgoing(v);
        for (EdgeId e : q.incoming(v)) labels.push_back(e + shift);
        acc = detail::contract_labeled(acc, {net.tensor(v), std::move(labels)});
    }
    const auto before = cut_edges(net, layering, l);
    const auto after = cut_edges(net, layering, l + 1);
    for (EdgeId e : before) {
        if (std::binary_search(after.begin(), after.end(), e))
            acc = detail::contract_labeled(acc, {DenseTensor::identity(net.edge_dim(e)), {e, e + shift}});
    }
    std::vector<std::size_t> order = after;
    for (EdgeId e : before) order.push_back(e + shift);
    return detail::arrange(acc, order);
}

DenseTensor layer_map(const TensorNetwork& net, std::size_t l) { return layer_map(net, net.layering(), l); }

ComplexMatrix compose_layers(const TensorNetwork& net, const Layering& layering, std::size_t from,
                             std::size_t to) {
    if (from > to || to > layering.size()) throw ArgumentError("compose_layers: invalid layer range");
    const auto dim = static_cast<Eigen::Index>(shape_size(cut_dims(net, layering, from)));
    ComplexMatrix c = ComplexMatrix::Identity(dim, dim);
    for (std::size_t k = from; k < to; ++k) {
        const DenseTensor m = layer_map(net, layering, k);
        const auto rows = static_cast<Eigen::Index>(shape_size(cut_dims(net, layering, k + 1)));
        const ComplexMatrix mk = ConstMatrixMap(m.data().data(), rows, c.rows());
        c = mk * c;
    }
    return c;
}

ComplexVector intermediate_state(const TensorNetwork& net, const Layering& layering, std::size_t l) {
    if (!net.is_pure_state_model())
        throw PreconditionError("intermediate_state requires exactly one In edge of dimension 1");
    return compose_layers(net, layering, 0, l).col(0);
}

DenseTensor operator_flow(const TensorNetwork& net, const Layering& layering, const DenseTensor& op,
                          std::size_t l) {
    check_layering(net, layering);
    if (l > layering.size()) throw ArgumentError("operator_flow: cut index out of range");
    const Shape out_dims = net.site_dims();
    const std::size_t n = shape_size(out_dims);
    Shape doubled = out_dims;
    doubled.insert(doubled.end(), out_dims.begin(), out_dims.end());
    const bool as_matrix_shape = op.rank() == 2 && op.dim(0) == n && op.dim(1) == n;
    if (!as_matrix_shape && op.shape() != doubled)
        throw ShapeError("operator_flow: operator does not act on the Out space");

    const ComplexMatrix o = ConstMatrixMap(op.data().data(), static_cast<Eigen::Index>(n),
                                           static_cast<Eigen::Index>(n));
    const ComplexMatrix c = compose_layers(net, layering, l, layering.size());
    const ComplexMatrix flowed = c.adjoint() * o * c;

    Shape shape = cut_dims(net, layering, l);
    const Shape half = shape;
    shape.insert(shape.end(), half.begin(), half.end());
    return DenseTensor::from_matrix(flowed, std::move(shape));
}

}  // namespace tnlm
