#pragma once

#include <cstddef>
#include <memory>
#include <utility>
#include <vector>

#include "tnlm/graph.hpp"
#include "tnlm/tensor.hpp"

namespace tnlm {

class CounterRng;

/// One symbol index per Out edge, in canonical (ascending edge id) order.
using Sequence = std::vector<std::size_t>;

enum class IsometryCheck { enforce, skip };

/// Quiver decorated with edge dimensions and one tensor per vertex.
///
/// Vertex tensors use a single axis convention throughout: outgoing edges in
/// ascending id order, then incoming edges in ascending id order. Viewed as a
/// matrix (rows = outgoing, columns = incoming) each tensor is the linear map
/// it decorates the vertex with. The constructor checks shapes, acyclicity,
/// and (unless told to skip) that every vertex tensor is an isometry.
class TensorNetwork {
public:
    TensorNetwork(Quiver quiver, std::vector<std::size_t> edge_dims, std::vector<DenseTensor> tensors,
                  IsometryCheck check = IsometryCheck::enforce, double tol = kDefaultIsometryTol);

    const Quiver& quiver() const noexcept { return *quiver_; }
    const Layering& layering() const noexcept { return *layering_; }

    std::size_t edge_dim(EdgeId e) const { return edge_dims_.at(e); }
    const std::vector<std::size_t>& edge_dims() const noexcept { return edge_dims_; }

    std::size_t num_vertices() const noexcept { return tensors_.size(); }
    const DenseTensor& tensor(VertexId v) const { return tensors_.at(v); }
    const std::vector<DenseTensor>& tensors() const noexcept { return tensors_; }

    /// Edges labelling the axes of vertex v's tensor, in axis order.
    std::vector<EdgeId> axis_edges(VertexId v) const;
    Shape vertex_shape(VertexId v) const;
    IndexSplit split(VertexId v) const;
    /// Product of incoming / outgoing edge dimensions at v.
    std::size_t in_dim(VertexId v) const;
    std::size_t out_dim(VertexId v) const;

    /// Number of Out edges (sequence length n) and the dimension of site k.
    std::size_t num_sites() const noexcept { return quiver_->out_edges().size(); }
    std::size_t site_dim(std::size_t site) const { return edge_dims_.at(quiver_->out_edges().at(site)); }
    Shape site_dims() const;

    /// Single In edge of dimension 1: the network is a state Psi = u_gamma 1.
    bool is_pure_state_model() const;

    double tolerance() const noexcept { return tol_; }
    double max_isometry_violation() const;

    /// Same quiver and dimensions, new vertex tensors.
    TensorNetwork with_tensors(std::vector<DenseTensor> tensors,
                               IsometryCheck check = IsometryCheck::enforce) const;

private:
    TensorNetwork(std::shared_ptr<const Quiver> quiver, std::shared_ptr<const Layering> layering,
                  std::vector<std::size_t> edge_dims, std::vector<DenseTensor> tensors, IsometryCheck check,
                  double tol);
    void validate(IsometryCheck check) const;

    std::shared_ptr<const Quiver> quiver_;
    std::shared_ptr<const Layering> layering_;
    std::vector<std::size_t> edge_dims_;
    std::vector<DenseTensor> tensors_;
    double tol_;
};

/// Edge dimensions for a pure-state model: Out edges get `symbol_dim`, In
/// edges `in_dim`, and every other edge is sized bottom-up so that each
/// vertex admits an isometry: a single incoming edge gets
/// min(bond_cap, product of outgoing dims); a vertex with as many incoming
/// as outgoing edges mirrors the outgoing dims.
std::vector<std::size_t> isometric_edge_dims(const Quiver& q, std::size_t symbol_dim, std::size_t bond_cap,
                                             std::size_t in_dim = 1);

/// Every vertex tensor drawn Haar-random; vertices are visited in id order.
TensorNetwork random_network(Quiver q, std::vector<std::size_t> edge_dims, CounterRng& rng);

/// Contracted map u_gamma with axes (Out edges ascending, then In edges
/// ascending). Vertices are applied one at a time in topological order.
DenseTensor evaluate(const TensorNetwork& net);

/// Psi = u_gamma 1 as a tensor over the Out edges. Requires a pure-state model.
DenseTensor state(const TensorNetwork& net);

/// <s|Psi>. Trees use leaf-to-root message passing; other DAGs index the
/// full state.
Complex amplitude(const TensorNetwork& net, const Sequence& s);

/// Throws ArgumentError unless s is a valid sequence for net.
void check_sequence(const TensorNetwork& net, const Sequence& s);

/// Per-edge messages of a tree network for one sequence.
/// up[e]: the subtree below e contracted with <s| on its leaves.
/// down[e]: everything above e contracted with the input 1, so that the
/// amplitude equals down[e] . up[e] for every edge e.
struct TreeMessages {
    std::vector<ComplexVector> up;
    std::vector<ComplexVector> down;
    Complex amplitude;
};
TreeMessages tree_messages(const TensorNetwork& net, const Sequence& s, bool with_down);

/// Edges crossing cut k of a layering (k = 0: In edges, k = L: Out edges),
/// ascending id. Layer k maps the space of cut k to that of cut k+1.
std::vector<EdgeId> cut_edges(const TensorNetwork& net, const Layering& layering, std::size_t k);
Shape cut_dims(const TensorNetwork& net, const Layering& layering, std::size_t k);

/// Tensor product of layer l's vertex maps with identities on the edges that
/// pass through the layer. Axes: cut l+1 edges, then cut l edges.
DenseTensor layer_map(const TensorNetwork& net, const Layering& layering, std::size_t l);
DenseTensor layer_map(const TensorNetwork& net, std::size_t l);

/// Matrix of layers [from, to) composed: maps cut `from` to cut `to`.
ComplexMatrix compose_layers(const TensorNetwork& net, const Layering& layering, std::size_t from,
                             std::size_t to);

/// State on cut l obtained by applying layers 0..l-1 to the input 1.
ComplexVector intermediate_state(const TensorNetwork& net, const Layering& layering, std::size_t l);

/// Pull an operator on the Out space back to cut l: c^dagger op c with c the
/// composition of layers l..L-1. `op` is either an N x N matrix or a tensor
/// with axes (Out..., Out...). Result axes: (cut l..., cut l...).
DenseTensor operator_flow(const TensorNetwork& net, const Layering& layering, const DenseTensor& op,
                          std::size_t l);

namespace detail {

/// Tensor whose axes are named by edge labels; contraction pairs equal labels.
struct LabeledTensor {
    DenseTensor tensor = DenseTensor::scalar(1.0);
    std::vector<std::size_t> labels;
};

LabeledTensor contract_labeled(const LabeledTensor& a, const LabeledTensor& b);
/// Reorder axes to the given label order (a permutation of the labels).
DenseTensor arrange(const LabeledTensor& t, const std::vector<std::size_t>& order);

}  // namespace detail

}  // namespace tnlm
