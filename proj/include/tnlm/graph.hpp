#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace tnlm {

using VertexId = std::size_t;
using EdgeId = std::size_t;

enum class EdgeKind { internal, in, out };

std::string to_string(EdgeKind kind);

/// One edge of a quiver with boundary. In edges have only a target, Out edges
/// only a source, internal edges both.
struct Edge {
    EdgeKind kind = EdgeKind::internal;
    std::optional<VertexId> source;
    std::optional<VertexId> target;

    bool operator==(const Edge&) const = default;
};

/// Directed multigraph with boundary. Vertex and edge ids are dense
/// (0..num-1). The constructor checks the structural invariants (totality of
/// source/target on their domains, every vertex incident to some edge);
/// acyclicity is established by topological_layers, which every network
/// constructor runs.
class Quiver {
public:
    Quiver(std::size_t num_vertices, std::vector<Edge> edges);

    std::size_t num_vertices() const noexcept { return num_vertices_; }
    std::size_t num_edges() const noexcept { return edges_.size(); }
    const Edge& edge(EdgeId e) const { return edges_.at(e); }
    const std::vector<Edge>& edges() const noexcept { return edges_; }

    /// Edges whose target is v, ascending id.
    const std::vector<EdgeId>& incoming(VertexId v) const { return incoming_.at(v); }
    /// Edges whose source is v, ascending id.
    const std::vector<EdgeId>& outgoing(VertexId v) const { return outgoing_.at(v); }

    /// Boundary and internal edge sets, ascending id. The Out order is the
    /// canonical order of sequence positions.
    const std::vector<EdgeId>& in_edges() const noexcept { return in_edges_; }
    const std::vector<EdgeId>& out_edges() const noexcept { return out_edges_; }
    const std::vector<EdgeId>& internal_edges() const noexcept { return internal_edges_; }

    /// Rooted directed tree: a single In edge and exactly one incoming edge
    /// per vertex.
    bool is_tree() const;

    bool operator==(const Quiver& other) const {
        return num_vertices_ == other.num_vertices_ && edges_ == other.edges_;
    }

private:
    std::size_t num_vertices_;
    std::vector<Edge> edges_;
    std::vector<std::vector<EdgeId>> incoming_;
    std::vector<std::vector<EdgeId>> outgoing_;
    std::vector<EdgeId> in_edges_;
    std::vector<EdgeId> out_edges_;
    std::vector<EdgeId> internal_edges_;
};

/// Ordered partition of vertices. layers[0] is the source side (fed by the
/// In edges), layers.back() the target side (feeding Out). Every internal
/// edge goes from a lower-indexed layer to a higher-indexed one.
struct Layering {
    std::vector<std::vector<VertexId>> layers;
    std::vector<std::size_t> layer_of;  ///< indexed by vertex id

    std::size_t size() const noexcept { return layers.size(); }
};

/// Longest-path layering from the sources; vertices sorted by id inside each
/// layer. Throws CycleError naming the edges of one directed cycle.
Layering topological_layers(const Quiver& q);

/// Vertex ids in layer order (a topological order).
std::vector<VertexId> topological_order(const Layering& layering);

/// Line of n vertices. The In edge enters vertex 0, each vertex emits one
/// observable (Out) edge and a bond edge to the next vertex.
Quiver build_chain(std::size_t n);

/// Perfect binary tree with n = 2^d leaves: n-1 vertices of type (2,1), one
/// In edge at the root. n = 1 degenerates to a single (1,1) vertex.
Quiver build_binary_tree(std::size_t n);

/// Binary tree interlaced with (2,2) disentanglers. After each tree layer,
/// a disentangler couples the last edge of a block with the first edge of
/// the next block whenever the two blocks are siblings (their parent
/// vertices share a parent). Open boundary, no wrap-around.
Quiver build_mera(std::size_t n);

}  // namespace tnlm
