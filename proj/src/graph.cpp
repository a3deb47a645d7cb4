#include "tnlm/graph.hpp"

#include <algorithm>
#include <bit>
#include <sstream>

#include "tnlm/errors.hpp"

namespace tnlm {

std::string to_string(EdgeKind kind) {
    switch (kind) {
        case EdgeKind::internal: return "internal";
        case EdgeKind::in: return "in";
        case EdgeKind::out: return "out";
    }
    return "?";
}

Quiver::Quiver(std::size_t num_vertices, std::vector<Edge> edges)
    : num_vertices_(num_vertices),
      edges_(std::move(edges)),
      incoming_(num_vertices),
      outgoing_(num_vertices) {
    for (EdgeId e = 0; e < edges_.size(); ++e) {
        const Edge& ed = edges_[e];
        const bool needs_source = ed.kind != EdgeKind::in;
        const bool needs_target = ed.kind != EdgeKind::out;
        if (needs_source != ed.source.has_value() || needs_target != ed.target.has_value()) {
            throw ArgumentError("edge " + std::to_string(e) + " (" + to_string(ed.kind) +
                                ") has inconsistent source/target");
        }
        if (ed.source && *ed.source >= num_vertices_)
            throw ArgumentError("edge " + std::to_string(e) + " has unknown source vertex");
        if (ed.target && *ed.target >= num_vertices_)
            throw ArgumentError("edge " + std::to_string(e) + " has unknown target vertex");
        if (ed.source) outgoing_[*ed.source].push_back(e);
        if (ed.target) incoming_[*ed.target].push_back(e);
        switch (ed.kind) {
            case EdgeKind::internal: internal_edges_.push_back(e); break;
            case EdgeKind::in: in_edges_.push_back(e); break;
            case EdgeKind::out: out_edges_.push_back(e); break;
        }
    }
    for (VertexId v = 0; v < num_vertices_; ++v) {
        if (incoming_[v].empty() && outgoing_[v].empty())
            throw ArgumentError("vertex " + std::to_string(v) + " has no incident edge");
    }
}

bool Quiver::is_tree() const {
    if (in_edges_.size() != 1) return false;
    return std::all_of(incoming_.begin(), incoming_.end(), [](const auto& in) { return in.size() == 1; });
}

Layering topological_layers(const Quiver& q) {
    const std::size_t nv = q.num_vertices();
    std::vector<std::size_t> pending(nv, 0);
    for (EdgeId e : q.internal_edges()) ++pending[*q.edge(e).target];

    Layering out;
    out.layer_of.assign(nv, 0);
    std::vector<VertexId> frontier;
    for (VertexId v = 0; v < nv; ++v)
        if (pending[v] == 0) frontier.push_back(v);

    std::size_t placed = 0;
    while (!frontier.empty()) {
        std::sort(frontier.begin(), frontier.end());
        const std::size_t index = out.layers.size();
        std::vector<VertexId> next;
        for (VertexId v : frontier) {
            out.layer_of[v] = index;
            for (EdgeId e : q.outgoing(v)) {
                if (q.edge(e).kind != EdgeKind::internal) continue;
                const VertexId t = *q.edge(e).target;
                if (--pending[t] == 0) next.push_back(t);
            }
        }
        placed += frontier.size();
        out.layers.push_back(std::move(frontier));
        frontier = std::move(next);
    }
    if (placed == nv) return out;

    // Every unplaced vertex still has an unplaced predecessor: walk backwards
    // until a vertex repeats.
    VertexId v = 0;
    while (pending[v] == 0) ++v;
    std::vector<VertexId> path;
    std::vector<EdgeId> via;
    std::vector<std::ptrdiff_t> seen_at(nv, -1);
    while (seen_at[v] < 0) {
        seen_at[v] = static_cast<std::ptrdiff_t>(path.size());
        path.push_back(v);
        for (EdgeId e : q.incoming(v)) {
            const Edge& ed = q.edge(e);
            if (ed.kind == EdgeKind::internal && pending[*ed.source] > 0) {
                via.push_back(e);
                v = *ed.source;
                break;
            }
        }
    }
    std::vector<EdgeId> cycle(via.begin() + seen_at[v], via.end());
    std::reverse(cycle.begin(), cycle.end());
    std::ostringstream os;
    os << "directed cycle through edges";
    for (EdgeId e : cycle) os << ' ' << e;
    throw CycleError(os.str());
}

std::vector<VertexId> topological_order(const Layering& layering) {
    std::vector<VertexId> order;
    for (const auto& layer : layering.layers) order.insert(order.end(), layer.begin(), layer.end());
    return order;
}

namespace {

// Collects vertices and edges top-down, then renumbers edges so that Out
// edges take ids 0..n-1 in row order, internal edges follow in creation
// order, and In edges come last.
class QuiverBuilder {
public:
    VertexId add_vertex() { return num_vertices_++; }

    std::size_t add_in_edge(VertexId target) {
        edges_.push_back({EdgeKind::in, std::nullopt, target});
        return edges_.size() - 1;
    }

    std::size_t add_dangling(VertexId source) {
        edges_.push_back({EdgeKind::internal, source, std::nullopt});
        return edges_.size() - 1;
    }

    void attach(std::size_t edge, VertexId target) { edges_[edge].target = target; }

    Quiver finish(const std::vector<std::size_t>& out_row) {
        std::vector<std::size_t> new_id(edges_.size());
        std::size_t next = 0;
        for (std::size_t e : out_row) {
            edges_[e].kind = EdgeKind::out;
            new_id[e] = next++;
        }
        for (std::size_t e = 0; e < edges_.size(); ++e)
            if (edges_[e].kind == EdgeKind::internal) new_id[e] = next++;
        for (std::size_t e = 0; e < edges_.size(); ++e)
            if (edges_[e].kind == EdgeKind::in) new_id[e] = next++;

        std::vector<Edge> renumbered(edges_.size());
        for (std::size_t e = 0; e < edges_.size(); ++e) renumbered[new_id[e]] = edges_[e];
        return Quiver(num_vertices_, std::move(renumbered));
    }

private:
    std::size_t num_vertices_ = 0;
    std::vector<Edge> edges_;
};

void require_power_of_two(std::size_t n, std::size_t min, const char* who) {
    if (n < min || !std::has_single_bit(n))
        throw ArgumentError(std::string(who) + ": n must be a power of two >= " + std::to_string(min) +
                            ", got " + std::to_string(n));
}

// Replace every row edge by a new (2,1) vertex with two dangling outputs.
std::vector<std::size_t> split_row(QuiverBuilder& b, const std::vector<std::size_t>& row) {
    std::vector<std::size_t> next;
    for (std::size_t e : row) {
        const VertexId v = b.add_vertex();
        b.attach(e, v);
        next.push_back(b.add_dangling(v));
        next.push_back(b.add_dangling(v));
    }
    return next;
}

}  // namespace

Quiver build_chain(std::size_t n) {
    if (n == 0) throw ArgumentError("build_chain: n must be positive");
    QuiverBuilder b;
    std::vector<std::size_t> observables;
    VertexId v = b.add_vertex();
    std::size_t bond = b.add_in_edge(v);
    for (std::size_t k = 0; k < n; ++k) {
        if (k > 0) {
            v = b.add_vertex();
            b.attach(bond, v);
        }
        observables.push_back(b.add_dangling(v));
        if (k + 1 < n) bond = b.add_dangling(v);
    }
    return b.finish(observables);
}

Quiver build_binary_tree(std::size_t n) {
    require_power_of_two(n, 1, "build_binary_tree");
    QuiverBuilder b;
    const VertexId root = b.add_vertex();
    b.add_in_edge(root);
    if (n == 1) return b.finish({b.add_dangling(root)});
    std::vector<std::size_t> row{b.add_dangling(root), b.add_dangling(root)};
    while (row.size() < n) row = split_row(b, row);
    return b.finish(row);
}

Quiver build_mera(std::size_t n) {
    require_power_of_two(n, 2, "build_mera");
    QuiverBuilder b;
    const VertexId root = b.add_vertex();
    b.add_in_edge(root);
    std::vector<std::size_t> row{b.add_dangling(root), b.add_dangling(root)};
    while (row.size() < n) {
        row = split_row(b, row);
        // Blocks are sibling pairs (2b, 2b+1); blocks 2p and 2p+1 share a
        // grandparent and get a disentangler across their common boundary.
        for (std::size_t left = 1; left + 1 < row.size(); left += 4) {
            const VertexId d = b.add_vertex();
            b.attach(row[left], d);
            b.attach(row[left + 1], d);
            row[left] = b.add_dangling(d);
            row[left + 1] = b.add_dangling(d);
        }
    }
    return b.finish(row);
}

}  // namespace tnlm
