#include "tnlm/manifold.hpp"

#include <algorithm>

#include <Eigen/SVD>

#include "tnlm/errors.hpp"
#include "tnlm/rng.hpp"

namespace tnlm {
namespace {

void check_arrays(const TensorNetwork& net, const VertexArrays& arrays) {
    if (arrays.size() != net.num_vertices())
        throw ArgumentError("expected one array per vertex (" + std::to_string(net.num_vertices()) + "), got " +
                            std::to_string(arrays.size()));
    for (VertexId v = 0; v < arrays.size(); ++v) {
        if (arrays[v].shape() != net.tensor(v).shape())
            throw ArgumentError("array for vertex " + std::to_string(v) + " does not match the tensor shape");
    }
}

// Edges the gauge group acts on.
bool gauged(const Quiver& q, EdgeId e) { return q.edge(e).kind != EdgeKind::out; }

}  // namespace

TangentVector tangent_project(const TensorNetwork& net, const VertexArrays& raw) {
    check_arrays(net, raw);
    TangentVector xi;
    for (VertexId v = 0; v < raw.size(); ++v) {
        const IndexSplit split = net.split(v);
        const ComplexMatrix u = as_matrix(net.tensor(v), split);
        const ComplexMatrix g = as_matrix(raw[v], split);
        const ComplexMatrix ug = u.adjoint() * g;
        const ComplexMatrix herm = 0.5 * (ug + ug.adjoint());
        xi.components.push_back(from_matrix(g - u * herm, raw[v].shape(), split));
    }
    return xi;
}

double tangency_violation(const TensorNetwork& net, const TangentVector& xi) {
    check_arrays(net, xi.components);
    double worst = 0.0;
    for (VertexId v = 0; v < net.num_vertices(); ++v) {
        const IndexSplit split = net.split(v);
        const ComplexMatrix u = as_matrix(net.tensor(v), split);
        const ComplexMatrix x = as_matrix(xi.components[v], split);
        const ComplexMatrix s = u.adjoint() * x + x.adjoint() * u;
        if (s.size() > 0) worst = std::max(worst, s.cwiseAbs().maxCoeff());
    }
    return worst;
}

TensorNetwork retract(const TensorNetwork& net, const TangentVector& xi, double step) {
    check_arrays(net, xi.components);
    std::vector<DenseTensor> next;
    next.reserve(net.num_vertices());
    for (VertexId v = 0; v < net.num_vertices(); ++v) {
        if (step == 0.0) {
            next.push_back(net.tensor(v));
            continue;
        }
        DenseTensor moved = net.tensor(v) + step * xi.components[v];
        next.push_back(project_to_isometry(moved, net.split(v)));
    }
    return net.with_tensors(std::move(next));
}

std::size_t real_parameter_dimension(const TensorNetwork& net) {
    std::size_t total = 0;
    for (VertexId v = 0; v < net.num_vertices(); ++v) {
        const std::size_t in = net.in_dim(v), out = net.out_dim(v);
        total += 2 * in * out - in * in;
    }
    return total;
}

std::size_t moduli_dimension(const TensorNetwork& net) {
    if (!net.quiver().is_tree())
        throw UnsupportedTopology("moduli dimension formula holds for trees with a single In edge only");
    std::size_t total = 0;
    for (VertexId v = 0; v < net.num_vertices(); ++v) {
        const std::size_t in = net.in_dim(v), out = net.out_dim(v);
        total += in * out - in * in;
    }
    return total;
}

std::size_t gauge_group_dimension(const TensorNetwork& net) {
    const Quiver& q = net.quiver();
    std::size_t total = 0;
    for (EdgeId e = 0; e < q.num_edges(); ++e)
        if (gauged(q, e)) total += net.edge_dim(e) * net.edge_dim(e);
    return total;
}

std::size_t gauge_orbit_rank(const TensorNetwork& net, double rel_tol) {
    const Quiver& q = net.quiver();
    std::vector<std::size_t> offset(net.num_vertices() + 1, 0);
    for (VertexId v = 0; v < net.num_vertices(); ++v) offset[v + 1] = offset[v] + net.tensor(v).size();
    const auto rows = static_cast<Eigen::Index>(2 * offset.back());
    const auto cols = static_cast<Eigen::Index>(gauge_group_dimension(net));
    if (cols == 0) return 0;
    Eigen::MatrixXd jacobian = Eigen::MatrixXd::Zero(rows, cols);

    Eigen::Index col = 0;
    for (EdgeId e = 0; e < q.num_edges(); ++e) {
        if (!gauged(q, e)) continue;
        const auto d = static_cast<Eigen::Index>(net.edge_dim(e));
        // Real basis of the anti-Hermitian d x d matrices.
        std::vector<ComplexMatrix> generators;
        for (Eigen::Index a = 0; a < d; ++a) {
            for (Eigen::Index b = a; b < d; ++b) {
                ComplexMatrix x = ComplexMatrix::Zero(d, d);
                if (a == b) {
                    x(a, a) = Complex(0.0, 1.0);
                    generators.push_back(x);
                    continue;
                }
                x(a, b) = 1.0;
                x(b, a) = -1.0;
                generators.push_back(x);
                x(a, b) = Complex(0.0, 1.0);
                x(b, a) = Complex(0.0, 1.0);
                generators.push_back(x);
            }
        }
        for (const ComplexMatrix& x : generators) {
            // The edge's source vertex sees g on an outgoing axis, its target
            // sees g^{-1} on an incoming axis.
            auto record = [&](VertexId v, const DenseTensor& delta) {
                for (std::size_t k = 0; k < delta.size(); ++k) {
                    jacobian(static_cast<Eigen::Index>(2 * (offset[v] + k)), col) += delta[k].real();
                    jacobian(static_cast<Eigen::Index>(2 * (offset[v] + k) + 1), col) += delta[k].imag();
                }
            };
            const Edge& ed = q.edge(e);
            if (ed.source) {
                const VertexId v = *ed.source;
                const auto axes = net.axis_edges(v);
                const auto axis = static_cast<std::size_t>(std::find(axes.begin(), axes.end(), e) - axes.begin());
                record(v, apply_to_axis(net.tensor(v), axis, x));
            }
            if (ed.target) {
                const VertexId v = *ed.target;
                const auto axes = net.axis_edges(v);
                const auto axis = static_cast<std::size_t>(std::find(axes.begin(), axes.end(), e) - axes.begin());
                const ComplexMatrix minus_xt = -x.transpose();
                record(v, apply_to_axis(net.tensor(v), axis, minus_xt));
            }
            ++col;
        }
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(jacobian);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return 0;
    std::size_t rank = 0;
    for (Eigen::Index k = 0; k < sv.size(); ++k)
        if (sv(k) > rel_tol * sv(0)) ++rank;
    return rank;
}

TensorNetwork gauge_transform(const TensorNetwork& net, const std::vector<ComplexMatrix>& unitaries) {
    const Quiver& q = net.quiver();
    if (unitaries.size() != q.num_edges()) throw ArgumentError("gauge_transform: one matrix per edge expected");
    std::vector<DenseTensor> next;
    for (VertexId v = 0; v < net.num_vertices(); ++v) {
        DenseTensor t = net.tensor(v);
        const auto axes = net.axis_edges(v);
        const std::size_t num_out = q.outgoing(v).size();
        for (std::size_t axis = 0; axis < axes.size(); ++axis) {
            const EdgeId e = axes[axis];
            if (!gauged(q, e)) continue;
            const ComplexMatrix& g = unitaries[e];
            if (static_cast<std::size_t>(g.rows()) != net.edge_dim(e) || g.rows() != g.cols())
                throw ShapeError("gauge_transform: matrix for edge " + std::to_string(e) + " has wrong size");
            // Incoming axis: u g^{-1} = u g^dagger, i.e. (g^dagger)^T = conj(g) on the axis.
            t = axis < num_out ? apply_to_axis(t, axis, g) : apply_to_axis(t, axis, g.conjugate());
        }
        next.push_back(std::move(t));
    }
    return net.with_tensors(std::move(next));
}

ComplexMatrix random_unitary(std::size_t n, CounterRng& rng) {
    const DenseTensor u = random_isometry(n, n, rng);
    return as_matrix(u, IndexSplit::out_then_in(1, 1));
}

TensorNetwork random_gauge_transform(const TensorNetwork& net, CounterRng& rng) {
    const Quiver& q = net.quiver();
    std::vector<ComplexMatrix> unitaries(q.num_edges());
    for (EdgeId e = 0; e < q.num_edges(); ++e) {
        if (gauged(q, e)) unitaries[e] = random_unitary(net.edge_dim(e), rng);
    }
    return gauge_transform(net, unitaries);
}

}  // namespace tnlm
