#pragma once

#include <cstddef>
#include <vector>

#include "tnlm/network.hpp"

namespace tnlm {

class CounterRng;

/// One array per vertex, shaped like the vertex tensor.
using VertexArrays = std::vector<DenseTensor>;

/// Tangent vector to the product of Stiefel manifolds at a network: each
/// component xi satisfies U^dagger xi + xi^dagger U = 0 for the vertex matrix U.
struct TangentVector {
    VertexArrays components;
};

/// xi = G - U herm(U^dagger G) per vertex, herm(A) = (A + A^dagger) / 2.
TangentVector tangent_project(const TensorNetwork& net, const VertexArrays& raw);

/// max over vertices of |U^dagger xi + xi^dagger U|.
double tangency_violation(const TensorNetwork& net, const TangentVector& xi);

/// Polar retraction of U + step * xi at every vertex.
TensorNetwork retract(const TensorNetwork& net, const TangentVector& xi, double step);

/// Real dimension of the product of Stiefel manifolds: sum of 2 v w - v^2.
std::size_t real_parameter_dimension(const TensorNetwork& net);

/// Complex dimension of the moduli space of a tree network with a single
/// In edge: sum over vertices of v_in * prod(v_out) - v_in^2.
/// Throws UnsupportedTopology on any other quiver.
std::size_t moduli_dimension(const TensorNetwork& net);

/// Numerical rank of the differential of the gauge action (unitaries on
/// internal and In edges) at the current point. Singular values above
/// rel_tol times the largest count.
std::size_t gauge_orbit_rank(const TensorNetwork& net, double rel_tol = 1e-8);

/// Real dimension of the gauge group: sum of v_e^2 over internal and In edges.
std::size_t gauge_group_dimension(const TensorNetwork& net);

/// Acts with one unitary per edge; entries for Out edges are ignored (Out
/// edges carry the identity). u_i -> (prod_{out} g_e) u_i (prod_{in} g_e^{-1}).
TensorNetwork gauge_transform(const TensorNetwork& net, const std::vector<ComplexMatrix>& unitaries);

/// Haar-random unitary of size n.
ComplexMatrix random_unitary(std::size_t n, CounterRng& rng);

/// Gauge transform by independent Haar-random unitaries.
TensorNetwork random_gauge_transform(const TensorNetwork& net, CounterRng& rng);

}  // namespace tnlm
