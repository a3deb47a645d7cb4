#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "tnlm/errors.hpp"
#include "tnlm/training.hpp"
#include "tnlm/rng.hpp"

using namespace tnlm;

namespace {

TensorNetwork random_net(const Quiver& q, std::size_t w, std::size_t cap, std::uint64_t seed) {
    CounterRng rng(seed, streams::init);
    return random_network(q, isometric_edge_dims(q, w, cap), rng);
}

Quiver single_vertex_quiver() { return Quiver(1, {{EdgeKind::out, 0, std::nullopt}, {EdgeKind::in, std::nullopt, 0}}); }

TensorNetwork column(std::vector<Complex> c) {
    const std::size_t w = c.size();
    return TensorNetwork(single_vertex_quiver(), {w, 1}, {DenseTensor({w, 1}, std::move(c))});
}

double real_inner(const VertexArrays& g, const VertexArrays& xi) {
    double s = 0;
    for (std::size_t v = 0; v < g.size(); ++v)
        for (std::size_t k = 0; k < g[v].size(); ++k) s += std::real(std::conj(g[v][k]) * xi[v][k]);
    return s;
}

double shifted_energy(const TensorNetwork& net, const VertexArrays& xi, double h, const Sequence& s) {
    std::vector<DenseTensor> t = net.tensors();
    for (std::size_t v = 0; v < t.size(); ++v) t[v] += h * xi[v];
    return sequence_free_energy(net.with_tensors(t, IsometryCheck::skip), s);
}

SampleMultiset four_sequence_target(std::size_t n) {
    SampleMultiset s(n);
    for (std::size_t k = 0; k < 4; ++k) {
        Sequence seq(n);
        for (std::size_t i = 0; i < n; ++i) seq[i] = k == 0 ? 0 : k == 1 ? i % 2 : k == 2 ? (i + 1) % 2 : 1;
        s.add(seq, 4 - k);
    }
    return s;
}

}  // namespace

TEST(Gradient, AnalyticOneParameterFamily) {
    const double theta = 0.3;
    const TensorNetwork net = column({std::cos(theta), std::sin(theta)});
    const VertexArrays g = gradient(net, {0});
    const VertexArrays dir{DenseTensor({2, 1}, {-std::sin(theta), std::cos(theta)})};
    EXPECT_NEAR(2 * real_inner(g, dir), 2 * std::tan(theta), 1e-6);
    const double h = 1e-5;
    const double fd = (shifted_energy(net, dir, h, {0}) - shifted_energy(net, dir, -h, {0})) / (2 * h);
    EXPECT_NEAR(fd, 2 * std::tan(theta), 1e-6);
}

TEST(Gradient, VanishesAtDeterministicOptimum) {
    const TensorNetwork net = column({0.0, Complex(0.6, 0.8), 0.0});
    const TangentVector xi = tangent_project(net, gradient(net, {1}));
    EXPECT_LT(xi.components[0].max_abs(), 1e-8);
}

TEST(Gradient, MatchesFiniteDifferences) {
    std::uint64_t seed = 1;
    for (const Quiver& q : {build_binary_tree(8), build_chain(6), build_mera(4)}) {
        const TensorNetwork net = random_net(q, 2, 4, seed++);
        CounterRng rng(seed + 50);
        const Sequence s = {1, 0, 0, 1, 1, 0, 1, 0};
        const Sequence seq(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(net.num_sites()));
        const VertexArrays g = gradient(net, seq);
        for (int d = 0; d < 20; ++d) {
            VertexArrays raw;
            for (const auto& t : net.tensors()) raw.push_back(oracle::random_tensor(t.shape(), rng));
            const VertexArrays xi = tangent_project(net, raw).components;
            const double h = 1e-5;
            const double fd = (shifted_energy(net, xi, h, seq) - shifted_energy(net, xi, -h, seq)) / (2 * h);
            const double an = 2 * real_inner(g, xi);
            EXPECT_LT(std::abs(fd - an), 1e-5 * std::max(1.0, std::abs(an)));
        }
    }
}

TEST(Gradient, ZeroAmplitudeThrows) {
    const TensorNetwork net = column({1.0, 0.0});
    try {
        gradient(net, {1});
        FAIL() << "expected SingularGradient";
    } catch (const SingularGradient& e) {
        EXPECT_NE(std::string(e.what()).find('1'), std::string::npos);
    }
}

TEST(Gradient, BatchMeanIsWeighted) {
    const TensorNetwork net = random_net(build_binary_tree(4), 2, 4, 3);
    const Sequence a{0, 1, 0, 1}, b{1, 1, 0, 0};
    const VertexArrays m = mean_gradient(net, {{a, 2}, {b, 1}});
    const VertexArrays ga = gradient(net, a), gb = gradient(net, b);
    for (std::size_t v = 0; v < m.size(); ++v)
        EXPECT_LT(max_abs_diff(m[v], (2.0 / 3.0) * ga[v] + (1.0 / 3.0) * gb[v]), 1e-14);
    EXPECT_THROW(mean_gradient(net, {}), ArgumentError);
}

TEST(SgdStep, ZeroStepAndDescent) {
    const TensorNetwork net = random_net(build_binary_tree(4), 2, 4, 4);
    const Sequence s{0, 0, 1, 1};
    const TensorNetwork same = sgd_step(net, {{s, 1}}, 0.0);
    for (VertexId v = 0; v < net.num_vertices(); ++v) EXPECT_LT(max_abs_diff(same.tensor(v), net.tensor(v)), 1e-12);

    CounterRng rng(5);
    const TensorNetwork one = random_network(single_vertex_quiver(), {3, 1}, rng);
    const TensorNetwork stepped = sgd_step(one, {{{0}, 1}}, 1e-2);
    EXPECT_LT(sequence_free_energy(stepped, {0}), sequence_free_energy(one, {0}));
    EXPECT_LT(stepped.max_isometry_violation(), 1e-10);

    const TensorNetwork moved = sgd_step(net, {{s, 2}, {{1, 0, 1, 0}, 1}}, 0.05);
    EXPECT_LT(moved.max_isometry_violation(), 1e-10);
}

TEST(SgdStep, FullBatchDescentOnSingleVertex) {
    CounterRng rng(6);
    TensorNetwork net = random_network(single_vertex_quiver(), {4, 1}, rng);
    SampleMultiset s(1);
    s.add({0}, 3);
    s.add({2}, 1);
    double prev = negative_log_likelihood(net, s).value;
    for (int k = 0; k < 200; ++k) {
        net = sgd_step(net, {{{0}, 3}, {{2}, 1}}, 0.05);
        const double f = negative_log_likelihood(net, s).value;
        EXPECT_LE(f, prev + 1e-12);
        prev = f;
    }
    // Optimum puts probability 3/4, 1/4 on the two symbols.
    EXPECT_NEAR(born_probability(net, {0}), 0.75, 1e-3);
}

TEST(Train, StepsZeroReturnsInput) {
    const TensorNetwork net = random_net(build_binary_tree(4), 2, 4, 7);
    TrainConfig cfg;
    cfg.steps = 0;
    const TrainResult r = train(net, four_sequence_target(4), cfg);
    EXPECT_TRUE(r.trace.records.empty());
    for (VertexId v = 0; v < net.num_vertices(); ++v) EXPECT_EQ(r.network.tensor(v), net.tensor(v));
}

TEST(Train, ShapeMismatchIsRejected) {
    const TensorNetwork net = random_net(build_binary_tree(4), 2, 4, 8);
    TrainConfig cfg;
    EXPECT_THROW(train(net, four_sequence_target(8), cfg), ArgumentError);
    SampleMultiset bad(4);
    bad.add({0, 0, 3, 0});
    EXPECT_THROW(train(net, bad, cfg), ArgumentError);
    cfg.learning_rate = 0;
    EXPECT_THROW(train(net, four_sequence_target(4), cfg), ArgumentError);
    cfg.learning_rate = 0.05;
    cfg.batch_size = 0;
    EXPECT_THROW(train(net, four_sequence_target(4), cfg), ArgumentError);
}

TEST(Train, DeterministicTraceAndCheckpoints) {
    const TensorNetwork net = random_net(build_binary_tree(4), 2, 4, 9);
    TrainConfig cfg;
    cfg.steps = 60;
    cfg.batch_size = 3;
    cfg.seed = 42;
    cfg.checkpoint_every = 20;
    std::vector<std::size_t> seen;
    const TrainResult a = train(net, four_sequence_target(4), cfg,
                                [&](std::size_t step, const TensorNetwork& n) {
                                    seen.push_back(step);
                                    EXPECT_LT(n.max_isometry_violation(), cfg.isometry_tol);
                                });
    const TrainResult b = train(net, four_sequence_target(4), cfg);
    EXPECT_EQ(seen, (std::vector<std::size_t>{20, 40, 60}));
    EXPECT_TRUE(a.trace.same_values(b.trace));
    std::ostringstream csv_a, csv_b;
    write_loss_trace_csv(a.trace, csv_a);
    write_loss_trace_csv(b.trace, csv_b);
    EXPECT_EQ(csv_a.str(), csv_b.str());
    EXPECT_EQ(csv_a.str().substr(0, csv_a.str().find('\n')), "step,loss,max_isometry_violation");
    for (std::size_t k = 0; k < a.trace.records.size(); ++k) EXPECT_EQ(a.trace.records[k].step, k + 1);
    cfg.seed = 43;
    EXPECT_FALSE(a.trace.same_values(train(net, four_sequence_target(4), cfg).trace));
}

TEST(Train, LearnsSmallTarget) {
    const TensorNetwork net = random_net(build_binary_tree(4), 2, 4, 10);
    const SampleMultiset s = four_sequence_target(4);
    TrainConfig cfg;
    cfg.steps = 500;
    cfg.batch_size = static_cast<std::size_t>(s.cardinality());
    const TrainResult r = train(net, s, cfg);
    const double kl = kl_divergence(empirical_distribution(s), model_distribution_on(r.network, s)).value;
    EXPECT_LT(kl, 0.01);
    EXPECT_LT(r.trace.records.back().loss, r.trace.records.front().loss);
}

TEST(Train, ObjectiveIsGaugeInvariant) {
    const SampleMultiset s = four_sequence_target(8);
    TensorNetwork net = random_net(build_binary_tree(8), 2, 4, 11);
    TrainConfig cfg;
    cfg.steps = 5;
    for (int round = 0; round < 2; ++round) {
        CounterRng rng(12 + round, streams::gauge);
        const TensorNetwork moved = random_gauge_transform(net, rng);
        EXPECT_NEAR(negative_log_likelihood(moved, s).value, negative_log_likelihood(net, s).value, 1e-10);
        net = train(net, s, cfg).network;
    }
}
