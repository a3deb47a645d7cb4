#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "tnlm/errors.hpp"
#include "tnlm/rng.hpp"
#include "tnlm/tensor.hpp"

using namespace tnlm;

TEST(DenseTensor, ShapeAndScalar) {
    DenseTensor s;
    EXPECT_EQ(s.rank(), 0u);
    EXPECT_EQ(s.size(), 1u);
    EXPECT_EQ(DenseTensor::scalar(2.5).value(), Complex(2.5));
    EXPECT_THROW(DenseTensor({2, 2}, std::vector<Complex>(3)), ShapeError);
    EXPECT_THROW(DenseTensor({1}, {Complex(std::nan(""), 0)}), ArgumentError);
    DenseTensor t({2, 3, 4});
    EXPECT_EQ(t.flat_index(std::vector<std::size_t>{1, 2, 3}), 23u);
}

TEST(Contract, IdentityOnVector) {
    const DenseTensor v({2}, {3.0, 4.0});
    const DenseTensor r = contract(DenseTensor::identity(2), v, {{1, 0}});
    ASSERT_EQ(r.shape(), Shape({2}));
    EXPECT_EQ(r[0], Complex(3.0));
    EXPECT_EQ(r[1], Complex(4.0));
}

TEST(Contract, ScalarOuter) {
    EXPECT_EQ(contract(DenseTensor::scalar(2.0), DenseTensor::scalar(3.0), {}).value(), Complex(6.0));
}

TEST(Contract, MatchesTripleLoop) {
    CounterRng rng(11);
    const DenseTensor a = oracle::random_tensor({2, 3, 2}, rng);
    const DenseTensor b = oracle::random_tensor({3, 2}, rng);
    const DenseTensor r = contract(a, b, {{1, 0}, {2, 1}});
    ASSERT_EQ(r.shape(), Shape({2}));
    for (std::size_t i = 0; i < 2; ++i) {
        Complex sum = 0.0;
        for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t k = 0; k < 2; ++k) sum += a.at({i, j, k}) * b.at({j, k});
        EXPECT_LT(std::abs(r[i] - sum), 1e-12);
    }
}

TEST(Contract, KeepsUncontractedAxesInOrder) {
    CounterRng rng(12);
    const DenseTensor a = oracle::random_tensor({2, 3, 4}, rng);
    const DenseTensor b = oracle::random_tensor({5, 3}, rng);
    const DenseTensor r = contract(a, b, {{1, 1}});
    ASSERT_EQ(r.shape(), Shape({2, 4, 5}));
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t k = 0; k < 4; ++k)
            for (std::size_t m = 0; m < 5; ++m) {
                Complex sum = 0.0;
                for (std::size_t j = 0; j < 3; ++j) sum += a.at({i, j, k}) * b.at({m, j});
                EXPECT_LT(std::abs(r.at({i, k, m}) - sum), 1e-12);
            }
}

TEST(Contract, Errors) {
    const DenseTensor a({2, 3}), b({2, 3});
    EXPECT_THROW(contract(a, b, {{1, 0}}), ShapeError);
    EXPECT_THROW(contract(a, b, {{0, 0}, {0, 1}}), ArgumentError);
    EXPECT_THROW(contract(a, b, {{2, 0}}), ArgumentError);
}

TEST(Contract, Bilinear) {
    CounterRng rng(13);
    const DenseTensor a = oracle::random_tensor({3, 4}, rng), a2 = oracle::random_tensor({3, 4}, rng);
    const DenseTensor b = oracle::random_tensor({4, 2}, rng);
    const Complex al(0.3, -1.2), be(2.0, 0.5);
    const DenseTensor lhs = contract(al * a + be * a2, b, {{1, 0}});
    const DenseTensor rhs = al * contract(a, b, {{1, 0}}) + be * contract(a2, b, {{1, 0}});
    EXPECT_LT(max_abs_diff(lhs, rhs), 1e-12);
}

TEST(Contract, AssociativeOnChains) {
    CounterRng rng(14);
    const DenseTensor a = oracle::random_tensor({2, 3}, rng), b = oracle::random_tensor({3, 4}, rng),
                      c = oracle::random_tensor({4, 5}, rng);
    const DenseTensor left = contract(contract(a, b, {{1, 0}}), c, {{1, 0}});
    const DenseTensor right = contract(a, contract(b, c, {{1, 0}}), {{1, 0}});
    EXPECT_LT(max_abs_diff(left, right), 1e-10);
}

TEST(Reshape, GroupExamples) {
    CounterRng rng(15);
    const DenseTensor t = oracle::random_tensor({2, 3, 4}, rng);
    const DenseTensor g = reshape_group(t, {{0}, {1, 2}});
    EXPECT_EQ(g.shape(), Shape({2, 12}));
    EXPECT_TRUE(std::equal(g.data().begin(), g.data().end(), t.data().begin()));
    const DenseTensor v = oracle::random_tensor({5}, rng);
    EXPECT_EQ(reshape_group(v, {{0}}), v);
    EXPECT_THROW(reshape_group(t, {{0}, {1}}), ArgumentError);
    EXPECT_THROW(reshape_group(t, {{0, 1}, {1, 2}}), ArgumentError);
}

TEST(Reshape, RoundTripIsExact) {
    CounterRng rng(16);
    const DenseTensor t = oracle::random_tensor({2, 3, 4}, rng);
    const DenseTensor g = reshape_group(t, {{2, 0}, {1}});
    EXPECT_EQ(g.shape(), Shape({8, 3}));
    // Undo: split back to (4, 2, 3) and permute to (2, 3, 4).
    const DenseTensor back = permute(reshape(g, {4, 2, 3}), std::vector<std::size_t>{1, 2, 0});
    EXPECT_EQ(back, t);
}

TEST(Permute, MovesEntries) {
    CounterRng rng(17);
    const DenseTensor t = oracle::random_tensor({2, 3, 4}, rng);
    const DenseTensor p = permute(t, std::vector<std::size_t>{2, 0, 1});
    ASSERT_EQ(p.shape(), Shape({4, 2, 3}));
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(p.at({k, i, j}), t.at({i, j, k}));
}

TEST(Isometry, Examples) {
    EXPECT_TRUE(is_isometry(DenseTensor::identity(3), IndexSplit{{1}, {0}}, 1e-10));
    const double r = 1.0 / std::sqrt(2.0);
    const DenseTensor v({2, 1}, {Complex(r, 0), Complex(0, r)});
    EXPECT_TRUE(is_isometry(v, IndexSplit{{1}, {0}}, 1e-10));
    // Also as a rank-1 tensor with no input axes.
    EXPECT_TRUE(is_isometry(DenseTensor({2}, {Complex(r, 0), Complex(0, r)}), IndexSplit{{}, {0}}, 1e-10));
    EXPECT_THROW(is_isometry(DenseTensor({2, 3}), IndexSplit{{1}, {0}}), NoIsometryPossible);
    EXPECT_THROW(is_isometry(DenseTensor({2, 3}), IndexSplit{{1}, {1}}), ArgumentError);
}

TEST(Isometry, GaussianThenProjected) {
    CounterRng rng(18);
    const DenseTensor g = oracle::random_tensor({4, 2}, rng);
    const IndexSplit split{{1}, {0}};
    EXPECT_FALSE(is_isometry(g, split, 1e-6));
    const DenseTensor p = project_to_isometry(g, split);
    EXPECT_TRUE(is_isometry(p, split, 1e-10));
    EXPECT_LT(max_abs_diff(project_to_isometry(p, split), p), 1e-10);
}

TEST(Isometry, MultiAxisSplit) {
    CounterRng rng(19);
    // Axes (out a, in b, out c): the map C^3 -> C^2 (x) C^2.
    const DenseTensor g = oracle::random_tensor({2, 3, 2}, rng);
    const IndexSplit split{{1}, {0, 2}};
    const DenseTensor p = project_to_isometry(g, split);
    EXPECT_TRUE(is_isometry(p, split, 1e-10));
    const ComplexMatrix m = as_matrix(p, split);
    EXPECT_EQ(m.rows(), 4);
    EXPECT_EQ(m.cols(), 3);
    EXPECT_EQ(from_matrix(m, p.shape(), split), p);
}

TEST(RandomIsometry, Examples) {
    CounterRng rng(7);
    const DenseTensor u1 = random_isometry(1, 1, rng);
    EXPECT_NEAR(std::abs(u1.value()), 1.0, 1e-12);
    CounterRng seven(7);
    const DenseTensor u = random_isometry(2, 4, seven);
    ASSERT_EQ(u.shape(), Shape({4, 2}));
    EXPECT_TRUE(is_isometry(u, IndexSplit{{1}, {0}}, 1e-12));
    CounterRng eight(8);
    EXPECT_GT(max_abs_diff(u, random_isometry(2, 4, eight)), 1e-3);
    CounterRng again(7);
    EXPECT_EQ(u, random_isometry(2, 4, again));
    EXPECT_THROW(random_isometry(3, 2, rng), ArgumentError);
}

TEST(RandomIsometry, UnitColumns) {
    CounterRng rng(20);
    const DenseTensor u = random_isometry(3, 7, rng);
    for (std::size_t c = 0; c < 3; ++c) {
        double n = 0;
        for (std::size_t r = 0; r < 7; ++r) n += std::norm(u.at({r, c}));
        EXPECT_NEAR(n, 1.0, 1e-12);
    }
}

TEST(RandomIsometry, FirstColumnHasHaarMoments) {
    // For Haar columns in C^d, E|u_0|^2 = 1/d and E|u_0|^4 = 2/(d(d+1)).
    CounterRng rng(21);
    const int trials = 20000;
    double m2 = 0, m4 = 0;
    for (int t = 0; t < trials; ++t) {
        const double a = std::norm(random_isometry(1, 3, rng)[0]);
        m2 += a;
        m4 += a * a;
    }
    EXPECT_NEAR(m2 / trials, 1.0 / 3.0, 0.01);
    EXPECT_NEAR(m4 / trials, 2.0 / 12.0, 0.01);
}

TEST(Polar, FixedPointAndScaling) {
    CounterRng rng(22);
    const DenseTensor u = random_isometry(2, 5, rng);
    const IndexSplit split{{1}, {0}};
    EXPECT_LT(max_abs_diff(project_to_isometry(u, split), u), 1e-12);
    const DenseTensor two_i = 2.0 * DenseTensor::identity(3);
    EXPECT_LT(max_abs_diff(project_to_isometry(two_i, split), DenseTensor::identity(3)), 1e-12);
}

TEST(Polar, RankDeficientThrows) {
    const DenseTensor m({3, 2}, {1.0, 2.0, 2.0, 4.0, 3.0, 6.0});
    try {
        project_to_isometry(m, IndexSplit{{1}, {0}});
        FAIL() << "expected SingularityError";
    } catch (const SingularityError& e) {
        EXPECT_LT(e.smallest_singular_value(), 1e-10);
    }
}

TEST(Polar, LocallyNearest) {
    // Moving the polar factor along any geodesic-like curve of isometries
    // U exp(tA) (A anti-Hermitian) or polar(U + tB) must not get closer to M.
    CounterRng rng(23);
    const IndexSplit split{{1}, {0}};
    const DenseTensor m = oracle::random_tensor({4, 2}, rng);
    const DenseTensor p = project_to_isometry(m, split);
    const double d0 = (p - m).norm();
    for (int dir = 0; dir < 20; ++dir) {
        const DenseTensor b = oracle::random_tensor({4, 2}, rng);
        for (double t : {1e-3, -1e-3, 1e-2, -1e-2, 1e-1}) {
            const DenseTensor q = project_to_isometry(p + t * b, split);
            EXPECT_GE((q - m).norm(), d0 - 1e-12);
        }
    }
}

TEST(Helpers, ApplyToAxisAndKron) {
    CounterRng rng(24);
    const DenseTensor t = oracle::random_tensor({2, 3, 2}, rng);
    ComplexMatrix m = ComplexMatrix::Zero(4, 3);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 3; ++c) m(r, c) = rng.complex_normal();
    const DenseTensor r = apply_to_axis(t, 1, m);
    ASSERT_EQ(r.shape(), Shape({2, 4, 2}));
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t a = 0; a < 4; ++a)
            for (std::size_t k = 0; k < 2; ++k) {
                Complex s = 0;
                for (std::size_t j = 0; j < 3; ++j) s += m(a, j) * t.at({i, j, k});
                EXPECT_LT(std::abs(r.at({i, a, k}) - s), 1e-12);
            }
    ComplexMatrix x(2, 2), y(2, 1);
    x << 1.0, 2.0, 3.0, 4.0;
    y << 5.0, 6.0;
    const ComplexMatrix k = kron(x, y);
    ASSERT_EQ(k.rows(), 4);
    EXPECT_EQ(k(3, 1), Complex(24.0));
    EXPECT_EQ(k(1, 0), Complex(6.0));
}

TEST(Rng, DeterministicAndStreamsDiffer) {
    CounterRng a(5, 1), b(5, 1), c(5, 2);
    for (int k = 0; k < 10; ++k) {
        const auto x = a.next_u64();
        EXPECT_EQ(x, b.next_u64());
        EXPECT_NE(x, c.next_u64());
    }
    CounterRng d(5, 1);
    d.set_counter(3);
    CounterRng e(5, 1);
    e.next_u64();
    e.next_u64();
    e.next_u64();
    EXPECT_EQ(d.next_u64(), e.next_u64());
}

TEST(Rng, UniformAndNormalMoments) {
    CounterRng rng(99);
    const int n = 200000;
    double su = 0, sn = 0, sn2 = 0;
    std::vector<int> hits(5, 0);
    for (int k = 0; k < n; ++k) {
        const double u = rng.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        su += u;
        const double z = rng.normal();
        sn += z;
        sn2 += z * z;
        ++hits[rng.uniform_index(5)];
    }
    EXPECT_NEAR(su / n, 0.5, 0.005);
    EXPECT_NEAR(sn / n, 0.0, 0.01);
    EXPECT_NEAR(sn2 / n, 1.0, 0.02);
    for (int h : hits) EXPECT_NEAR(h / double(n), 0.2, 0.005);
}
