#include "barrier_mbrl/barrier.hpp"

#include <gtest/gtest.h>

#include "frozen_values.hpp"
#include "test_support.hpp"

using namespace barrier_mbrl;
using testing_support::Gen;

TEST(Barrier, MatchesReferenceValues) {
    for (std::size_t k = 0; k < std::size(frozen::kBfCases); k += 4) {
        const double* c = frozen::kBfCases + k;
        EXPECT_NEAR(barrier::bf(c[0], c[1], c[2]), c[3], 1e-14 * std::max(1.0, std::abs(c[3])));
    }
    for (std::size_t k = 0; k < std::size(frozen::kBfInvCases); k += 5) {
        const double* c = frozen::kBfInvCases + k;
        EXPECT_NEAR(barrier::bf_inv(c[0], c[1], c[2]), c[3], 1e-14 * std::max(1.0, std::abs(c[3])));
        EXPECT_NEAR(barrier::t_factor(c[0], c[1], c[2]), c[4], 1e-12 * c[4]);
    }
}

TEST(Barrier, UnitSymmetricCase) {
    EXPECT_NEAR(barrier::bf(0.05, -0.1, 0.1), std::log(3.0), 1e-15);
    EXPECT_EQ(barrier::bf(0.0, -0.1, 0.1), 0.0);
    EXPECT_EQ(barrier::bf_inv(0.0, -0.1, 0.1), 0.0);
    EXPECT_NEAR(barrier::t_factor(0.0, -0.1, 0.1), 20.0, 1e-13);
}

TEST(Barrier, RejectsPointsOnOrOutsideTheLimits) {
    EXPECT_THROW((void)barrier::bf(0.1, -0.1, 0.1), DomainError);
    EXPECT_THROW((void)barrier::bf(-0.1, -0.1, 0.1), DomainError);
    EXPECT_THROW((void)barrier::bf(0.2, -0.1, 0.1), DomainError);
    EXPECT_THROW((void)barrier::bf(0.1 - 1e-12, -0.1, 0.1), DomainError);  // inside the 1e-9 width margin
    EXPECT_NO_THROW((void)barrier::bf(0.1 - 1e-9, -0.1, 0.1));
    EXPECT_THROW((void)barrier::bf(NAN, -0.1, 0.1), DomainError);
}

TEST(Barrier, RejectsIntervalsNotStraddlingZero) {
    EXPECT_THROW((void)barrier::bf(0.0, 0.0, 1.0), DomainError);
    EXPECT_THROW((void)barrier::bf(0.5, 0.1, 1.0), DomainError);
    EXPECT_THROW((void)barrier::bf_inv(0.0, -1.0, -0.5), DomainError);
    EXPECT_THROW((void)barrier::t_factor(0.0, -1.0, INFINITY), DomainError);
}

TEST(Barrier, OverflowGuardOnTransformedSide) {
    EXPECT_NO_THROW((void)barrier::bf_inv(50.0, -0.1, 0.1));
    EXPECT_THROW((void)barrier::bf_inv(50.5, -0.1, 0.1), DomainError);
    EXPECT_THROW((void)barrier::t_factor(-51.0, -0.1, 0.1), DomainError);
    EXPECT_THROW((void)barrier::bf_inv(NAN, -0.1, 0.1), DomainError);
}

TEST(Barrier, VectorFormsReportTheFailingComponent) {
    const auto limits = BarrierLimits::symmetric(3, 0.1);
    Vector x(3);
    x << 0.0, 0.05, 0.3;
    try {
        (void)barrier::bf_vec(x, limits);
        FAIL() << "expected DomainError";
    } catch (const DomainError& e) {
        ASSERT_TRUE(e.index().has_value());
        EXPECT_EQ(*e.index(), 2u);
    }
    EXPECT_THROW((void)barrier::bf_vec(Vector::Zero(2), limits), DimensionError);
}

TEST(BarrierLimits, ValidatesInvariants) {
    EXPECT_THROW(BarrierLimits(Vector::Constant(2, -1.0), Vector::Constant(3, 1.0)), DimensionError);
    EXPECT_THROW(BarrierLimits(Vector(), Vector()), DimensionError);
    EXPECT_THROW(BarrierLimits(Vector::Constant(2, 0.0), Vector::Constant(2, 1.0)), InvalidArgument);
    EXPECT_THROW(BarrierLimits(Vector::Constant(2, -1.0), Vector::Constant(2, NAN)), InvalidArgument);
    const auto limits = BarrierLimits::symmetric(2, 0.1);
    EXPECT_NEAR(limits.margin(Vector::Zero(2)), 0.1, 1e-16);
    EXPECT_LT(limits.margin(Vector::Constant(2, 0.2)), 0.0);
}

// Property tests over random intervals.

TEST(BarrierProperty, RoundTripBothDirections) {
    Gen gen(11);
    for (int trial = 0; trial < 300; ++trial) {
        const auto [lo, hi] = gen.interval();
        const double width = hi - lo;
        const double y = lo + width * gen.uniform(1e-6, 1.0 - 1e-6);
        EXPECT_LE(std::abs(barrier::bf_inv(barrier::bf(y, lo, hi), lo, hi) - y), 1e-12 * width)
            << "lo=" << lo << " hi=" << hi << " y=" << y;
        // Keep bf_inv(s) at least 1e-6 of the width away from the limits, where bf accepts it.
        const double s = gen.uniform(-12.0, 12.0);
        EXPECT_LE(std::abs(barrier::bf(barrier::bf_inv(s, lo, hi), lo, hi) - s), 1e-8 * std::max(1.0, std::abs(s)));
    }
}

TEST(BarrierProperty, StrictlyIncreasingAndZeroPreserving) {
    Gen gen(12);
    for (int trial = 0; trial < 100; ++trial) {
        const auto [lo, hi] = gen.interval();
        EXPECT_EQ(barrier::bf(0.0, lo, hi), 0.0);
        EXPECT_EQ(barrier::bf_inv(0.0, lo, hi), 0.0);
        double prev = -INFINITY;
        for (int k = 1; k < 200; ++k) {
            const double v = barrier::bf(lo + (hi - lo) * k / 200.0, lo, hi);
            EXPECT_GT(v, prev);
            prev = v;
        }
    }
}

TEST(BarrierProperty, ReciprocalFactorIsTheDerivative) {
    Gen gen(13);
    for (int trial = 0; trial < 300; ++trial) {
        const auto [lo, hi] = gen.interval();
        const double s = gen.uniform(-10.0, 10.0);
        const double h = 1e-6;
        const double fd = (barrier::bf_inv(s + h, lo, hi) - barrier::bf_inv(s - h, lo, hi)) / (2.0 * h);
        const double t = barrier::t_factor(s, lo, hi);
        EXPECT_GT(t, 0.0);
        EXPECT_LE(std::abs(1.0 / t - fd), 1e-6 * std::max(1.0, std::abs(fd)));
    }
}

TEST(BarrierProperty, ImageStaysInsideTheInterval) {
    Gen gen(14);
    for (int trial = 0; trial < 300; ++trial) {
        const auto [lo, hi] = gen.interval();
        const double x = barrier::bf_inv(gen.uniform(-50.0, 50.0), lo, hi);
        EXPECT_GE(x, lo);
        EXPECT_LE(x, hi);
    }
}
