#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace igflow;
using namespace igflow::test;

namespace {

const PotentialModel q2 = make_quadratic(2);
const PotentialModel ex = make_exp1d();
const PotentialModel be = make_bernoulli();
const PotentialModel ga = make_gaussian2();

// Hand-derived conjugates and inverse gradient maps.
double psi_star(const PotentialModel& m, const Vec& e) {
    if (m.name() == "quadratic2") return 0.5 * e.squaredNorm();
    if (m.name() == "exp1d") return e(0) * std::log(e(0)) - e(0);
    if (m.name() == "bernoulli") return e(0) * std::log(e(0)) + (1 - e(0)) * std::log(1 - e(0));
    const double var = e(1) - e(0) * e(0);
    return -0.5 - 0.5 * std::log(var);
}

Vec gaussian_theta(const Vec& e) {
    const double var = e(1) - e(0) * e(0);
    return vec({e(0) / var, -0.5 / var});
}

} // namespace

TEST(ToDual, Examples) {
    const Point a = to_dual(q2, Point::theta(vec({3, -1})));
    EXPECT_EQ(a.chart, Chart::Eta);
    EXPECT_TRUE(a.coords.isApprox(vec({3, -1})));
    EXPECT_NEAR(to_dual(ex, Point::theta(vec({std::log(2.0)}))).coords(0), 2.0, 1e-15);
    const Vec t = vec({0, -0.5});
    const Vec e = to_dual(ga, Point::theta(t)).coords;
    EXPECT_NEAR(e(0), -t(0) / (2 * t(1)), 1e-15);
    EXPECT_NEAR(e(1), t(0) * t(0) / (4 * t(1) * t(1)) - 1 / (2 * t(1)), 1e-15);
}

TEST(ToDual, ChartMismatch) { EXPECT_THROW(to_dual(q2, Point::eta(vec({1, 1}))), ChartError); }

TEST(FromDual, Examples) {
    const Point a = from_dual(q2, Point::eta(vec({3, -1})));
    EXPECT_EQ(a.chart, Chart::Theta);
    EXPECT_LE((a.coords - vec({3, -1})).lpNorm<Eigen::Infinity>(), 1e-12);
    EXPECT_NEAR(from_dual(ex, Point::eta(vec({2}))).coords(0), std::log(2.0), 1e-12);
    EXPECT_NEAR(from_dual(be, Point::eta(vec({0.5}))).coords(0), 0.0, 1e-12);
}

TEST(FromDual, GaussianMatchesClosedFormInverse) {
    auto g = rng(21);
    for (int k = 0; k < 50; ++k) {
        const Vec e = vec({uniform(g, -3, 3), 0.0});
        const Vec eta = vec({e(0), e(0) * e(0) + uniform(g, 0.05, 4)});
        const Vec th = from_dual(ga, Point::eta(eta)).coords;
        EXPECT_LE(rel_error(th, gaussian_theta(eta)), 1e-9) << eta.transpose();
    }
}

TEST(FromDual, OutsideImageIsDomainError) {
    EXPECT_THROW(from_dual(be, Point::eta(vec({1.5}))), DomainError);
    EXPECT_THROW(from_dual(ex, Point::eta(vec({-1}))), DomainError);
    EXPECT_THROW(from_dual(ga, Point::eta(vec({2, 1}))), DomainError);
}

TEST(FromDual, IterationBudgetExhausted) {
    EXPECT_THROW(from_dual(ex, Point::eta(vec({50})), Point::theta(vec({-3})), 1e-14, 1),
                 NonConvergenceError);
}

TEST(FromDual, BadGuessIsDomainError) {
    EXPECT_THROW(from_dual(ga, Point::eta(vec({0, 1})), Point::theta(vec({0, 1}))), DomainError);
}

TEST(FromDual, DampingKeepsIteratesInsideDomain) {
    // A far-off guess: the undamped first Newton step would cross theta2 = 0.
    const Vec eta = vec({0.1, 0.02});
    const Vec th = from_dual(ga, Point::eta(eta), Point::theta(vec({0, -5}))).coords;
    EXPECT_LE(rel_error(th, gaussian_theta(eta)), 1e-9);
}

TEST(DualPotential, Examples) {
    EXPECT_NEAR(dual_potential(q2, Point::eta(vec({1, 0}))), 0.5, 1e-12);
    EXPECT_NEAR(dual_potential(ex, Point::eta(vec({1}))), psi_star(ex, vec({1})), 1e-12);
    EXPECT_NEAR(dual_potential(be, Point::eta(vec({0.5}))), -std::log(2.0), 1e-12);
}

TEST(DualPotential, MatchesClosedConjugates) {
    auto g = rng(22);
    for (const auto& m : builtin_models())
        for (int k = 0; k < 50; ++k) {
            const Vec eta = m.grad(random_theta(m, g));
            EXPECT_NEAR(dual_potential(m, Point::eta(eta)), psi_star(m, eta), 1e-9) << m.name();
        }
}

TEST(DualProperties, RoundTrip) {
    auto g = rng(23);
    for (const auto& m : builtin_models())
        for (int k = 0; k < 100; ++k) {
            const Point p = Point::theta(random_theta(m, g));
            const Point back = from_dual(m, to_dual(m, p));
            EXPECT_LE((back.coords - p.coords).lpNorm<Eigen::Infinity>(), 1e-8) << m.name();
        }
}

TEST(DualProperties, FenchelIdentity) {
    auto g = rng(24);
    for (const auto& m : builtin_models())
        for (int k = 0; k < 100; ++k) {
            const Point p = Point::theta(random_theta(m, g));
            const Point q = to_dual(m, p);
            const double r = eval_potential(m, p) + dual_potential(m, q) - p.coords.dot(q.coords);
            EXPECT_LE(std::abs(r), 1e-10) << m.name() << " at " << p.coords.transpose();
        }
}

TEST(Orthogonality, Examples) {
    EXPECT_LE(orthogonality_residual(q2, Point::theta(vec({1, 1}))), 1e-8);
    EXPECT_LE(orthogonality_residual(ex, Point::theta(vec({0.3}))), 1e-5);
    EXPECT_LE(orthogonality_residual(ga, Point::theta(vec({1, -1}))), 1e-4);
}

TEST(Orthogonality, DualHessianOracleForExp) {
    // g^{11}(eta) = 1/eta for exp1d.
    const double eta = std::exp(0.3);
    EXPECT_NEAR(dual_metric_fd(ex, vec({eta}), vec({0.3}))(0, 0), 1 / eta, 1e-6);
}

TEST(OrthogonalityProperties, BothPathsAtRandomPoints) {
    auto g = rng(25);
    for (const auto& m : builtin_models())
        for (int k = 0; k < 50; ++k) {
            const Point p = Point::theta(random_theta(m, g));
            EXPECT_LE(orthogonality_residual(m, p), 1e-4) << m.name() << " at " << p.coords.transpose();
            EXPECT_LE(orthogonality_residual_inverse(m, p), 1e-10) << m.name();
        }
}
