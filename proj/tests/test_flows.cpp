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

Point th(std::initializer_list<double> x) { return Point::theta(vec(x)); }
Point et(std::initializer_list<double> x) { return Point::eta(vec(x)); }

double max_dev(const std::vector<Vec>& img, const Trajectory& t, int sign) {
    double worst = 0.0;
    for (std::size_t n = 0; n < t.size(); ++n)
        worst = std::max(worst, (img[n] - closed_form_dual_flow(img[0], t.times()[n], sign)).lpNorm<Eigen::Infinity>());
    return worst;
}

/// 1-D potential whose Hessian 1 + theta vanishes at theta = -1.
PotentialModel make_degenerate() {
    return PotentialModel("degenerate", 1, [](const Vec& x) { return 0.5 * x(0) * x(0) + x(0) * x(0) * x(0) / 6; },
                          whole_space(), "θ ∈ ℝ", Vec::Zero(1))
        .with_gradient([](const Vec& x) { return vec({x(0) + 0.5 * x(0) * x(0)}); })
        .with_hessian([](const Vec& x) { return Mat::Constant(1, 1, 1 + x(0)); });
}

} // namespace

TEST(ThetaFlow, Examples) {
    const Trajectory a = integrate_theta_flow(q2, th({1, 0}));
    EXPECT_EQ(a.terminated_reason(), TerminationReason::Completed);
    EXPECT_NEAR(a.end_time(), 1.0, 1e-12);
    EXPECT_LE((a.points().back() - vec({std::exp(1.0), 0})).lpNorm<Eigen::Infinity>(), 1e-10);

    const Trajectory b = integrate_theta_flow(ex, th({0}));
    EXPECT_NEAR(b.points().back()(0), 1.0, 1e-12);
    EXPECT_EQ(b.size(), 1001u);
}

TEST(ThetaFlow, BernoulliExitsNearLn2) {
    for (Method method : {Method::RK4, Method::DP45}) {
        FlowConfig cfg;
        cfg.method = method;
        const Trajectory t = integrate_theta_flow(be, th({0}), cfg);
        EXPECT_EQ(t.terminated_reason(), TerminationReason::DomainExit);
        EXPECT_NEAR(t.end_time(), std::log(2.0), 1e-4);
        EXPECT_LT(be.grad(t.points().back())(0), 1.0);
    }
}

TEST(ThetaFlow, DegenerateHessianStopsWithSingularMetric) {
    const Trajectory t = integrate_theta_flow(make_degenerate(), th({-0.5}));
    EXPECT_EQ(t.terminated_reason(), TerminationReason::SingularMetric);
    EXPECT_LT(t.end_time(), 1.0);
    EXPECT_GT(t.points().back()(0), -1.0);
}

TEST(ThetaFlow, InvalidInputs) {
    FlowConfig bad;
    bad.step = 0;
    EXPECT_THROW(integrate_theta_flow(ex, th({0}), bad), ConfigError);
    bad = FlowConfig{};
    bad.t_end = -1;
    EXPECT_THROW(integrate_theta_flow(ex, th({0}), bad), ConfigError);
    EXPECT_THROW(integrate_theta_flow(ga, th({0, 1})), DomainError);
    EXPECT_THROW(integrate_theta_flow(ex, et({0})), ChartError);
}

TEST(ThetaFlow, TrajectoryInvariants) {
    auto g = rng(51);
    for (const auto& m : builtin_models()) {
        const Trajectory t = integrate_theta_flow(m, Point::theta(random_theta(m, g)));
        for (std::size_t n = 1; n < t.size(); ++n) EXPECT_GT(t.times()[n], t.times()[n - 1]);
        for (const Vec& x : t.points()) EXPECT_TRUE(m.in_domain(x)) << m.name();
        for (std::size_t n = 0; n < t.size(); ++n)
            EXPECT_LE((t.velocities()[n] - theta_flow_velocity(m, t.points()[n])).norm(), 0.0);
    }
}

TEST(ThetaFlow, Dp45KeepsUniformOutput) {
    FlowConfig cfg;
    cfg.method = Method::DP45;
    cfg.step = 0.01;
    const Trajectory t = integrate_theta_flow(ga, th({0.5, -0.5}), cfg);
    EXPECT_EQ(t.uniform_prefix(), t.size());
    EXPECT_EQ(t.size(), 101u);
    const auto img = dual_image(ga, t);
    EXPECT_LE(max_dev(img, t, +1), 1e-7);
}

TEST(EtaFlow, Examples) {
    const Trajectory a = integrate_eta_flow(q2, et({1, 0}));
    EXPECT_EQ(a.chart(), Chart::Eta);
    EXPECT_LE((a.points().back() - vec({std::exp(-1.0), 0})).lpNorm<Eigen::Infinity>(), 1e-10);
    EXPECT_LE(max_dev(a.points(), a, -1), 1e-8);

    // eta0 = 1 is theta0 = 0, a fixed point of dtheta/dt = -theta.
    const Trajectory b = integrate_eta_flow(ex, et({1}));
    for (const Vec& x : dual_image(ex, b)) EXPECT_NEAR(x(0), 0.0, 1e-12);

    const Trajectory c = integrate_eta_flow(ex, et({std::exp(1.0)}));
    const auto img = dual_image(ex, c);
    for (std::size_t n = 0; n < c.size(); ++n) EXPECT_NEAR(img[n](0), std::exp(-c.times()[n]), 1e-10);
}

TEST(EtaFlow, OutsideImageThrows) {
    EXPECT_THROW(integrate_eta_flow(be, et({1.2})), DomainError);
    EXPECT_THROW(integrate_eta_flow(ex, th({1})), ChartError);
}

TEST(ClosedFormDualFlow, Examples) {
    EXPECT_EQ(closed_form_dual_flow(vec({0, 0}), 3.0, +1), vec({0, 0}));
    EXPECT_NEAR(closed_form_dual_flow(vec({0.5}), std::log(2.0), +1)(0), 1.0, 1e-15);
    EXPECT_LE((closed_form_dual_flow(vec({2, 4}), 1.0, +1) - std::exp(1.0) * vec({2, 4})).norm(), 1e-14);
    EXPECT_ANY_THROW(closed_form_dual_flow(vec({1}), 1.0, 0));
}

TEST(Hamiltonian, Examples) {
    EXPECT_EQ(hamiltonian(vec({2, 4})), 4.0 / 2.0);
    for (double t : {0.0, 0.3, 1.0, 5.0})
        EXPECT_NEAR(hamiltonian(vec({2 * std::exp(t), 4 * std::exp(t)})), 2.0, 1e-14);
    EXPECT_THROW(hamiltonian(vec({0, 1})), DivisionByZeroError);
    EXPECT_THROW(hamiltonian(vec({1, 2, 3})), ChartError);
    EXPECT_NEAR(hamiltonian(vec({1, 2, 4, -2})), 2.0 - 0.5, 1e-15);
}

TEST(HamiltonianProperties, ConservedOnEvenDimensionalRuns) {
    const std::vector<std::pair<PotentialModel, Vec>> runs{{q2, vec({1, 0.5})}, {ga, vec({0.5, -0.5})},
                                                          {ga, vec({-1, -2})}};
    for (const auto& [m, x0] : runs) {
        const Trajectory a = integrate_theta_flow(m, Point::theta(x0));
        const Trajectory b = integrate_eta_flow(m, to_dual(m, Point::theta(x0)));
        for (const auto* t : {&a, &b}) {
            const auto img = dual_image(m, *t);
            const double h0 = hamiltonian(img.front());
            for (const Vec& q : img) EXPECT_LE(std::abs(hamiltonian(q) - h0), 1e-8) << m.name();
        }
    }
}

TEST(PotentialRate, Examples) {
    const Trajectory a = integrate_theta_flow(q2, th({1, 0.5}));
    for (double r : potential_rate_residual(q2, a)) EXPECT_LE(r, 1e-12);
    const Trajectory b = integrate_theta_flow(ex, th({0}));
    for (double r : potential_rate_residual(ex, b)) EXPECT_LE(r, 1e-10);
    EXPECT_THROW(potential_rate_residual(ex, integrate_eta_flow(ex, et({1}))), ChartError);
}

// Independent oracle: 5-point difference of the sampled potential.
TEST(PotentialRate, FiniteDifferenceCrossCheck) {
    const std::vector<std::pair<PotentialModel, Vec>> runs{
        {q2, vec({1, 0.5})}, {ex, vec({0})}, {be, vec({-1})}, {ga, vec({0.5, -0.5})}};
    for (const auto& [m, x0] : runs) {
        const Trajectory t = integrate_theta_flow(m, Point::theta(x0));
        std::vector<double> psi;
        for (const Vec& x : t.points()) psi.push_back(m.eval(x));
        for (std::size_t k = 2; k + 2 < t.size(); ++k) {
            const double eta2 = eta_squared_at(m, t.points()[k]);
            EXPECT_LE(std::abs(five_point_derivative(psi, k, t.spacing()) - eta2), 1e-4) << m.name();
        }
    }
}

TEST(EntropyRate, Examples) {
    const Trajectory a = integrate_eta_flow(q2, et({1, 0.5}));
    for (double r : entropy_rate_residual(q2, a)) EXPECT_LE(r, 1e-10);
    const Trajectory b = integrate_eta_flow(ex, et({1}));
    const auto rb = entropy_rate_residual(ex, b);
    for (double r : rb) EXPECT_LE(r, 1e-6);
    EXPECT_EQ(rb.front(), 0.0);
    EXPECT_THROW(entropy_rate_residual(ex, integrate_theta_flow(ex, th({0}))), ChartError);
}

TEST(EntropyRate, FiniteDifferenceCrossCheck) {
    const std::vector<std::pair<PotentialModel, Vec>> runs{
        {q2, vec({1, 0.5})}, {ex, vec({std::exp(1.0)})}, {be, vec({0.3})}, {ga, vec({0.5, 1.25})}};
    for (const auto& [m, e0] : runs) {
        const Trajectory t = integrate_eta_flow(m, Point::eta(e0));
        const auto thetas = dual_image(m, t);
        std::vector<double> psi_star;
        for (std::size_t n = 0; n < t.size(); ++n) psi_star.push_back(thetas[n].dot(t.points()[n]) - m.eval(thetas[n]));
        for (std::size_t k = 2; k + 2 < t.size(); ++k) {
            const Vec& x = thetas[k];
            const double theta2 = x.dot(metric_at(m, x) * x);
            EXPECT_LE(std::abs(-five_point_derivative(psi_star, k, t.spacing()) - theta2), 1e-4) << m.name();
        }
    }
}

TEST(FlowProperties, LinearizationWithinRk4Bound) {
    const double h = 1e-3, bound = 5 * std::pow(h, 4);
    const std::vector<std::pair<PotentialModel, Vec>> runs{
        {q2, vec({1, 0.5})}, {ex, vec({0})}, {be, vec({-1})}, {ga, vec({0.5, -0.5})}};
    for (const auto& [m, x0] : runs) {
        const Trajectory a = integrate_theta_flow(m, Point::theta(x0));
        ASSERT_EQ(a.terminated_reason(), TerminationReason::Completed) << m.name();
        const auto ia = dual_image(m, a);
        for (std::size_t n = 0; n < a.size(); ++n) {
            const Vec exact = closed_form_dual_flow(ia[0], a.times()[n], +1);
            EXPECT_LE((ia[n] - exact).lpNorm<Eigen::Infinity>(), bound * std::max(a.times()[n], h))
                << m.name() << " theta-flow t=" << a.times()[n];
        }
        const Trajectory b = integrate_eta_flow(m, to_dual(m, Point::theta(x0)));
        EXPECT_LE(max_dev(dual_image(m, b), b, -1), bound) << m.name();
    }
}

TEST(FlowProperties, SpeedEqualsEtaSquared) {
    auto g = rng(52);
    for (const auto& m : builtin_models()) {
        const Trajectory t = integrate_theta_flow(m, Point::theta(random_theta(m, g)));
        for (std::size_t n = 0; n < t.size(); ++n) {
            const Vec& x = t.points()[n];
            const Vec& v = t.velocities()[n];
            const double e2 = eta_squared_at(m, x);
            EXPECT_LE(std::abs(v.dot(metric_at(m, x) * v) - e2), 1e-10 * std::max(1.0, e2)) << m.name();
        }
    }
}

TEST(FlowProperties, ThetaAndEtaFlowsAreDistinct) {
    for (double x0 : {0.0, 1.0}) {
        const Trajectory a = integrate_theta_flow(ex, th({x0}));
        const Trajectory b = integrate_eta_flow(ex, to_dual(ex, th({x0})));
        const std::size_t half = 500;
        ASSERT_NEAR(a.times()[half], 0.5, 1e-12);
        const double theta_b = dual_image(ex, b)[half](0);
        EXPECT_GT(std::abs(a.points()[half](0) - theta_b), 1e-2);
    }
}

// Softmax eta of ln(1 + e^x + e^y) grows as eta0 e^t and leaves the simplex
// when eta1 + eta2 reaches 1, at t* = -ln(eta1 + eta2)(0).
TEST(ThetaFlow, FdOnlyModelEscapeTime) {
    const PotentialModel plain = make_logsumexp2();
    const PotentialModel declared = plain.with_dual_domain(
        [](const Vec& e) { return std::min({e(0), e(1), 1 - e(0) - e(1)}); });
    const Vec x0 = vec({0.3, -0.2});
    const double s = std::exp(x0(0)) + std::exp(x0(1));
    const double t_star = std::log((1 + s) / s);

    const Trajectory a = integrate_theta_flow(declared, Point::theta(x0));
    EXPECT_EQ(a.terminated_reason(), TerminationReason::DomainExit);
    EXPECT_NEAR(a.end_time(), t_star, 1e-3);

    // Without a declared eta-domain the escape shows up as a degenerate Hessian.
    const Trajectory b = integrate_theta_flow(plain, Point::theta(x0));
    EXPECT_EQ(b.terminated_reason(), TerminationReason::SingularMetric);
    EXPECT_NEAR(b.end_time(), t_star, 1e-3);
}
