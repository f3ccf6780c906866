#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oscq/dae.hpp"
#include "oscq/errors.hpp"
#include "oscq/models.hpp"

using namespace oscq;

TEST_SUITE("dae") {

TEST_CASE("LC Jacobians at the origin") {
    const DaeSystem lc = build_lc(0.5e-9, 0.5e-9, 1.0, 1.01);
    const Vector x = Vector::Zero(2);
    const Jacobians j = lc.jacobians(x);
    CHECK(j.c(0, 0) == doctest::Approx(0.5e-9).epsilon(1e-15));
    CHECK(j.c(1, 1) == doctest::Approx(0.5e-9).epsilon(1e-15));
    CHECK(j.c(0, 1) == 0.0);
    CHECK(j.c(1, 0) == 0.0);
    // G[0][0] = K (1 - a sech^2(0)) = -0.01 K
    CHECK(j.g(0, 0) == doctest::Approx(-0.01).epsilon(1e-12));
    CHECK(j.g(0, 1) == 1.0);
    CHECK(j.g(1, 0) == -1.0);
    CHECK(j.g(1, 1) == 0.0);
}

TEST_CASE("analytic Jacobians match central differences for every model") {
    for (const ModelSpec& spec : model_registry()) {
        CAPTURE(spec.name);
        const DaeSystem model = spec.build(spec.defaults);
        CHECK(model.jacobian_mode() == JacobianMode::Analytic);
        const JacobianCheckReport report = fd_jacobian_check(model, 20, 0);
        CHECK(report.samples == 20);
        CHECK(report.max_rel_error < 1e-5);
    }
}

TEST_CASE("Jacobian check is deterministic per seed") {
    const DaeSystem ring = build_ring(1.0, 20.0);
    const auto a = fd_jacobian_check(ring, 10, 7);
    const auto b = fd_jacobian_check(ring, 10, 7);
    CHECK(a.max_rel_error == b.max_rel_error);
    CHECK(a.worst_state == b.worst_state);
}

TEST_CASE("sampled states lie in the box and evaluate finite") {
    for (const ModelSpec& spec : model_registry()) {
        CAPTURE(spec.name);
        const DaeSystem model = spec.build(spec.defaults);
        const SamplingBox& box = model.sampling_box();
        std::mt19937_64 rng(3);
        for (int s = 0; s < 10; ++s) {
            Vector x(model.size());
            for (int i = 0; i < model.size(); ++i) {
                x(i) = std::uniform_real_distribution<double>(box.lower(i), box.upper(i))(rng);
            }
            CHECK(model.q(x).allFinite());
            CHECK(model.f(x).allFinite());
            CHECK(model.dq(x).allFinite());
            CHECK(model.df(x).allFinite());
        }
    }
}

TEST_CASE("chemical rates conserve the total") {
    const DaeSystem chem = build_chemical(1.0);
    const Vector ones = Vector::Ones(3);
    CHECK(chem.df(ones).colwise().sum().cwiseAbs().maxCoeff() == 0.0);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (int s = 0; s < 50; ++s) {
        const Vector x = Vector::NullaryExpr(3, [&](Eigen::Index) { return u(rng); });
        CHECK(std::abs(chem.f(x).sum()) <= 1e-15 * (1.0 + x.squaredNorm()));
        CHECK(chem.df(x).colwise().sum().cwiseAbs().maxCoeff() <= 1e-15 * (1.0 + x.norm()));
    }
}

TEST_CASE("finite-difference fallback and step rule") {
    CHECK(fd_step(0.0) == 1e-8);
    CHECK(fd_step(1.0) == 1e-7);
    CHECK(fd_step(-300.0) == doctest::Approx(3e-5));
    const DaeSystem lc = build_lc();
    const DaeSystem fd = lc.with_fd_jacobians();
    CHECK(fd.jacobian_mode() == JacobianMode::FiniteDifference);
    const Vector x = (Vector(2) << 0.3, -0.1).finished();
    CHECK((fd.df(x) - lc.df(x)).norm() <= 1e-6 * lc.df(x).norm());
}

TEST_CASE("non-finite evaluation is a domain error carrying the state") {
    DaeDefinition def;
    def.id = "sqrt";
    def.state_names = {"x"};
    def.q = [](const Vector& x) { return x; };
    def.f = [](const Vector& x) { return Vector(x.array().sqrt()); };
    const DaeSystem model(def);
    const Vector bad = Vector::Constant(1, -4.0);
    try {
        model.f(bad);
        FAIL("expected ModelDomainError");
    } catch (const ModelDomainError& e) {
        CHECK(e.state()(0) == -4.0);
    }
}

TEST_CASE("parameter sets validate overrides") {
    const ParameterSet p{{"K", 1.0}, {"a", 1.01}};
    CHECK(p.get("K") == 1.0);
    CHECK(p.with({{"K", 20.0}}).get("K") == 20.0);
    CHECK(p.get("K") == 1.0);
    CHECK_THROWS_WITH_AS(p.with({{"Z", 1.0}}), "unknown parameter Z", ParameterError);
    CHECK_THROWS_AS(p.with({{"K", std::numeric_limits<double>::infinity()}}), ParameterError);
    CHECK_THROWS_AS(p.get("Z"), ParameterError);
    const auto kv = parse_assignment("K=2.5e-3");
    CHECK(kv.first == "K");
    CHECK(kv.second == 2.5e-3);
    CHECK_THROWS_AS(parse_assignment("K"), ParameterError);
    CHECK_THROWS_AS(parse_assignment("K=abc"), ParameterError);
    CHECK_THROWS_AS(parse_assignment("=3"), ParameterError);
}

TEST_CASE("velocity solves C xdot = -f") {
    const DaeSystem lc = build_lc(0.5e-9, 0.5e-9, 1.0, 1.01);
    const Vector x = (Vector(2) << 0.2, 0.05).finished();
    const Vector v = lc.velocity(x);
    CHECK((lc.dq(x) * v + lc.f(x)).norm() <= 1e-12 * lc.f(x).norm());
}

}
