#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oscq/errors.hpp"
#include "oscq/models.hpp"
#include "oscq/transient.hpp"

using namespace oscq;

namespace {

IntegratorConfig config(Method method, double h) {
    IntegratorConfig cfg;
    cfg.method = method;
    cfg.step = h;
    return cfg;
}

double decay_error(Method method, double h) {
    const DaeSystem model = build_linear_decay(1.0);
    const Waveform w = integrate(model, Vector::Ones(1), 0.0, 1.0, config(method, h));
    return std::abs(w.back()(0) - std::exp(-1.0));
}

double lc_energy(const Vector& x) { return x.squaredNorm(); } // L = C

} // namespace

TEST_SUITE("transient") {

TEST_CASE("trapezoidal linear decay reaches exp(-1)") {
    const DaeSystem model = build_linear_decay(1.0);
    const Waveform w = integrate(model, Vector::Ones(1), 0.0, 1.0, config(Method::Trapezoidal, 1e-3));
    CHECK(w.times.front() == 0.0);
    CHECK(w.times.back() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(w.back()(0) - std::exp(-1.0)) < 1e-6);
    for (std::size_t i = 1; i < w.times.size(); ++i) {
        REQUIRE(w.times[i] > w.times[i - 1]);
    }
    CHECK(w.states.allFinite());
    CHECK(static_cast<std::size_t>(w.size()) == w.times.size());
}

TEST_CASE("order of accuracy on linear decay") {
    const double be = decay_error(Method::BackwardEuler, 1e-2) / decay_error(Method::BackwardEuler, 5e-3);
    const double tr = decay_error(Method::Trapezoidal, 1e-2) / decay_error(Method::Trapezoidal, 5e-3);
    CHECK(be == doctest::Approx(2.0).epsilon(0.05));
    CHECK(tr == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("both schemes keep the chemical total to Newton tolerance") {
    const DaeSystem chem = build_chemical(1.0);
    const Vector x0 = (Vector(3) << 1.0, 0.3, 0.2).finished();
    for (Method m : {Method::BackwardEuler, Method::Trapezoidal}) {
        const Waveform w = integrate_steps(chem, x0, 0.0, 5e-3, 4000, config(m, 5e-3));
        const double total = x0.sum();
        double worst = 0.0;
        for (Eigen::Index i = 0; i < w.size(); ++i) {
            worst = std::max(worst, std::abs(w.states.row(i).sum() - total));
        }
        CHECK(worst < 1e-10);
    }
}

TEST_CASE("lossless LC: trapezoidal returns after one period, backward Euler decays") {
    const double l = 0.5e-9;
    const double c = 0.5e-9;
    const DaeSystem lc = build_lc(l, c, 0.0, 1.01);
    const double period = 2.0 * std::numbers::pi * std::sqrt(l * c);
    const Vector x0 = (Vector(2) << 1.0, 0.0).finished();
    const Waveform trap = integrate_steps(lc, x0, 0.0, period / 2000, 2000, config(Method::Trapezoidal, period / 2000));
    CHECK((trap.back() - x0).norm() < 1e-5 * x0.norm());
    // trapezoidal conserves the quadratic energy of a linear lossless tank
    CHECK(lc_energy(trap.back()) == doctest::Approx(lc_energy(x0)).epsilon(1e-12));

    const Waveform be = integrate_steps(lc, x0, 0.0, period / 2000, 2000, config(Method::BackwardEuler, period / 2000));
    for (Eigen::Index i = 1; i < be.size(); ++i) {
        REQUIRE(lc_energy(be.state(i)) < lc_energy(be.state(i - 1)));
    }
}

TEST_CASE("accepted steps satisfy the discrete residual") {
    const DaeSystem ring = build_ring(1.0, 100.0);
    const Vector x0 = (Vector(3) << 0.5, -0.3, 0.1).finished();
    const IntegratorConfig cfg = config(Method::Trapezoidal, 1e-3);
    const Vector q = ring.q(x0);
    const Vector f = ring.f(x0);
    const StepResult r = implicit_step(ring, x0, q, f, 1e-3, cfg, 1e-3);
    const Vector res = r.q - q + 1e-3 * 0.5 * (r.f + f);
    CHECK(res.cwiseAbs().maxCoeff() <= cfg.newton_tol * std::max(1.0, q.cwiseAbs().maxCoeff()));
    CHECK(r.residual <= cfg.newton_tol);
}

TEST_CASE("Newton failure reports time and iterate") {
    DaeDefinition def;
    def.id = "cubic";
    def.state_names = {"x"};
    def.q = [](const Vector& x) { return x; };
    def.f = [](const Vector& x) { return Vector(x.array().cube() * 1e3); };
    def.dq = [](const Vector&) { return Matrix::Identity(1, 1); };
    def.df = [](const Vector& x) { return Matrix::Constant(1, 1, 3e3 * x(0) * x(0)); };
    const DaeSystem model(def);
    IntegratorConfig cfg = config(Method::BackwardEuler, 10.0);
    cfg.newton_max_iter = 2;
    try {
        integrate_steps(model, Vector::Constant(1, 5.0), 0.0, 10.0, 3, cfg);
        FAIL("expected StepFailure");
    } catch (const StepFailure& e) {
        CHECK(e.time() == doctest::Approx(10.0));
        CHECK(e.iterate().size() == 1);
    }
}

TEST_CASE("singular iteration matrix is diagnosed") {
    // q = 0 with a constant f: the residual never vanishes and C + h G = 0.
    DaeDefinition def;
    def.id = "algebraic";
    def.state_names = {"x"};
    def.q = [](const Vector& x) { return Vector(Vector::Zero(x.size())); };
    def.f = [](const Vector& x) { return Vector(Vector::Ones(x.size())); };
    def.dq = [](const Vector&) { return Matrix::Zero(1, 1); };
    def.df = [](const Vector&) { return Matrix::Zero(1, 1); };
    const DaeSystem model(def);
    CHECK_THROWS_AS(integrate_steps(model, Vector::Ones(1), 0.0, 0.1, 2, config(Method::Trapezoidal, 0.1)),
                    SingularMatrixError);
}

TEST_CASE("configuration validation and method names") {
    CHECK(parse_method("be") == Method::BackwardEuler);
    CHECK(parse_method("backward-euler") == Method::BackwardEuler);
    CHECK(parse_method("trap") == Method::Trapezoidal);
    CHECK(parse_method("trapezoidal") == Method::Trapezoidal);
    CHECK_THROWS_AS(parse_method("rk4"), Error);
    CHECK(implicit_weight(Method::BackwardEuler) == 1.0);
    CHECK(implicit_weight(Method::Trapezoidal) == 0.5);
    IntegratorConfig bad;
    bad.step = 0.0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad.step = 1e-3;
    bad.newton_tol = -1.0;
    CHECK_THROWS_AS(bad.validate(), Error);
    const IntegratorConfig pc = IntegratorConfig::per_cycle(2.0, 400);
    CHECK(pc.step == doctest::Approx(0.005));
}

TEST_CASE("stride keeps the final state") {
    const DaeSystem model = build_linear_decay(1.0);
    const Waveform all = integrate_steps(model, Vector::Ones(1), 0.0, 0.01, 10, config(Method::Trapezoidal, 0.01));
    const Waveform some = integrate_steps(model, Vector::Ones(1), 0.0, 0.01, 10, config(Method::Trapezoidal, 0.01), 4);
    CHECK(some.back()(0) == all.back()(0));
    CHECK(some.times.back() == doctest::Approx(0.1));
}

}
