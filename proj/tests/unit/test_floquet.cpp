#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oscq/eigen_qr.hpp"
#include "oscq/errors.hpp"
#include "oscq/floquet.hpp"
#include "oscq/models.hpp"

using namespace oscq;

namespace {

const double kPhi6 = std::pow(kGoldenRatio, -6.0);

std::vector<Complex> spec(std::initializer_list<double> values) {
    std::vector<Complex> out;
    for (double v : values) out.emplace_back(v, 0.0);
    return out;
}

struct Case {
    DaeSystem model;
    PeriodicSteadyState pss;
};

Case solve(const std::string& name, const std::vector<std::pair<std::string, double>>& overrides = {}) {
    const ModelSpec& s = find_model(name);
    const ParameterSet p = s.defaults.with(overrides);
    DaeSystem m = s.build(p);
    PeriodicSteadyState pss = find_pss(m, s.seed(p), s.period_hint(p), PssOptions{});
    return {std::move(m), std::move(pss)};
}

} // namespace

TEST_SUITE("floquet") {

TEST_CASE("q_factor examples") {
    const QReport ring = q_factor(spec({1.0, 0.0557, 0.0031}));
    CHECK(ring.verdict == Verdict::Finite);
    CHECK(*ring.q_value == doctest::Approx(1.037).epsilon(0.001 / 1.037));
    CHECK(*q_factor(spec({1.0, 0.54})).q_value == doctest::Approx(4.86).epsilon(0.005 / 4.86));
    CHECK(*q_factor(spec({1.0, 0.94})).q_value == doctest::Approx(48.4).epsilon(0.05 / 48.4));
    CHECK(*q_factor(spec({1.0, 0.9081})).q_value == doctest::Approx(31.07).epsilon(0.01 / 31.07));
    CHECK(*q_factor(spec({1.0, 0.05})).q_value == 1.0);
    CHECK(q_factor(spec({1.0, 0.05})).lambda2_modulus == 0.05);
}

TEST_CASE("verdicts") {
    CHECK(q_factor(spec({1.0, 1.0, 0.7})).verdict == Verdict::Infinite);
    CHECK(!q_factor(spec({1.0, 1.0, 0.7})).q_value);
    CHECK(q_factor(spec({1.0, 1.2})).verdict == Verdict::Unstable);
    CHECK(q_factor(spec({1.2, 1.0, 1.0})).verdict == Verdict::Unstable);
    CHECK(q_factor(spec({0.5, 0.2})).verdict == Verdict::NotOscillating);
    CHECK(q_factor(spec({1.00005, 0.5}), 1e-4).verdict == Verdict::Finite);
    CHECK(q_factor(spec({1.00005, 0.5}), 1e-6).verdict == Verdict::NotOscillating);
    // |lambda2| inside the unit band but not equal to one is not Finite
    CHECK(q_factor(spec({1.0, 0.99995})).verdict == Verdict::Infinite);
    const QReport pair = q_factor({Complex(1.0, 0.0), Complex(0.3, 0.4), Complex(0.3, -0.4)});
    CHECK(pair.lambda2_modulus == doctest::Approx(0.5));
    CHECK(pair.n_unit == 1);
}

TEST_CASE("phase multiplier is the unit one closest to 1") {
    const QReport r = q_factor({Complex(-1.0, 0.0), Complex(1.0, 0.0), Complex(0.2, 0.0)});
    CHECK(r.n_unit == 2);
    CHECK(r.verdict == Verdict::Infinite);
    CHECK(r.lambda2 == Complex(-1.0, 0.0));
}

TEST_CASE("Q decreases as |lambda2| shrinks") {
    double prev = 0.0;
    for (double a = 0.01; a < 0.999; a += 0.01) {
        const double q = q_from_lambda2(a);
        CHECK(q > prev);
        prev = q;
    }
    CHECK(q_from_lambda2(0.0) == 0.0);
}

TEST_CASE("Floquet exponents use the principal log over T") {
    const QReport r = q_factor({Complex(1.0, 0.0), Complex(-0.5, 0.0)}, 1e-4, 2.0);
    REQUIRE(r.floquet_exponents.size() == 2);
    CHECK(std::abs(r.floquet_exponents[0]) < 1e-15);
    CHECK(r.floquet_exponents[1].real() == doctest::Approx(std::log(0.5) / 2.0));
    CHECK(r.floquet_exponents[1].imag() == doctest::Approx(std::numbers::pi / 2.0));
}

TEST_CASE("lossless LC monodromy sits on the unit circle") {
    const DaeSystem lc = build_lc(0.5e-9, 0.5e-9, 0.0, 1.01);
    const double t = 2.0 * std::numbers::pi * std::sqrt(0.25e-18);
    const PeriodicSteadyState pss = tabulate_orbit(lc, (Vector(2) << 1.0, 0.0).finished(), t, 2000,
                                                   IntegratorConfig{});
    for (const Complex& m : eigen_spectrum(fundamental_matrix(lc, pss))) {
        CHECK(std::abs(std::abs(m) - 1.0) < 1e-6);
    }
}

TEST_CASE("ring multipliers and phase mode") {
    const Case c = solve("ring");
    const MonodromyResult r = analyze_monodromy(c.model, c.pss);
    REQUIRE(r.multipliers.size() == 3);
    CHECK(std::abs(r.multipliers[0] - 1.0) < 1e-6);
    CHECK(std::abs(std::abs(r.lambda2) / kPhi6 - 1.0) < 0.1);
    CHECK(std::abs(std::abs(r.multipliers[2]) / std::pow(kGoldenRatio, -12.0) - 1.0) < 0.1);
    CHECK(r.q_report.verdict == Verdict::Finite);
    const Vector v = c.model.velocity(c.pss.x0());
    CHECK((r.xT * v - v).norm() <= 1e-3 * v.norm());
    CHECK(alignment_angle_deg(r.xT, v) < 2.0);
    // det X(T) = exp(-3T/tau): the ring's G has trace 3/tau
    CHECK(r.xT.determinant() == doctest::Approx(std::exp(-3.0 * c.pss.period)).epsilon(1e-4));
}

TEST_CASE("power method reproduces lambda2") {
    Matrix d = Vector((Vector(3) << 1.0, 0.5, 0.1).finished()).asDiagonal();
    const PowerEstimate e = lambda2_power(d, Vector::Unit(3, 0));
    CHECK(std::abs(e.lambda2 - 0.5) < 1e-10);
    CHECK(e.separated);

    for (const char* name : {"ring", "lc"}) {
        CAPTURE(name);
        const Case c = solve(name, std::string(name) == "lc" ? std::vector<std::pair<std::string, double>>{{"K", 20.0}}
                                                              : std::vector<std::pair<std::string, double>>{});
        const MonodromyResult r = analyze_monodromy(c.model, c.pss);
        const PowerEstimate p = lambda2_power(r.xT, c.model.velocity(c.pss.x0()));
        CHECK(std::abs(std::abs(p.lambda2) / r.q_report.lambda2_modulus - 1.0) < 1e-6);
    }
}

TEST_CASE("power method falls back when lambda2 and lambda3 are close") {
    Matrix d = Vector((Vector(4) << 1.0, 0.6, 0.59, 0.1).finished()).asDiagonal();
    const PowerEstimate e = lambda2_power(d, Vector::Unit(4, 0));
    CHECK(!e.separated);
    CHECK(e.fell_back);
    CHECK(!e.warnings.empty());
    CHECK(std::abs(e.lambda2 - 0.6) < 1e-12);
}

TEST_CASE("projector removes the phase direction") {
    Matrix a(3, 3);
    a << 1.0, 0.3, 0.0, 0.0, 0.4, 0.1, 0.0, 0.0, 0.2;
    const Vector v = Vector::Unit(3, 0);
    const Matrix p = phase_projector(a, v);
    CHECK((p * v).norm() < 1e-12);
    CHECK((p * p - p).norm() < 1e-12);
    CHECK((p * a - a * p).norm() < 1e-10);
}

TEST_CASE("singular propagation matrix names the step") {
    const DaeSystem lc = build_lc();
    PeriodicSteadyState pss = tabulate_orbit(lc, (Vector(2) << 0.2, 0.0).finished(), 3.14e-9, 50, IntegratorConfig{});
    pss.c_table[7].setZero();
    pss.g_table[7].setZero();
    try {
        fundamental_matrix(lc, pss);
        FAIL("expected SingularMatrixError");
    } catch (const SingularMatrixError& e) {
        CHECK(e.step_index() == 7);
    }
}

}
