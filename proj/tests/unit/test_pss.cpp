#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oscq/errors.hpp"
#include "oscq/models.hpp"
#include "oscq/pss.hpp"

using namespace oscq;

namespace {

const double kRingPeriod = 6.0 * std::log(kGoldenRatio);

void check_orbit_invariants(const PeriodicSteadyState& pss, double tol) {
    CHECK(pss.period > 0.0);
    CHECK(static_cast<int>(pss.grid.size()) == pss.steps + 1);
    CHECK(pss.grid.front() == 0.0);
    CHECK(pss.grid.back() == pss.period);
    CHECK(static_cast<int>(pss.c_table.size()) == pss.steps + 1);
    CHECK(static_cast<int>(pss.g_table.size()) == pss.steps + 1);
    CHECK(pss.closure_residual <= tol);
    const double closure = (pss.state(pss.steps) - pss.state(0)).cwiseAbs().maxCoeff();
    CHECK(closure <= tol * pss.orbit_scale);
    double spread = 0.0;
    for (int i = 0; i <= pss.steps; ++i) {
        spread = std::max(spread, (pss.state(i) - pss.state(0)).norm());
    }
    CHECK(spread > 1e-6 * pss.orbit_scale);
}

PeriodicSteadyState ring_pss(double s, int steps) {
    const DaeSystem ring = build_ring(1.0, s);
    PssOptions opts;
    opts.steps_per_cycle = steps;
    return find_pss(ring, (Vector(3) << 0.5, -0.3, 0.1).finished(), 2.9, opts, PssMode::Shoot);
}

} // namespace

TEST_SUITE("pss") {

TEST_CASE("LC shooting from the linear-tank guess") {
    const double l = 0.5e-9, c = 0.5e-9;
    const DaeSystem lc = build_lc(l, c, 1.0, 1.01);
    const double t_lin = 2.0 * std::numbers::pi * std::sqrt(l * c);
    PhaseCondition phase{1, 0.0};
    PssOptions opts;
    const PeriodicSteadyState pss = shoot(lc, (Vector(2) << 1.0, 0.0).finished(), t_lin, phase, opts);
    CHECK(pss.mode == "shoot");
    CHECK(std::abs(pss.period / t_lin - 1.0) < 0.02);
    CHECK(pss.x0()(1) == doctest::Approx(0.0).epsilon(1e-8));
    check_orbit_invariants(pss, opts.closure_tol);
}

TEST_CASE("smoothed ring shooting lands near the ideal period") {
    const DaeSystem ring = build_ring(1.0, 100.0);
    const Waveform warm = integrate_steps(ring, (Vector(3) << 0.5, -0.3, 0.1).finished(), 0.0, 1e-3, 20000,
                                          IntegratorConfig::per_cycle(2.9, 2900));
    const PhaseCondition phase = auto_phase(warm);
    PssOptions opts;
    const PeriodicSteadyState pss = shoot(ring, warm.back(), 2.9, phase, opts);
    CHECK(std::abs(pss.period / kRingPeriod - 1.0) < 0.05);
    check_orbit_invariants(pss, opts.closure_tol);
}

TEST_CASE("chemical shooting is flagged degenerate") {
    const DaeSystem chem = build_chemical(1.0);
    PssOptions opts;
    const Vector start = (Vector(3) << 1.0, 0.3, 0.2).finished();
    const PeriodicSteadyState d = detect_period(chem, start, 50.0, PhaseCondition{0, 0.5}, 10.0, opts);
    try {
        shoot(chem, d.x0(), d.period, d.phase, opts);
        FAIL("expected a degenerate-orbit diagnostic");
    } catch (const PssError& e) {
        CHECK(e.kind() == PssError::Kind::Degenerate);
        CHECK(std::string(e.what()).find("conservative or degenerate") != std::string::npos);
    }
}

TEST_CASE("chemical period detection on species a at its mean") {
    const DaeSystem chem = build_chemical(1.0);
    PssOptions opts;
    const Vector start = (Vector(3) << 1.0, 0.3, 0.2).finished();
    const PeriodicSteadyState pss = detect_period(chem, start, 50.0, std::nullopt, 10.0, opts);
    CHECK(pss.mode == "detect");
    CHECK(pss.phase.anchor_index >= 0);
    CHECK(pss.period > 0.0);
    CHECK(pss.closure_residual <= 1e-5);
    for (int i = 0; i <= pss.steps; i += 100) {
        CHECK(pss.state(i).sum() == doctest::Approx(1.5).epsilon(1e-12));
    }
    // Explicit section on a at its mean gives the same period.
    double mean_a = pss.samples.col(0).mean();
    const PeriodicSteadyState on_a = detect_period(chem, start, 50.0, PhaseCondition{0, mean_a}, 10.0, opts);
    CHECK(on_a.period == doctest::Approx(pss.period).epsilon(1e-6));
    CHECK(on_a.closure_residual <= 1e-5);
}

TEST_CASE("auto mode routes the chemical orbit to detection and closes it") {
    const ModelSpec& spec = find_model("chemical");
    const DaeSystem chem = spec.build(spec.defaults);
    const PeriodicSteadyState pss = find_pss(chem, spec.seed(spec.defaults), spec.period_hint(spec.defaults), PssOptions{});
    CHECK(pss.mode.rfind("detect", 0) == 0);
    CHECK(!pss.warnings.empty());
    CHECK(pss.closure_residual <= 1e-8);
}

TEST_CASE("lossless LC detection recovers the resonance") {
    const double l = 0.5e-9, c = 0.5e-9;
    const DaeSystem lc = build_lc(l, c, 0.0, 1.01);
    const double t_lin = 2.0 * std::numbers::pi * std::sqrt(l * c);
    const PeriodicSteadyState pss =
        detect_period(lc, (Vector(2) << 1.0, 0.0).finished(), 0.0, std::nullopt, t_lin, PssOptions{});
    CHECK(std::abs(pss.period / t_lin - 1.0) < 1e-3);
    CHECK(pss.closure_residual <= 1e-5);
}

TEST_CASE("shooting and detection agree on LC and ring") {
    for (double k : {1.0, 20.0}) {
        const DaeSystem lc = build_lc(0.5e-9, 0.5e-9, k, 1.01);
        const Vector seed = (Vector(2) << 0.2, 0.0).finished();
        const double hint = 3.1416e-9;
        const auto a = find_pss(lc, seed, hint, PssOptions{}, PssMode::Shoot);
        const auto b = find_pss(lc, seed, hint, PssOptions{}, PssMode::Detect);
        CHECK(std::abs(a.period / b.period - 1.0) < 5e-3);
    }
    const DaeSystem ring = build_ring(1.0, 100.0);
    const Vector seed = (Vector(3) << 0.5, -0.3, 0.1).finished();
    const auto a = find_pss(ring, seed, 2.9, PssOptions{}, PssMode::Shoot);
    const auto b = find_pss(ring, seed, 2.9, PssOptions{}, PssMode::Detect);
    CHECK(std::abs(a.period / b.period - 1.0) < 5e-3);
}

TEST_CASE("period converges with the grid") {
    const double t2000 = ring_pss(100.0, 2000).period;
    const double t4000 = ring_pss(100.0, 4000).period;
    CHECK(std::abs(t2000 / t4000 - 1.0) < 1e-3);
    for (double k : {1.0, 20.0}) {
        const DaeSystem lc = build_lc(0.5e-9, 0.5e-9, k, 1.01);
        PssOptions o2, o4;
        o4.steps_per_cycle = 4000;
        const Vector seed = (Vector(2) << 0.2, 0.0).finished();
        const double a = find_pss(lc, seed, 3.1416e-9, o2).period;
        const double b = find_pss(lc, seed, 3.1416e-9, o4).period;
        CHECK(std::abs(a / b - 1.0) < 1e-3);
    }
}

TEST_CASE("a damped tank has no periodic steady state") {
    // a < 1: the small-signal conductance is positive everywhere
    const DaeSystem lc = build_lc(0.5e-9, 0.5e-9, 1.0, 0.9);
    try {
        find_pss(lc, (Vector(2) << 0.2, 0.0).finished(), 3.1416e-9, PssOptions{});
        FAIL("expected no oscillation");
    } catch (const PssError& e) {
        CHECK(e.kind() == PssError::Kind::NoOscillation);
    }
}

TEST_CASE("shooting that collapses onto the equilibrium is rejected") {
    const DaeSystem lc = build_lc(0.5e-9, 0.5e-9, 1.0, 0.9);
    PssOptions opts;
    opts.max_shoot_iter = 60;
    try {
        shoot(lc, (Vector(2) << 0.05, 0.0).finished(), 3.1416e-9, PhaseCondition{1, 0.0}, opts);
        FAIL("expected a PSS error");
    } catch (const PssError& e) {
        CHECK((e.kind() == PssError::Kind::ConstantSolution || e.kind() == PssError::Kind::Diverged ||
               e.kind() == PssError::Kind::Degenerate));
    }
}

TEST_CASE("default spin-torque parameters relax to a fixed point") {
    // Anti-damping from I_s = -0.6 is far below the ~8 needed to destabilise +z.
    const ModelSpec& spec = find_model("stno-spherical");
    const DaeSystem model = spec.build(spec.defaults);
    try {
        find_pss(model, spec.seed(spec.defaults), spec.period_hint(spec.defaults), PssOptions{});
        FAIL("expected no oscillation");
    } catch (const PssError& e) {
        CHECK(e.kind() == PssError::Kind::NoOscillation);
    }
}

TEST_CASE("bad inputs") {
    const DaeSystem lc = build_lc();
    CHECK_THROWS_AS(shoot(lc, Vector::Zero(2), -1.0, PhaseCondition{}, PssOptions{}), Error);
    CHECK_THROWS_AS(shoot(lc, Vector::Zero(3), 1.0, PhaseCondition{}, PssOptions{}), Error);
    CHECK_THROWS_AS(shoot(lc, Vector::Zero(2), 1.0, PhaseCondition{5, 0.0}, PssOptions{}), Error);
    CHECK_THROWS_AS(parse_pss_mode("magic"), Error);
    CHECK(parse_pss_mode("detect") == PssMode::Detect);
}

}
