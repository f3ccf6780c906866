// oscq: oscillator amplitude-stability analysis from the command line.
//
// Exit codes: 0 ok (Finite or Infinite verdict), 1 usage or parameter error,
// 2 no oscillation, 3 PSS or integration failure, 4 eigen solver failure,
// 5 unstable orbit.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "oscq/analysis.hpp"
#include "oscq/errors.hpp"
#include "oscq/floquet.hpp"
#include "oscq/models.hpp"
#include "oscq/pss.hpp"
#include "oscq/report.hpp"
#include "oscq/transient.hpp"

using json = nlohmann::json;
using namespace oscq;

namespace {

enum Exit { kOk = 0, kUsage = 1, kNoOscillation = 2, kPssFailure = 3, kEigenFailure = 4, kUnstable = 5 };

struct Settings {
    std::string model;
    std::vector<std::string> sets;
    std::string method = "trap";
    int steps_per_cycle = 2000;
    std::string pss_mode = "auto";
    double unit_tol = 1e-4;
    double eps = 1e-3;
    int cycles = -1; // per-command default
    std::uint64_t seed = 0;
    std::string out;
    bool json_out = false;
    std::string sweep;
    int jobs = 1;
    std::string x0;
    double warmup = 20.0;
    std::string direction = "lambda2";
    double noise_floor = 1e-12;
};

struct Failure {
    int code;
    std::string message;
};

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        out.push_back(parse_assignment("v=" + item).second);
    }
    return out;
}

ParameterSet apply_sets(const ParameterSet& base, const std::vector<std::string>& sets) {
    std::vector<std::pair<std::string, double>> overrides;
    for (const std::string& s : sets) {
        overrides.push_back(parse_assignment(s));
    }
    return base.with(overrides);
}

ParameterSet resolve_params(const ModelSpec& spec, const std::vector<std::string>& sets) {
    return apply_sets(spec.defaults, sets);
}

json params_json(const ParameterSet& p) {
    json out = json::object();
    for (const auto& [name, value] : p.entries()) {
        out[name] = value;
    }
    return out;
}

PssOptions pss_options(const Settings& s) {
    PssOptions opts;
    opts.integrator.method = parse_method(s.method);
    opts.steps_per_cycle = s.steps_per_cycle;
    opts.warmup_periods = s.warmup;
    return opts;
}

int code_for(const Verdict v) {
    switch (v) {
    case Verdict::Finite:
    case Verdict::Infinite: return kOk;
    case Verdict::Unstable: return kUnstable;
    default: return kNoOscillation;
    }
}

/// Maps a library exception to an exit code; rethrows nothing.
Failure classify(const std::exception& e) {
    if (const auto* p = dynamic_cast<const PssError*>(&e)) {
        return {p->kind() == PssError::Kind::NoOscillation ? kNoOscillation : kPssFailure, e.what()};
    }
    if (dynamic_cast<const EigenError*>(&e)) return {kEigenFailure, e.what()};
    if (dynamic_cast<const ParameterError*>(&e)) return {kUsage, e.what()};
    if (dynamic_cast<const StepFailure*>(&e) || dynamic_cast<const SingularMatrixError*>(&e) ||
        dynamic_cast<const ModelDomainError*>(&e)) {
        return {kPssFailure, e.what()};
    }
    return {kUsage, e.what()};
}

struct QRun {
    json report;
    int code = kOk;
    DaeSystem model;
    PeriodicSteadyState pss;
    MonodromyResult mono;
};

QRun run_q(const ModelSpec& spec, const ParameterSet& params, const Settings& s) {
    const PssOptions opts = pss_options(s);
    DaeSystem model = spec.build(params);
    PeriodicSteadyState pss =
        find_pss(model, spec.seed(params), spec.period_hint(params), opts, parse_pss_mode(s.pss_mode));
    MonodromyResult mono = analyze_monodromy(model, pss, s.unit_tol);

    json report = monodromy_json(mono);
    report["model"] = spec.name;
    report["params"] = params_json(params);
    report["grid"] = {{"method", to_string(pss.method)},
                      {"steps_per_cycle", pss.steps},
                      {"grid_points", pss.steps + 1},
                      {"pss_mode", pss.mode}};
    report["tolerances"] = {{"unit_tol", s.unit_tol},
                            {"newton_tol", opts.integrator.newton_tol},
                            {"closure_tol", opts.closure_tol},
                            {"closure_residual", pss.closure_residual}};
    report["warnings"] = pss.warnings;
    const int code = code_for(mono.q_report.verdict);
    return {std::move(report), code, std::move(model), std::move(pss), std::move(mono)};
}

void write_file(const std::string& path, const std::function<void(std::ostream&)>& body) {
    std::ofstream os(path);
    if (!os) {
        throw Error("cannot open " + path + " for writing");
    }
    body(os);
}

int cmd_list(const Settings& s) {
    if (s.json_out) {
        json out = json::array();
        for (const ModelSpec& m : model_registry()) {
            out.push_back({{"name", m.name}, {"summary", m.summary}, {"params", params_json(m.defaults)}});
        }
        std::cout << out.dump(2) << '\n';
        return kOk;
    }
    for (const ModelSpec& m : model_registry()) {
        std::cout << m.name << "  " << m.summary << '\n';
        for (const auto& [name, value] : m.defaults.entries()) {
            std::cout << "    " << name << " = " << json(value).dump() << '\n';
        }
    }
    return kOk;
}

int cmd_tran(const Settings& s) {
    const ModelSpec& spec = find_model(s.model);
    const ParameterSet params = resolve_params(spec, s.sets);
    const DaeSystem model = spec.build(params);
    Vector x0 = spec.seed(params);
    if (!s.x0.empty()) {
        const std::vector<double> values = parse_list(s.x0);
        if (static_cast<int>(values.size()) != model.size()) {
            throw ParameterError("--x0 needs " + std::to_string(model.size()) + " values");
        }
        x0 = Eigen::Map<const Vector>(values.data(), model.size());
    }
    spec.check_initial_state(x0);
    const int cycles = s.cycles > 0 ? s.cycles : 10;
    const double hint = spec.period_hint(params);
    IntegratorConfig cfg = IntegratorConfig::per_cycle(hint, s.steps_per_cycle, parse_method(s.method));
    Waveform wave = integrate_steps(model, x0, 0.0, cfg.step, static_cast<long>(cycles) * s.steps_per_cycle, cfg);
    wave.model_id = model.id();
    wave.state_names = model.state_names();
    if (s.out.empty()) {
        write_waveform_csv(std::cout, wave);
    } else {
        write_file(s.out, [&](std::ostream& os) { write_waveform_csv(os, wave); });
    }
    return kOk;
}

int cmd_pss(const Settings& s) {
    const ModelSpec& spec = find_model(s.model);
    const ParameterSet params = resolve_params(spec, s.sets);
    const DaeSystem model = spec.build(params);
    const PeriodicSteadyState pss = find_pss(model, spec.seed(params), spec.period_hint(params),
                                             pss_options(s), parse_pss_mode(s.pss_mode));
    json out = pss_summary_json(pss);
    out["model"] = spec.name;
    out["params"] = params_json(params);
    if (!s.out.empty()) {
        const Waveform wave = pss.waveform(model.id(), model.state_names());
        write_file(s.out, [&](std::ostream& os) { write_waveform_csv(os, wave); });
    }
    std::cout << out.dump(2) << '\n';
    return kOk;
}

std::pair<std::string, std::vector<double>> parse_sweep(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ParameterError("--sweep expects name=v1,v2,...");
    }
    return {text.substr(0, eq), parse_list(text.substr(eq + 1))};
}

int cmd_q(const Settings& s) {
    const ModelSpec& spec = find_model(s.model);
    const ParameterSet params = resolve_params(spec, s.sets);
    if (s.sweep.empty()) {
        QRun run = run_q(spec, params, s);
        if (!s.out.empty()) {
            const Waveform wave = run.pss.waveform(run.model.id(), run.model.state_names());
            write_file(s.out, [&](std::ostream& os) { write_waveform_csv(os, wave); });
        }
        std::cout << run.report.dump(2) << '\n';
        return run.code;
    }

    const auto [name, values] = parse_sweep(s.sweep);
    std::vector<ParameterSet> points;
    for (double v : values) {
        points.push_back(params.with({{name, v}}));
    }
    std::vector<json> reports(points.size());
    std::vector<int> codes(points.size(), kOk);
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next++; i < points.size(); i = next++) {
            try {
                QRun run = run_q(spec, points[i], s);
                reports[i] = std::move(run.report);
                codes[i] = run.code;
            } catch (const std::exception& e) {
                const Failure f = classify(e);
                reports[i] = {{"model", spec.name}, {"params", params_json(points[i])}, {"error", f.message}};
                codes[i] = f.code;
            }
        }
    };
    const int jobs = std::clamp(s.jobs, 1, static_cast<int>(points.size()));
    std::vector<std::thread> pool;
    for (int k = 1; k < jobs; ++k) {
        pool.emplace_back(worker);
    }
    worker();
    for (std::thread& t : pool) {
        t.join();
    }
    std::cout << json(reports).dump(2) << '\n';
    for (int c : codes) {
        if (c != kOk) return c;
    }
    return kOk;
}

int cmd_perturb(const Settings& s) {
    const ModelSpec& spec = find_model(s.model);
    const ParameterSet params = resolve_params(spec, s.sets);
    QRun run = run_q(spec, params, s);

    PerturbDirection dir;
    if (s.direction == "lambda2") {
        dir = PerturbDirection::lambda2();
    } else if (s.direction == "random") {
        dir = PerturbDirection::random(s.seed);
    } else {
        throw ParameterError("--direction must be lambda2 or random");
    }
    PerturbOptions popts;
    popts.eps = s.eps;
    popts.cycles = s.cycles > 0 ? s.cycles : 20;
    popts.noise_floor_rel = s.noise_floor;
    IntegratorConfig cfg;
    cfg.method = run.pss.method;
    const DecayMeasurement decay = perturb_and_measure(run.model, run.pss, dir, popts, cfg);
    if (!s.out.empty()) {
        write_file(s.out, [&](std::ostream& os) { write_decay_csv(os, decay); });
    }
    const double l2 = run.mono.q_report.lambda2_modulus;
    json out = decay_json(decay);
    out["model"] = spec.name;
    out["params"] = params_json(params);
    out["eps"] = popts.eps;
    out["cycles"] = popts.cycles;
    out["direction"] = s.direction;
    out["seed"] = s.seed;
    out["lambda2_modulus"] = l2;
    out["verdict"] = to_string(run.mono.q_report.verdict);
    out["relative_gap"] = l2 > 0.0 ? std::abs(decay.fitted_ratio - l2) / l2 : 0.0;
    if (decay.non_decaying) {
        out["note"] = "non-decaying";
    }
    std::cout << out.dump(2) << '\n';
    return kOk;
}

int cmd_balance(const Settings& s, double vmin, double vmax, int points, double omega) {
    const ParameterSet p = apply_sets(ParameterSet{{"K", 1.0}, {"a", 2.0}}, s.sets);
    if (!(vmin > 0.0) || !(vmax > vmin) || points < 2) {
        throw ParameterError("balance grid needs 0 < vmin < vmax and at least 2 points");
    }
    std::vector<double> grid(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
        grid[static_cast<std::size_t>(i)] = vmin + (vmax - vmin) * i / (points - 1);
    }
    const PowerBalanceCurve curve = power_balance_curve(p.get("K"), p.get("a"), omega, grid);
    if (!s.out.empty()) {
        write_file(s.out, [&](std::ostream& os) { write_balance_csv(os, curve); });
    }
    json out = {{"K", p.get("K")},
                {"a", p.get("a")},
                {"omega", omega},
                {"intersection_vmax", curve.intersection_vmax},
                {"slope_pos", curve.slope_pos},
                {"slope_neg", curve.slope_neg},
                {"gamma_deg", curve.gamma_deg},
                {"theta_deg", curve.theta_deg}};
    std::cout << out.dump(2) << '\n';
    return kOk;
}

int cmd_resonator(const Settings& s, const std::string& zetas) {
    json rows = json::array();
    std::ostringstream csv;
    csv << "zeta,ql1,ql2,gap\n";
    for (double z : parse_list(zetas)) {
        rows.push_back({{"zeta", z}, {"ql1", ql1(z)}, {"ql2", ql2(z)}, {"gap", equivalence_gap(z)}});
        csv << format_double(z) << ',' << format_double(ql1(z)) << ',' << format_double(ql2(z)) << ','
            << format_double(equivalence_gap(z)) << '\n';
    }
    if (!s.out.empty()) {
        write_file(s.out, [&](std::ostream& os) { os << csv.str(); });
    }
    std::cout << rows.dump(2) << '\n';
    return kOk;
}

void add_model_flags(CLI::App* cmd, Settings& s) {
    cmd->add_option("--model", s.model, "model name (see `oscq list`)")->required();
    cmd->add_option("--set", s.sets, "parameter override name=value (repeatable)");
    cmd->add_option("--method", s.method, "trap or be");
    cmd->add_option("--steps-per-cycle", s.steps_per_cycle, "fixed steps per period")
        ->check(CLI::PositiveNumber);
}

void add_pss_flags(CLI::App* cmd, Settings& s) {
    cmd->add_option("--pss-mode", s.pss_mode, "auto, shoot or detect");
    cmd->add_option("--warmup", s.warmup, "warmup length in estimated periods");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"oscq: periodic steady state, Floquet multipliers and Q of oscillators"};
    app.require_subcommand(1);
    Settings s;

    auto* list = app.add_subcommand("list", "list models and default parameters");
    list->add_flag("--json", s.json_out, "machine-readable output");

    auto* tran = app.add_subcommand("tran", "transient waveform as CSV");
    add_model_flags(tran, s);
    tran->add_option("--cycles", s.cycles, "length in estimated periods (default 10)");
    tran->add_option("--x0", s.x0, "initial state, comma separated");
    tran->add_option("--out", s.out, "CSV path (default stdout)");

    auto* pss = app.add_subcommand("pss", "periodic steady state summary");
    add_model_flags(pss, s);
    add_pss_flags(pss, s);
    pss->add_option("--out", s.out, "orbit CSV path");

    auto* q = app.add_subcommand("q", "Floquet multipliers and Q report");
    add_model_flags(q, s);
    add_pss_flags(q, s);
    q->add_option("--unit-tol", s.unit_tol, "tolerance for |lambda| = 1");
    q->add_option("--sweep", s.sweep, "parameter sweep name=v1,v2,...");
    q->add_option("--jobs", s.jobs, "parallel sweep workers")->check(CLI::PositiveNumber);
    q->add_option("--out", s.out, "orbit CSV path");

    auto* perturb = app.add_subcommand("perturb", "perturbation decay versus |lambda2|");
    add_model_flags(perturb, s);
    add_pss_flags(perturb, s);
    perturb->add_option("--unit-tol", s.unit_tol, "tolerance for |lambda| = 1");
    perturb->add_option("--eps", s.eps, "perturbation size relative to the orbit swing");
    perturb->add_option("--cycles", s.cycles, "cycles to follow (default 20)");
    perturb->add_option("--direction", s.direction, "lambda2 or random");
    perturb->add_option("--seed", s.seed, "seed for random directions");
    perturb->add_option("--noise-floor", s.noise_floor, "fit floor relative to the orbit swing");
    perturb->add_option("--out", s.out, "decay CSV path");

    double vmin = 0.01, vmax = 2.0, omega = 2e9;
    int points = 200;
    auto* balance = app.add_subcommand("balance", "power balance of the LC conductor halves");
    balance->add_option("--set", s.sets, "K=... or a=...");
    balance->add_option("--vmin", vmin);
    balance->add_option("--vmax", vmax);
    balance->add_option("--points", points);
    balance->add_option("--omega", omega, "angular frequency (time base only)");
    balance->add_option("--out", s.out, "CSV path");

    std::string zetas = "0.05,0.02,0.01,0.005";
    auto* resonator = app.add_subcommand("resonator", "linear resonator Q_l1, Q_l2 table");
    resonator->add_option("--zeta", zetas, "damping ratios, comma separated");
    resonator->add_option("--out", s.out, "CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return kUsage;
    }

    try {
        if (list->parsed()) return cmd_list(s);
        if (tran->parsed()) return cmd_tran(s);
        if (pss->parsed()) return cmd_pss(s);
        if (q->parsed()) return cmd_q(s);
        if (perturb->parsed()) return cmd_perturb(s);
        if (balance->parsed()) return cmd_balance(s, vmin, vmax, points, omega);
        if (resonator->parsed()) return cmd_resonator(s, zetas);
    } catch (const std::exception& e) {
        const Failure f = classify(e);
        std::cerr << "oscq: " << f.message << '\n';
        return f.code;
    }
    return kUsage;
}
