#include "oscq/report.hpp"

#include <cmath>
#include <cstdio>

namespace oscq {

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

void write_waveform_csv(std::ostream& os, const Waveform& wave) {
    os << 't';
    for (const std::string& name : wave.state_names) {
        os << ',' << name;
    }
    os << '\n';
    for (Eigen::Index i = 0; i < wave.size(); ++i) {
        os << format_double(wave.times[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = 0; j < wave.states.cols(); ++j) {
            os << ',' << format_double(wave.states(i, j));
        }
        os << '\n';
    }
}

void write_decay_csv(std::ostream& os, const DecayMeasurement& decay) {
    os << "cycle,deviation\n";
    for (std::size_t i = 0; i < decay.cycle_index.size(); ++i) {
        os << decay.cycle_index[i] << ',' << format_double(decay.deviation[i]) << '\n';
    }
}

void write_balance_csv(std::ostream& os, const PowerBalanceCurve& curve) {
    os << "vmax,p_pos,p_neg\n";
    for (std::size_t i = 0; i < curve.vmax.size(); ++i) {
        os << format_double(curve.vmax[i]) << ',' << format_double(curve.p_pos[i]) << ','
           << format_double(curve.p_neg[i]) << '\n';
    }
}

nlohmann::json complex_json(const Complex& value) {
    return {{"re", value.real()}, {"im", value.imag()}, {"modulus", std::abs(value)}};
}

nlohmann::json pss_summary_json(const PeriodicSteadyState& pss) {
    return {{"period", pss.period},
            {"closure_residual", pss.closure_residual},
            {"grid_points", pss.steps + 1},
            {"orbit_scale", pss.orbit_scale},
            {"mode", pss.mode},
            {"method", to_string(pss.method)},
            {"anchor_index", pss.phase.anchor_index},
            {"anchor_value", pss.phase.anchor_value},
            {"iterations", pss.iterations},
            {"warnings", pss.warnings}};
}

nlohmann::json monodromy_json(const MonodromyResult& result) {
    nlohmann::json multipliers = nlohmann::json::array();
    for (const Complex& m : result.multipliers) {
        multipliers.push_back(complex_json(m));
    }
    nlohmann::json exponents = nlohmann::json::array();
    for (const Complex& mu : result.q_report.floquet_exponents) {
        exponents.push_back({{"re", mu.real()}, {"im", mu.imag()}});
    }
    nlohmann::json out = {{"period", result.period},
                          {"multipliers", multipliers},
                          {"n_unit", result.n_unit},
                          {"unit_tol", result.unit_tol},
                          {"lambda2", complex_json(result.lambda2)},
                          {"lambda2_modulus", result.q_report.lambda2_modulus},
                          {"verdict", to_string(result.q_report.verdict)},
                          {"floquet_exponents", exponents}};
    out["q"] = result.q_report.q_value ? nlohmann::json(*result.q_report.q_value) : nlohmann::json();
    return out;
}

nlohmann::json decay_json(const DecayMeasurement& decay) {
    return {{"fitted_ratio", decay.fitted_ratio},
            {"empirical_q", std::isfinite(decay.empirical_q) ? nlohmann::json(decay.empirical_q)
                                                             : nlohmann::json()},
            {"used_cycles", decay.used_cycles},
            {"noise_floor", decay.noise_floor},
            {"grid_phase", decay.grid_phase},
            {"reference_shift", decay.reference_shift},
            {"non_decaying", decay.non_decaying}};
}

} // namespace oscq
