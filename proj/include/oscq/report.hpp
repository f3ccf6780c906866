#pragma once

#include <ostream>
#include <string>

#include <json.hpp>

#include "oscq/analysis.hpp"
#include "oscq/floquet.hpp"
#include "oscq/pss.hpp"
#include "oscq/transient.hpp"

namespace oscq {

/// printf("%.17g"): enough digits to round-trip any double.
std::string format_double(double value);

void write_waveform_csv(std::ostream& os, const Waveform& wave);
void write_decay_csv(std::ostream& os, const DecayMeasurement& decay);
void write_balance_csv(std::ostream& os, const PowerBalanceCurve& curve);

nlohmann::json complex_json(const Complex& value);
nlohmann::json pss_summary_json(const PeriodicSteadyState& pss);
nlohmann::json monodromy_json(const MonodromyResult& result);
nlohmann::json decay_json(const DecayMeasurement& decay);

} // namespace oscq
