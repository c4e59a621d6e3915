#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "acscore/ensemble.hpp"
#include "acscore/metrics.hpp"
#include "acscore/sari.hpp"
#include "acscore/trainer.hpp"
#include "acscore/weights.hpp"

namespace acscore {

using json = nlohmann::json;

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view text);

// ---- CSV ---------------------------------------------------------------------

/// Long format: header `origin,horizon,sample,value`, origins, horizons and
/// samples 1-based. The origin column is the 1-based series time of the last
/// observation, i.e. origin_offset + o + 1.
void write_ensemble_csv(std::ostream& out, const ForecastEnsemble& ensemble);
ForecastEnsemble read_ensemble_csv(std::istream& in);

/// M4-style rows: series id, then values V1..VT. Quotes are stripped, a
/// non-numeric first row is treated as a header, and each row is read up to
/// its first empty cell.
std::vector<TimeSeries> read_series_csv(std::istream& in);
std::vector<TimeSeries> read_series_file(const std::filesystem::path& path);
void write_series_csv(std::ostream& out, std::span<const TimeSeries> series);

void write_trace_csv(std::ostream& out, const TrainTrace& trace);

// ---- JSON --------------------------------------------------------------------

void to_json(json& j, const ScoreReport& r);
void to_json(json& j, const DiagnosticsReport& r);

void to_json(json& j, const WeightSpec& w);
void from_json(const json& j, WeightSpec& w);

/// Score config file: {"lambda", "accuracy_weights", "stability_weights"};
/// weights are a kind name or an object with "kind" and shape parameters.
ScoreConfig score_config_from_json(const json& j, int horizon);

/// {p, d, q: 0, P, D, Q: 0, s, phi: [...], Phi: [...], sigma}
json model_to_json(const SariSpec& spec, const SariParams& params);
void model_from_json(const json& j, SariSpec& spec, SariParams& params);
void to_json(json& j, const SariSpec& spec);
void from_json(const json& j, SariSpec& spec);

/// Flat object holding every TrainConfig field. Unknown keys are rejected;
/// missing keys keep their defaults.
void to_json(json& j, const TrainConfig& c);
void from_json(const json& j, TrainConfig& c);

json read_json_file(const std::filesystem::path& path);

}  // namespace acscore
