#include "acscore/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace acscore {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '\n')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r' || s[e - 1] == '\n')) --e;
  std::string out(s.substr(b, e - b));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
      cell.push_back(c);
    } else if (c == ',' && !quoted) {
      cells.push_back(trim(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  cells.push_back(trim(cell));
  return cells;
}

bool try_parse_double(std::string_view text, double& out) {
  if (text.empty()) return false;
  const char* first = text.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

std::size_t parse_index(const std::string& text, std::size_t line) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || v == 0) {
    throw std::runtime_error("ensemble csv: line " + std::to_string(line) + ": bad 1-based index '" + text + "'");
  }
  return v;
}

json nan_to_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  double v = 0.0;
  const std::string t = trim(text);
  if (t == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (t == "inf") return std::numeric_limits<double>::infinity();
  if (t == "-inf") return -std::numeric_limits<double>::infinity();
  if (!try_parse_double(t, v)) throw std::runtime_error("not a number: '" + t + "'");
  return v;
}

// ---- CSV ---------------------------------------------------------------------

void write_ensemble_csv(std::ostream& out, const ForecastEnsemble& e) {
  out << "origin,horizon,sample,value\n";
  for (std::size_t o = 0; o < e.origins(); ++o) {
    for (std::size_t s = 0; s < e.horizon(); ++s) {
      for (std::size_t i = 0; i < e.samples(); ++i) {
        out << e.origin_offset() + o + 1 << ',' << s + 1 << ',' << i + 1 << ',' << format_double(e.at(o, s, i))
            << '\n';
      }
    }
  }
}

ForecastEnsemble read_ensemble_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("ensemble csv: empty input");
  const auto header = split_csv_line(line);
  if (header != std::vector<std::string>{"origin", "horizon", "sample", "value"}) {
    throw std::runtime_error("ensemble csv: expected header origin,horizon,sample,value");
  }
  struct Row {
    std::size_t origin, horizon, sample;
    double value;
  };
  std::vector<Row> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 4) throw std::runtime_error("ensemble csv: line " + std::to_string(lineno) + ": need 4 fields");
    double v = 0.0;
    try {
      v = parse_double(cells[3]);
    } catch (const std::exception&) {
      throw std::runtime_error("ensemble csv: line " + std::to_string(lineno) + ": bad value '" + cells[3] + "'");
    }
    rows.push_back({parse_index(cells[0], lineno), parse_index(cells[1], lineno), parse_index(cells[2], lineno), v});
  }
  if (rows.empty()) throw std::runtime_error("ensemble csv: no cells");
  std::size_t o_min = rows[0].origin, o_max = 0, m = 0, k = 0;
  for (const auto& r : rows) {
    o_min = std::min(o_min, r.origin);
    o_max = std::max(o_max, r.origin);
    m = std::max(m, r.horizon);
    k = std::max(k, r.sample);
  }
  const std::size_t n = o_max - o_min + 1;
  if (rows.size() != n * m * k) {
    throw std::runtime_error("ensemble csv: expected " + std::to_string(n * m * k) + " cells, found " +
                             std::to_string(rows.size()));
  }
  ForecastEnsemble e(n, m, k, o_min - 1);
  std::vector<char> seen(n * m * k, 0);
  for (const auto& r : rows) {
    const std::size_t o = r.origin - o_min;
    const std::size_t idx = (o * m + r.horizon - 1) * k + r.sample - 1;
    if (seen[idx]) throw std::runtime_error("ensemble csv: duplicate cell");
    seen[idx] = 1;
    e.at(o, r.horizon - 1, r.sample - 1) = r.value;
  }
  return e;
}

std::vector<TimeSeries> read_series_csv(std::istream& in) {
  std::vector<TimeSeries> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.empty() || cells[0].empty()) {
      throw std::runtime_error("series csv: line " + std::to_string(lineno) + ": missing series id");
    }
    double probe = 0.0;
    if (out.empty() && lineno == 1 && cells.size() > 1 && !cells[1].empty() && !try_parse_double(cells[1], probe)) {
      continue;  // header row
    }
    TimeSeries ts;
    ts.id = cells[0];
    for (std::size_t c = 1; c < cells.size(); ++c) {
      if (cells[c].empty()) break;
      double v = 0.0;
      if (!try_parse_double(cells[c], v) || !std::isfinite(v)) {
        throw std::runtime_error("series csv: line " + std::to_string(lineno) + ": bad value '" + cells[c] + "'");
      }
      ts.values.push_back(v);
    }
    if (ts.values.empty()) throw std::runtime_error("series csv: series '" + ts.id + "' is empty");
    out.push_back(std::move(ts));
  }
  return out;
}

std::vector<TimeSeries> read_series_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_series_csv(in);
}

void write_series_csv(std::ostream& out, std::span<const TimeSeries> series) {
  std::size_t width = 0;
  for (const auto& s : series) width = std::max(width, s.values.size());
  out << "id";
  for (std::size_t i = 1; i <= width; ++i) out << ",V" << i;
  out << '\n';
  for (const auto& s : series) {
    out << s.id;
    for (double v : s.values) out << ',' << format_double(v);
    for (std::size_t i = s.values.size(); i < width; ++i) out << ',';
    out << '\n';
  }
}

void write_trace_csv(std::ostream& out, const TrainTrace& trace) {
  out << "epoch,loss,lr\n";
  for (std::size_t i = 0; i < trace.loss.size(); ++i) {
    out << i + 1 << ',' << format_double(trace.loss[i]) << ',' << format_double(trace.lr[i]) << '\n';
  }
}

// ---- JSON --------------------------------------------------------------------

void to_json(json& j, const ScoreReport& r) {
  j = json{{"accuracy", r.accuracy},
           {"stability", r.stability},
           {"ac_score", r.ac_score},
           {"lambda", r.lambda},
           {"per_origin_energy_scores", r.per_origin_energy_scores},
           {"per_pair_energy_distances", r.per_pair_energy_distances}};
}

void to_json(json& j, const DiagnosticsReport& r) {
  json mape = json::array();
  for (double v : r.per_horizon_mape) mape.push_back(nan_to_null(v));
  j = json{{"mean_vertical_variance", r.mean_vertical_variance},
           {"vertical_variance_targets", r.vertical_variance_targets},
           {"per_horizon_mape", mape},
           {"mape_excluded_cells", r.mape_excluded_cells},
           {"one_step_mape", nan_to_null(r.one_step_mape)}};
}

void to_json(json& j, const WeightSpec& w) {
  j = json{{"kind", std::string(to_string(w.kind))}};
  switch (w.kind) {
    case WeightKind::linear: j["floor"] = w.params.floor; break;
    case WeightKind::exponential: j["alpha"] = w.params.alpha; break;
    case WeightKind::hyperbolic: j["beta"] = w.params.beta; break;
    case WeightKind::inverse_variance: j["variances"] = w.params.variances; break;
    case WeightKind::piecewise:
      j["breaks"] = w.params.breaks;
      j["levels"] = w.params.levels;
      break;
    case WeightKind::uniform: break;
  }
}

void from_json(const json& j, WeightSpec& w) {
  w = WeightSpec{};
  if (j.is_string()) {
    w.kind = parse_weight_kind(j.get<std::string>());
    return;
  }
  if (!j.is_object() || !j.contains("kind")) throw std::invalid_argument("weights: expected a kind name or object");
  static const std::set<std::string> known{"kind", "alpha", "beta", "floor", "variances", "breaks", "levels"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw std::invalid_argument("weights: unknown key '" + key + "'");
  }
  w.kind = parse_weight_kind(j.at("kind").get<std::string>());
  if (j.contains("alpha")) w.params.alpha = j.at("alpha").get<double>();
  if (j.contains("beta")) w.params.beta = j.at("beta").get<double>();
  if (j.contains("floor")) w.params.floor = j.at("floor").get<double>();
  if (j.contains("variances")) w.params.variances = j.at("variances").get<std::vector<double>>();
  if (j.contains("breaks")) w.params.breaks = j.at("breaks").get<std::vector<int>>();
  if (j.contains("levels")) w.params.levels = j.at("levels").get<std::vector<double>>();
}

ScoreConfig score_config_from_json(const json& j, int horizon) {
  static const std::set<std::string> known{"lambda", "accuracy_weights", "stability_weights"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw std::invalid_argument("score config: unknown key '" + key + "'");
  }
  ScoreConfig c;
  c.lambda = j.value("lambda", 0.5);
  const WeightSpec acc = j.contains("accuracy_weights") ? j.at("accuracy_weights").get<WeightSpec>() : WeightSpec{};
  c.accuracy_weights = acc.build(horizon);
  if (j.contains("stability_weights")) c.stability_weights = j.at("stability_weights").get<WeightSpec>().build(horizon);
  c.validate();
  return c;
}

void to_json(json& j, const SariSpec& s) {
  j = json{{"p", s.p}, {"d", s.d}, {"q", 0}, {"P", s.P}, {"D", s.D}, {"Q", 0}, {"s", s.s}};
}

void from_json(const json& j, SariSpec& s) {
  s.p = j.value("p", 0);
  s.d = j.value("d", 0);
  s.P = j.value("P", 0);
  s.D = j.value("D", 0);
  s.s = j.value("s", 1);
  if (j.value("q", 0) != 0 || j.value("Q", 0) != 0) {
    throw std::invalid_argument("model: moving-average orders are not supported");
  }
  s.validate();
}

json model_to_json(const SariSpec& spec, const SariParams& params) {
  json j = spec;
  j["phi"] = params.phi;
  j["Phi"] = params.Phi;
  j["sigma"] = params.sigma;
  return j;
}

void model_from_json(const json& j, SariSpec& spec, SariParams& params) {
  spec = j.get<SariSpec>();
  params.phi = j.value("phi", std::vector<double>{});
  params.Phi = j.value("Phi", std::vector<double>{});
  params.sigma = j.value("sigma", 0.0);
  params.check(spec);
}

void to_json(json& j, const TrainConfig& c) {
  j = json{{"horizon", c.horizon},
           {"lambda", c.lambda},
           {"accuracy_weights", c.accuracy_weights},
           {"batch_size", c.batch_size},
           {"full_batch", c.full_batch},
           {"lr0", c.lr0},
           {"scheduler_factor", c.scheduler_factor},
           {"scheduler_patience", c.scheduler_patience},
           {"max_epochs", c.max_epochs},
           {"seed", c.seed},
           {"init_low", c.init_low},
           {"init_high", c.init_high},
           {"min_lr", c.min_lr},
           {"convergence_tol", c.convergence_tol},
           {"adamw_beta1", c.adamw.beta1},
           {"adamw_beta2", c.adamw.beta2},
           {"adamw_eps", c.adamw.eps},
           {"weight_decay", c.adamw.weight_decay},
           {"sample_count", c.sample_count},
           {"sample_sigma", c.sample_sigma},
           {"time_budget_seconds", c.time_budget_seconds}};
  if (c.stability_weights) j["stability_weights"] = *c.stability_weights;
}

void from_json(const json& j, TrainConfig& c) {
  if (!j.is_object()) throw std::invalid_argument("train config: expected an object");
  c = TrainConfig{};
  for (const auto& [key, v] : j.items()) {
    if (key == "horizon") c.horizon = v.get<int>();
    else if (key == "lambda") c.lambda = v.get<double>();
    else if (key == "accuracy_weights") c.accuracy_weights = v.get<WeightSpec>();
    else if (key == "stability_weights") c.stability_weights = v.get<WeightSpec>();
    else if (key == "batch_size") c.batch_size = v.get<int>();
    else if (key == "full_batch") c.full_batch = v.get<bool>();
    else if (key == "lr0") c.lr0 = v.get<double>();
    else if (key == "scheduler_factor") c.scheduler_factor = v.get<double>();
    else if (key == "scheduler_patience") c.scheduler_patience = v.get<int>();
    else if (key == "max_epochs") c.max_epochs = v.get<int>();
    else if (key == "seed") c.seed = v.get<std::uint64_t>();
    else if (key == "init_low") c.init_low = v.get<double>();
    else if (key == "init_high") c.init_high = v.get<double>();
    else if (key == "min_lr") c.min_lr = v.get<double>();
    else if (key == "convergence_tol") c.convergence_tol = v.get<double>();
    else if (key == "adamw_beta1") c.adamw.beta1 = v.get<double>();
    else if (key == "adamw_beta2") c.adamw.beta2 = v.get<double>();
    else if (key == "adamw_eps") c.adamw.eps = v.get<double>();
    else if (key == "weight_decay") c.adamw.weight_decay = v.get<double>();
    else if (key == "sample_count") c.sample_count = v.get<int>();
    else if (key == "sample_sigma") c.sample_sigma = v.get<double>();
    else if (key == "time_budget_seconds") c.time_budget_seconds = v.get<double>();
    else throw std::invalid_argument("train config: unknown key '" + key + "'");
  }
  c.validate();
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace acscore
