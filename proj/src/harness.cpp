#include "acscore/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <stdexcept>

#include <omp.h>

namespace acscore {

// ---- data ----------------------------------------------------------------------

std::vector<TimeSeries> load_m4_hourly(const std::filesystem::path& path) {
  std::filesystem::path file = path;
  if (std::filesystem::is_directory(path)) file = path / "Hourly-train.csv";
  if (!std::filesystem::exists(file)) throw std::runtime_error("M4 hourly data not found at " + file.string());
  return read_series_file(file);
}

std::vector<TimeSeries> synth_dgp(const DgpSpec& dgp) {
  dgp.spec.validate();
  dgp.params.check(dgp.spec);
  if (!(dgp.params.sigma >= 0.0)) throw std::invalid_argument("synth: sigma must be >= 0");
  if (!stationarity_check(dgp.spec, dgp.params).stationary) {
    throw std::invalid_argument("synth: AR parameters are not stationary on the differenced scale");
  }
  const std::size_t K = dgp.spec.diff_order();
  if (dgp.length <= K) throw std::invalid_argument("synth: length must exceed the differencing order");

  const auto lags = expand_lags<double>(dgp.spec, dgp.params.phi, dgp.params.Phi);
  // expand_lags gives the coefficients of 1 - (1 - a(L))(1 - b(L^s)); negating
  // the inputs turns that into (1 + theta(L))(1 + Theta(L^s)) - 1.
  SariSpec ma_spec{static_cast<int>(dgp.theta.size()), 0, static_cast<int>(dgp.Theta.size()), 0, dgp.spec.s};
  if (!dgp.Theta.empty() && ma_spec.s < 2) throw std::invalid_argument("synth: seasonal MA needs s >= 2");
  std::vector<double> neg_theta, neg_Theta;
  for (double v : dgp.theta) neg_theta.push_back(-v);
  for (double v : dgp.Theta) neg_Theta.push_back(-v);
  auto ma = expand_lags<double>(ma_spec, neg_theta, neg_Theta);
  for (auto& term : ma) term.coef = -term.coef;
  RestorationState state{dgp.spec.d, dgp.spec.D, dgp.spec.s, {}};
  for (std::size_t t = 0; t < K; ++t) {
    state.anchor.push_back(dgp.level + dgp.seasonal_amplitude *
                                           std::sin(2.0 * std::numbers::pi * static_cast<double>(t) /
                                                    static_cast<double>(dgp.spec.s)));
  }

  std::vector<TimeSeries> out;
  out.reserve(dgp.count);
  const std::size_t n = dgp.burn_in + dgp.length - K;
  for (std::size_t r = 0; r < dgp.count; ++r) {
    std::mt19937_64 rng(derive_seed(dgp.seed, r));
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> e(n), w(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
      e[t] = dgp.params.sigma * gauss(rng);
      double acc = e[t];
      for (const auto& term : ma) {
        if (term.lag <= t) acc += term.coef * e[t - term.lag];
      }
      for (const auto& term : lags) {
        if (term.lag <= t) acc += term.coef * w[t - term.lag];
      }
      w[t] = acc;
    }
    const std::span<const double> kept(w.data() + dgp.burn_in, n - dgp.burn_in);
    TimeSeries ts;
    ts.id = dgp.id_prefix + std::to_string(r + 1);
    ts.values = state.anchor;
    const auto tail = integrate(kept, state);
    ts.values.insert(ts.values.end(), tail.begin(), tail.end());
    out.push_back(std::move(ts));
  }
  return out;
}

void to_json(json& j, const DgpSpec& d) {
  j = model_to_json(d.spec, d.params);
  j["length"] = d.length;
  j["seed"] = d.seed;
  j["count"] = d.count;
  j["level"] = d.level;
  j["seasonal_amplitude"] = d.seasonal_amplitude;
  j["burn_in"] = d.burn_in;
  j["id_prefix"] = d.id_prefix;
  if (!d.theta.empty()) j["theta"] = d.theta;
  if (!d.Theta.empty()) j["Theta"] = d.Theta;
}

void from_json(const json& j, DgpSpec& d) {
  d = DgpSpec{};
  json model = json::object();
  for (const auto& [key, v] : j.items()) {
    if (key == "length") d.length = v.get<std::size_t>();
    else if (key == "seed") d.seed = v.get<std::uint64_t>();
    else if (key == "count") d.count = v.get<std::size_t>();
    else if (key == "level") d.level = v.get<double>();
    else if (key == "seasonal_amplitude") d.seasonal_amplitude = v.get<double>();
    else if (key == "burn_in") d.burn_in = v.get<std::size_t>();
    else if (key == "id_prefix") d.id_prefix = v.get<std::string>();
    else if (key == "theta") d.theta = v.get<std::vector<double>>();
    else if (key == "Theta") d.Theta = v.get<std::vector<double>>();
    else if (key == "p" || key == "d" || key == "q" || key == "P" || key == "D" || key == "Q" || key == "s" ||
             key == "phi" || key == "Phi" || key == "sigma")
      model[key] = v;
    else throw std::invalid_argument("dgp: unknown key '" + key + "'");
  }
  model_from_json(model, d.spec, d.params);
}

// ---- config ------------------------------------------------------------------------

void ExperimentConfig::validate() const {
  if (data_path.has_value() == synthetic.has_value()) {
    throw std::invalid_argument("experiment: give exactly one of \"data\" or \"synthetic\"");
  }
  train.validate();
  if (fixed_spec) fixed_spec->validate();
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
    throw std::invalid_argument("experiment: split_fraction must lie in (0, 1)");
  }
  if (!(series_timeout_seconds >= 0.0)) throw std::invalid_argument("experiment: series_timeout_seconds must be >= 0");
  if (workers < 0) throw std::invalid_argument("experiment: workers must be >= 0");
}

namespace {

CssSettings css_from_json(const json& j) {
  CssSettings c;
  for (const auto& [key, v] : j.items()) {
    if (key == "max_epochs") c.max_epochs = v.get<int>();
    else if (key == "lr") c.lr = v.get<double>();
    else if (key == "min_lr") c.min_lr = v.get<double>();
    else if (key == "tolerance") c.tolerance = v.get<double>();
    else throw std::invalid_argument("css: unknown key '" + key + "'");
  }
  return c;
}

OrderGrid grid_from_json(const json& j) {
  OrderGrid g;
  for (const auto& [key, v] : j.items()) {
    if (key == "p_max") g.p_max = v.get<int>();
    else if (key == "d_max") g.d_max = v.get<int>();
    else if (key == "P_max") g.P_max = v.get<int>();
    else if (key == "D_max") g.D_max = v.get<int>();
    else if (key == "periods") g.periods = v.get<std::vector<int>>();
    else throw std::invalid_argument("grid: unknown key '" + key + "'");
  }
  return g;
}

}  // namespace

ExperimentConfig experiment_config_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw std::invalid_argument("experiment: expected a JSON object");
  ExperimentConfig c;
  std::optional<std::uint64_t> seed;
  for (const auto& [key, v] : j.items()) {
    if (key == "data") {
      std::filesystem::path p = v.get<std::string>();
      c.data_path = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    } else if (key == "synthetic") {
      c.synthetic = v.get<DgpSpec>();
    } else if (key == "series_ids") {
      c.series_ids = v.get<std::vector<std::string>>();
    } else if (key == "series_limit") {
      c.series_limit = v.get<std::size_t>();
    } else if (key == "train") {
      c.train = v.get<TrainConfig>();
    } else if (key == "css") {
      c.css = css_from_json(v);
    } else if (key == "spec") {
      c.fixed_spec = v.get<SariSpec>();
    } else if (key == "grid") {
      c.grid = grid_from_json(v);
    } else if (key == "split_fraction") {
      c.split_fraction = v.get<double>();
    } else if (key == "coverage") {
      const auto s = v.get<std::string>();
      if (s == "full") c.coverage = CoveragePolicy::full;
      else if (s == "partial") c.coverage = CoveragePolicy::partial;
      else throw std::invalid_argument("experiment: coverage must be \"full\" or \"partial\"");
    } else if (key == "weight_sensitivity") {
      c.weight_sensitivity = v.get<std::vector<WeightSpec>>();
    } else if (key == "series_timeout_seconds") {
      c.series_timeout_seconds = v.get<double>();
    } else if (key == "workers") {
      c.workers = v.get<int>();
    } else if (key == "seed") {
      seed = v.get<std::uint64_t>();
    } else {
      throw std::invalid_argument("experiment: unknown key '" + key + "'");
    }
  }
  if (seed) c.train.seed = *seed;
  c.validate();
  return c;
}

ExperimentConfig read_experiment_config(const std::filesystem::path& path) {
  return experiment_config_from_json(read_json_file(path), path.parent_path());
}

// ---- per series ------------------------------------------------------------------------

namespace {

double safe_improvement(double baseline, double candidate) {
  if (!std::isfinite(baseline) || !std::isfinite(candidate)) return std::nan("");
  if (baseline == 0.0) return candidate == 0.0 ? 0.0 : std::nan("");
  return relative_improvement(baseline, candidate);
}

ModelResult evaluate_model(const SariSpec& spec, const SariParams& params, const TimeSeries& series,
                           std::size_t earliest, const ExperimentConfig& config, const ScoreConfig& score) {
  ModelResult r;
  r.params = params;
  const auto e = rolling_ensemble(spec, params, series.values, static_cast<std::size_t>(config.train.horizon),
                                  earliest);
  r.score = ac_score(e, series, score);
  r.diagnostics = diagnostics(e, series, config.coverage);
  r.stationary = stationarity_check(spec, params).stationary;
  return r;
}

}  // namespace

SeriesResult run_series(const TimeSeries& input, const ExperimentConfig& config) {
  SeriesResult out;
  out.id = input.id;
  try {
    TimeSeries series = input;
    series.split_fraction = config.split_fraction;
    const auto [train_view, test_view] = split(series);
    const std::span<const double> train_values = train_view.values();
    const auto m = static_cast<std::size_t>(config.train.horizon);
    if (test_view.size() < m + 1) {
      throw std::invalid_argument("test segment of " + std::to_string(test_view.size()) +
                                  " values is too short for horizon " + std::to_string(m));
    }

    out.spec = config.fixed_spec ? *config.fixed_spec : select_orders(train_values, config.grid, config.css).best;
    if (train_values.size() < out.spec.required_history() + m + 1) {
      throw std::invalid_argument("train segment of " + std::to_string(train_values.size()) +
                                  " values is shorter than required for " + out.spec.label());
    }

    TrainConfig tc = config.train;
    if (tc.time_budget_seconds == 0.0) tc.time_budget_seconds = config.series_timeout_seconds;
    const ScoreConfig score = tc.score_config();
    const std::size_t earliest = train_view.end() - 1;

    const CssFit base = css_fit(out.spec, train_values, config.css);
    const TrainResult ac = train(out.spec, train_values, tc);
    if (ac.trace.aborted) throw std::runtime_error("AC training aborted: " + ac.trace.abort_reason);
    out.ac_epochs = ac.trace.final_epoch;
    out.ac_converged = ac.trace.converged;

    out.baseline = evaluate_model(out.spec, base.params, series, earliest, config, score);
    SariParams ac_params = ac.params;
    ac_params.sigma = base.params.sigma;
    out.ac = evaluate_model(out.spec, ac_params, series, earliest, config, score);
    out.ac.stationary = ac.trace.stationary;

    out.improvement_ac_score = safe_improvement(out.baseline.score.ac_score, out.ac.score.ac_score);
    out.improvement_accuracy = safe_improvement(out.baseline.score.accuracy, out.ac.score.accuracy);
    out.improvement_stability = safe_improvement(out.baseline.score.stability, out.ac.score.stability);
    out.improvement_vertical_variance = safe_improvement(out.baseline.diagnostics.mean_vertical_variance,
                                                         out.ac.diagnostics.mean_vertical_variance);
    const auto& bm = out.baseline.diagnostics.per_horizon_mape;
    const auto& am = out.ac.diagnostics.per_horizon_mape;
    for (std::size_t h = 0; h < bm.size(); ++h) out.improvement_mape.push_back(safe_improvement(bm[h], am[h]));

    for (const auto& w : config.weight_sensitivity) {
      TrainConfig wc = tc;
      wc.accuracy_weights = w;
      wc.stability_weights.reset();
      const TrainResult fit = train(out.spec, train_values, wc);
      if (fit.trace.aborted) throw std::runtime_error(w.label() + " training aborted: " + fit.trace.abort_reason);
      const auto e = rolling_ensemble(out.spec, fit.params, series.values, m, earliest);
      const double vv = diagnostics(e, series, config.coverage).mean_vertical_variance;
      out.weight_log_vertical_variance[w.label()] = std::log(vv + 1e-12);
    }
    out.ok = true;
  } catch (const std::exception& ex) {
    SeriesResult failed;
    failed.id = input.id;
    failed.error = ex.what();
    return failed;
  }
  return out;
}

namespace {

json model_json(const SariSpec& spec, const ModelResult& m) {
  json score = {{"accuracy", m.score.accuracy},
                {"stability", m.score.stability},
                {"ac_score", m.score.ac_score},
                {"lambda", m.score.lambda},
                {"origins", m.score.per_origin_energy_scores.size()}};
  return json{{"params", model_to_json(spec, m.params)},
              {"score", score},
              {"diagnostics", m.diagnostics},
              {"stationary", m.stationary}};
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json series_result_json(const SeriesResult& r) {
  json j = {{"id", r.id}, {"ok", r.ok}};
  if (!r.ok) {
    j["error"] = r.error;
    return j;
  }
  json mape = json::array();
  for (double v : r.improvement_mape) mape.push_back(finite_or_null(v));
  j["spec"] = r.spec;
  j["baseline"] = model_json(r.spec, r.baseline);
  j["ac"] = model_json(r.spec, r.ac);
  j["ac_epochs"] = r.ac_epochs;
  j["ac_converged"] = r.ac_converged;
  j["improvement"] = {{"ac_score", finite_or_null(r.improvement_ac_score)},
                      {"accuracy", finite_or_null(r.improvement_accuracy)},
                      {"stability", finite_or_null(r.improvement_stability)},
                      {"vertical_variance", finite_or_null(r.improvement_vertical_variance)},
                      {"mape_by_horizon", mape}};
  if (!r.weight_log_vertical_variance.empty()) {
    json w = json::object();
    for (const auto& [k, v] : r.weight_log_vertical_variance) w[k] = finite_or_null(v);
    j["weight_log_vertical_variance"] = w;
  }
  return j;
}

// ---- aggregation --------------------------------------------------------------------

double percentile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("percentile: no values");
  if (!(p >= 0.0 && p <= 100.0)) throw std::invalid_argument("percentile: p must lie in [0, 100]");
  const double pos = p / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

PercentileSummary summarize(std::span<const double> values) {
  PercentileSummary s;
  std::vector<double> finite;
  for (double v : values) {
    if (std::isfinite(v)) finite.push_back(v);
    else ++s.excluded;
  }
  if (finite.empty()) throw std::invalid_argument("summarize: no finite values");
  std::sort(finite.begin(), finite.end());
  s.count = finite.size();
  for (int p = 1; p <= 99; ++p) s.grid.push_back(percentile(finite, p));
  s.q25 = percentile(finite, 25);
  s.median = percentile(finite, 50);
  s.q75 = percentile(finite, 75);
  return s;
}

namespace {

void add_summary(std::map<std::string, PercentileSummary>& into, const std::string& key,
                 const std::vector<double>& values) {
  bool any = false;
  for (double v : values) any = any || std::isfinite(v);
  if (any) into[key] = summarize(values);
}

}  // namespace

AggregateReport aggregate(std::span<const SeriesResult> results) {
  AggregateReport a;
  a.series_total = results.size();
  std::vector<const SeriesResult*> ok;
  for (const auto& r : results) {
    if (r.ok) ok.push_back(&r);
    else a.failed_ids.push_back(r.id);
  }
  a.series_ok = ok.size();
  if (ok.empty()) throw std::runtime_error("aggregate: every series failed");

  std::vector<double> imp_ac, imp_acc, imp_stab, imp_vv, vv_base, vv_ac;
  std::size_t improved = 0;
  std::size_t horizons = 0;
  std::set<std::string> kinds;
  for (const auto* r : ok) {
    imp_ac.push_back(r->improvement_ac_score);
    imp_acc.push_back(r->improvement_accuracy);
    imp_stab.push_back(r->improvement_stability);
    imp_vv.push_back(r->improvement_vertical_variance);
    vv_base.push_back(r->baseline.diagnostics.mean_vertical_variance);
    vv_ac.push_back(r->ac.diagnostics.mean_vertical_variance);
    if (r->ac.score.ac_score < r->baseline.score.ac_score) ++improved;
    horizons = std::max(horizons, r->improvement_mape.size());
    for (const auto& [k, _] : r->weight_log_vertical_variance) kinds.insert(k);
  }
  add_summary(a.improvements, "ac_score", imp_ac);
  add_summary(a.improvements, "accuracy", imp_acc);
  add_summary(a.improvements, "stability", imp_stab);
  add_summary(a.improvements, "vertical_variance", imp_vv);
  add_summary(a.vertical_variance, "baseline", vv_base);
  add_summary(a.vertical_variance, "ac", vv_ac);

  const auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    std::size_t n = 0;
    for (double x : v) {
      if (!std::isfinite(x)) continue;
      s += x;
      ++n;
    }
    return n ? s / static_cast<double>(n) : std::nan("");
  };
  a.mean_vertical_variance_baseline = mean(vv_base);
  a.mean_vertical_variance_ac = mean(vv_ac);
  a.vertical_variance_ratio = a.mean_vertical_variance_baseline > 0.0
                                  ? a.mean_vertical_variance_ac / a.mean_vertical_variance_baseline
                                  : std::nan("");
  a.share_improved_ac_score = static_cast<double>(improved) / static_cast<double>(ok.size());

  for (std::size_t h = 0; h < horizons; ++h) {
    std::vector<double> vals;
    for (const auto* r : ok) vals.push_back(h < r->improvement_mape.size() ? r->improvement_mape[h] : std::nan(""));
    bool any = false;
    for (double v : vals) any = any || std::isfinite(v);
    if (any) a.mape_bands.push_back({static_cast<int>(h + 1), summarize(vals)});
  }

  for (const auto& kind : kinds) {
    std::vector<double> vals;
    for (const auto* r : ok) {
      const auto it = r->weight_log_vertical_variance.find(kind);
      vals.push_back(it == r->weight_log_vertical_variance.end() ? std::nan("") : it->second);
    }
    add_summary(a.weight_sensitivity, kind, vals);
  }
  return a;
}

namespace {

json summary_json(const PercentileSummary& s) {
  return json{{"q25", s.q25}, {"median", s.median}, {"q75", s.q75},
              {"count", s.count}, {"excluded", s.excluded}, {"percentiles", s.grid}};
}

json summaries_json(const std::map<std::string, PercentileSummary>& m) {
  json j = json::object();
  for (const auto& [k, s] : m) j[k] = summary_json(s);
  return j;
}

void write_percentile_rows(std::ostream& out, const PercentileSummary& s, const std::string& model,
                           const std::string& metric) {
  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    out << i + 1 << ',' << format_double(s.grid[i]) << ',' << model << ',' << metric << '\n';
  }
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

json aggregate_json(const AggregateReport& a) {
  json bands = json::array();
  for (const auto& b : a.mape_bands) {
    bands.push_back({{"horizon", b.horizon},
                     {"q25", b.improvement.q25},
                     {"median", b.improvement.median},
                     {"q75", b.improvement.q75},
                     {"count", b.improvement.count},
                     {"excluded", b.improvement.excluded}});
  }
  json j = {{"series_total", a.series_total},
            {"series_ok", a.series_ok},
            {"failed_ids", a.failed_ids},
            {"share_improved_ac_score", a.share_improved_ac_score},
            {"mean_vertical_variance", {{"baseline", finite_or_null(a.mean_vertical_variance_baseline)},
                                        {"ac", finite_or_null(a.mean_vertical_variance_ac)},
                                        {"ratio_ac_over_baseline", finite_or_null(a.vertical_variance_ratio)}}},
            {"vertical_variance", summaries_json(a.vertical_variance)},
            {"improvements", summaries_json(a.improvements)},
            {"mape_improvement_bands", bands},
            {"mape_band_construction", "cross-series quantiles"}};
  if (!a.weight_sensitivity.empty()) j["weight_sensitivity_log_mean_vertical_variance"] = summaries_json(a.weight_sensitivity);
  return j;
}

// ---- experiment --------------------------------------------------------------------------

std::vector<TimeSeries> experiment_series(const ExperimentConfig& config) {
  config.validate();
  std::vector<TimeSeries> all;
  if (config.synthetic) {
    all = synth_dgp(*config.synthetic);
  } else {
    all = std::filesystem::is_directory(*config.data_path) ? load_m4_hourly(*config.data_path)
                                                            : read_series_file(*config.data_path);
  }
  if (!config.series_ids.empty()) {
    std::vector<TimeSeries> picked;
    for (const auto& id : config.series_ids) {
      const auto it = std::find_if(all.begin(), all.end(), [&id](const TimeSeries& s) { return s.id == id; });
      if (it == all.end()) throw std::invalid_argument("experiment: series '" + id + "' not found");
      picked.push_back(*it);
    }
    all = std::move(picked);
  }
  if (config.series_limit > 0 && all.size() > config.series_limit) all.resize(config.series_limit);
  if (all.empty()) throw std::invalid_argument("experiment: no series selected");
  return all;
}

std::vector<SeriesResult> run_all(std::span<const TimeSeries> series, const ExperimentConfig& config) {
  int workers = config.workers;
  if (workers == 0) {
    if (const char* env = std::getenv("ACSCORE_WORKERS")) workers = std::max(0, std::atoi(env));
  }
  if (workers == 0) workers = omp_get_max_threads();

  std::vector<SeriesResult> results(series.size());
  const auto n = static_cast<std::ptrdiff_t>(series.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    results[static_cast<std::size_t>(i)] = run_series(series[static_cast<std::size_t>(i)], config);
  }
  std::stable_sort(results.begin(), results.end(),
                   [](const SeriesResult& a, const SeriesResult& b) { return a.id < b.id; });
  return results;
}

AggregateReport run_experiment(const ExperimentConfig& config, const std::filesystem::path& output_dir) {
  const auto series = experiment_series(config);
  std::filesystem::create_directories(output_dir);
  const auto results = run_all(series, config);

  {
    auto out = open_output(output_dir / "results.jsonl");
    for (const auto& r : results) out << series_result_json(r).dump() << '\n';
  }
  const AggregateReport agg = aggregate(results);
  {
    auto out = open_output(output_dir / "aggregate.json");
    out << aggregate_json(agg).dump(2) << '\n';
  }
  for (const auto& [metric, s] : agg.improvements) {
    auto out = open_output(output_dir / ("percentiles_" + metric + ".csv"));
    out << "percentile,value,model,metric\n";
    write_percentile_rows(out, s, "ac_vs_baseline", metric + "_improvement");
  }
  {
    auto out = open_output(output_dir / "percentiles_mean_vertical_variance.csv");
    out << "percentile,value,model,metric\n";
    for (const auto& [model, s] : agg.vertical_variance) write_percentile_rows(out, s, model, "mean_vertical_variance");
  }
  {
    auto out = open_output(output_dir / "mape_by_horizon.csv");
    out << "horizon,q25,median,q75,count,excluded\n";
    for (const auto& b : agg.mape_bands) {
      out << b.horizon << ',' << format_double(b.improvement.q25) << ',' << format_double(b.improvement.median)
          << ',' << format_double(b.improvement.q75) << ',' << b.improvement.count << ',' << b.improvement.excluded
          << '\n';
    }
  }
  if (!agg.weight_sensitivity.empty()) {
    auto out = open_output(output_dir / "weight_sensitivity.csv");
    out << "percentile,value,model,metric\n";
    for (const auto& [kind, s] : agg.weight_sensitivity) {
      write_percentile_rows(out, s, kind, "log_mean_vertical_variance");
    }
  }
  return agg;
}

}  // namespace acscore
