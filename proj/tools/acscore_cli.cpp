#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "acscore/harness.hpp"
#include "acscore/io.hpp"

using namespace acscore;

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

// Writes to `path`, or stdout when it is empty.
template <class F>
void emit(const std::string& path, F&& write) {
  if (path.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write(out);
}

TimeSeries pick_series(const std::string& path, const std::string& id) {
  const auto all = read_series_file(path);
  if (all.empty()) throw std::runtime_error(path + ": no series");
  if (id.empty()) return all.front();
  for (const auto& s : all) {
    if (s.id == id) return s;
  }
  throw std::runtime_error(path + ": series '" + id + "' not found");
}

CoveragePolicy parse_coverage(const std::string& s) {
  if (s == "full") return CoveragePolicy::full;
  if (s == "partial") return CoveragePolicy::partial;
  throw std::invalid_argument("coverage must be full or partial");
}

std::optional<SariSpec> parse_order(const std::string& text) {
  if (text.empty()) return std::nullopt;
  SariSpec s;
  char c1 = 0, c2 = 0, c3 = 0, c4 = 0;
  std::istringstream in(text);
  if (!(in >> s.p >> c1 >> s.d >> c2 >> s.P >> c3 >> s.D >> c4 >> s.s) || c1 != ',' || c2 != ',' || c3 != ',' ||
      c4 != ',' || !in.eof()) {
    throw std::invalid_argument("--order expects p,d,P,D,s");
  }
  s.validate();
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AC score evaluation and SARI training"};
  app.require_subcommand(1);

  // score
  std::string score_ensemble, score_actuals, score_config, score_id, score_out;
  auto* score = app.add_subcommand("score", "Score a forecast ensemble against actuals");
  score->add_option("--ensemble", score_ensemble, "Ensemble CSV (origin,horizon,sample,value)")->required();
  score->add_option("--actuals", score_actuals, "Series CSV holding the actuals")->required();
  score->add_option("--config", score_config, "Score config JSON");
  score->add_option("--series-id", score_id, "Series to use from the actuals file");
  score->add_option("--out", score_out, "Output JSON (default stdout)");

  // fit
  std::string fit_series, fit_id, fit_config, fit_order, fit_model = "ac", fit_params_out, fit_trace_out;
  double fit_split = 0.6;
  auto* fit = app.add_subcommand("fit", "Fit a SARI model on the training segment of a series");
  fit->add_option("--series", fit_series, "Series CSV")->required();
  fit->add_option("--series-id", fit_id, "Series to fit (default: first row)");
  fit->add_option("--config", fit_config, "Train config JSON");
  fit->add_option("--order", fit_order, "Fixed orders p,d,P,D,s (default: AIC grid search)");
  fit->add_option("--model", fit_model, "ac or css")->check(CLI::IsMember({"ac", "css"}));
  fit->add_option("--split-fraction", fit_split, "Training share of the series");
  fit->add_option("--params-out", fit_params_out, "Params JSON (default stdout)");
  fit->add_option("--trace-out", fit_trace_out, "Training trace CSV");

  // evaluate
  std::string ev_model, ev_series, ev_id, ev_config, ev_out, ev_coverage = "full";
  int ev_horizon = 24;
  double ev_split = 0.6;
  auto* evaluate = app.add_subcommand("evaluate", "Rolling out-of-sample evaluation of fitted params");
  evaluate->add_option("--model", ev_model, "Params JSON from fit")->required();
  evaluate->add_option("--series", ev_series, "Series CSV")->required();
  evaluate->add_option("--series-id", ev_id, "Series to evaluate (default: first row)");
  evaluate->add_option("--config", ev_config, "Score config JSON");
  evaluate->add_option("--horizon", ev_horizon, "Forecast horizon m")->check(CLI::PositiveNumber);
  evaluate->add_option("--split-fraction", ev_split, "Training share; origins start at its last value");
  evaluate->add_option("--coverage", ev_coverage, "full or partial")->check(CLI::IsMember({"full", "partial"}));
  evaluate->add_option("--out", ev_out, "Output JSON (default stdout)");

  // experiment
  std::string ex_config, ex_out;
  std::optional<std::uint64_t> ex_seed;
  auto* experiment = app.add_subcommand("experiment", "Run the full baseline vs AC comparison");
  experiment->add_option("--config", ex_config, "Experiment config JSON")->required();
  experiment->add_option("--out", ex_out, "Output directory")->required();
  experiment->add_option("--seed", ex_seed, "Overrides the training seed");

  // synth
  std::string sy_config, sy_out;
  auto* synth = app.add_subcommand("synth", "Simulate series from a SARI data-generating process");
  synth->add_option("--config", sy_config, "DGP spec JSON")->required();
  synth->add_option("--out", sy_out, "Series CSV (default stdout)");

  // weights
  std::string w_kind;
  int w_horizon = 0;
  WeightParams w_params;
  auto* weights = app.add_subcommand("weights", "Print a normalized horizon weight schedule");
  weights->add_option("--kind", w_kind, "uniform, linear, exponential or hyperbolic")->required();
  weights->add_option("--horizon", w_horizon, "Horizon m")->required()->check(CLI::PositiveNumber);
  weights->add_option("--alpha", w_params.alpha, "Exponential decay rate");
  weights->add_option("--beta", w_params.beta, "Hyperbolic rate");
  weights->add_option("--floor", w_params.floor, "Linear floor");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*score) {
      auto in = open_input(score_ensemble);
      const ForecastEnsemble e = read_ensemble_csv(in);
      const TimeSeries series = pick_series(score_actuals, score_id);
      const json cfg = score_config.empty() ? json::object() : read_json_file(score_config);
      const ScoreConfig sc = score_config_from_json(cfg, static_cast<int>(e.horizon()));
      const json report = ac_score(e, series, sc);
      emit(score_out, [&](std::ostream& out) { out << report.dump(2) << '\n'; });
    } else if (*fit) {
      TimeSeries series = pick_series(fit_series, fit_id);
      series.split_fraction = fit_split;
      const auto train_values = split(series).first.values();
      const TrainConfig tc = fit_config.empty() ? TrainConfig{} : read_json_file(fit_config).get<TrainConfig>();
      const auto fixed = parse_order(fit_order);
      const SariSpec spec = fixed ? *fixed : select_orders(train_values, OrderGrid{}).best;
      const CssFit base = css_fit(spec, train_values);
      SariParams params = base.params;
      TrainTrace trace;
      if (fit_model == "ac") {
        const TrainResult r = train(spec, train_values, tc);
        if (r.trace.aborted) throw std::runtime_error("training aborted: " + r.trace.abort_reason);
        params = r.params;
        params.sigma = base.params.sigma;
        trace = r.trace;
      }
      emit(fit_params_out, [&](std::ostream& out) { out << model_to_json(spec, params).dump(2) << '\n'; });
      if (!fit_trace_out.empty()) emit(fit_trace_out, [&](std::ostream& out) { write_trace_csv(out, trace); });
    } else if (*evaluate) {
      SariSpec spec;
      SariParams params;
      model_from_json(read_json_file(ev_model), spec, params);
      TimeSeries series = pick_series(ev_series, ev_id);
      series.split_fraction = ev_split;
      const std::size_t earliest = split(series).first.end() - 1;
      const auto e = rolling_ensemble(spec, params, series.values, static_cast<std::size_t>(ev_horizon), earliest);
      const json cfg = ev_config.empty() ? json::object() : read_json_file(ev_config);
      const ScoreConfig sc = score_config_from_json(cfg, ev_horizon);
      const json report = {{"score", ac_score(e, series, sc)},
                           {"diagnostics", diagnostics(e, series, parse_coverage(ev_coverage))}};
      emit(ev_out, [&](std::ostream& out) { out << report.dump(2) << '\n'; });
    } else if (*experiment) {
      ExperimentConfig cfg = read_experiment_config(ex_config);
      if (ex_seed) cfg.train.seed = *ex_seed;
      const AggregateReport agg = run_experiment(cfg, ex_out);
      std::cerr << agg.series_ok << "/" << agg.series_total << " series ok; AC score improved on "
                << format_double(100.0 * agg.share_improved_ac_score) << "%\n";
    } else if (*synth) {
      const DgpSpec dgp = read_json_file(sy_config).get<DgpSpec>();
      const auto series = synth_dgp(dgp);
      emit(sy_out, [&](std::ostream& out) { write_series_csv(out, series); });
    } else if (*weights) {
      const WeightSchedule w = build_weight_schedule(parse_weight_kind(w_kind), w_horizon, w_params);
      for (std::size_t h = 0; h < w.horizon(); ++h) std::cout << h + 1 << ',' << format_double(w[h]) << '\n';
    }
  } catch (const std::exception& ex) {
    std::cerr << "acscore: " << ex.what() << '\n';
    return 1;
  }
  return 0;
}
