#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "salix/attribution.hpp"
#include "salix/config.hpp"
#include "salix/dml.hpp"
#include "salix/preprocess.hpp"
#include "salix/shap.hpp"
#include "salix/svg.hpp"
#include "salix/synth.hpp"

namespace salix::pipeline {

namespace fs = std::filesystem;

inline void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << content;
}

inline void write_json(const fs::path& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

inline nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
  return j;
}

// Canonical file layout inside one run directory.
struct RunDir {
  fs::path root;

  explicit RunDir(fs::path dir) : root(std::move(dir)) {}

  fs::path artifacts() const { return root / "artifacts"; }
  fs::path data_csv() const { return root / "data.csv"; }
  fs::path schema_json() const { return root / "schema.json"; }
  fs::path truth_json() const { return root / "truth.json"; }
  fs::path processed_csv() const { return root / "processed.csv"; }
  fs::path processed_meta() const { return root / "processed.meta.json"; }
  fs::path scaler_json() const { return root / "scaler.json"; }
  fs::path split_json() const { return root / "split.json"; }
  fs::path model_json(const std::string& kind) const { return root / ("model_" + kind + ".json"); }
  fs::path eval_json(const std::string& kind) const { return root / ("eval_" + kind + ".json"); }
  fs::path dml_json() const { return root / "dml.json"; }
  fs::path dml_md() const { return artifacts() / "dml.md"; }
  fs::path rfe_trace() const { return root / "rfe_trace.json"; }
  fs::path rfe_csv() const { return artifacts() / "attribution_rfe.csv"; }
  fs::path shap_csv(const std::string& kind) const {
    return artifacts() / ("attribution_shap_" + kind + ".csv");
  }
  fs::path shap_phi_csv(const std::string& kind) const {
    return artifacts() / ("shap_phi_" + kind + ".csv");
  }
  fs::path shap_svg(const std::string& kind) const {
    return artifacts() / ("shap_" + kind + ".svg");
  }
  fs::path gsa_csv(const std::string& kind) const {
    return artifacts() / ("attribution_gsa_s1_" + kind + ".csv");
  }
  fs::path sobol_csv(const std::string& kind) const {
    return artifacts() / ("sobol_" + kind + ".csv");
  }
  fs::path gsa_svg(const std::string& kind) const { return artifacts() / ("gsa_" + kind + ".svg"); }
  fs::path spearman_json(const std::string& kind) const {
    return root / ("spearman_" + kind + ".json");
  }
  fs::path spearman_md(const std::string& kind) const {
    return artifacts() / ("spearman_" + kind + ".md");
  }
  fs::path report_json() const { return root / "report.json"; }
  fs::path report_md() const { return root / "report.md"; }
  fs::path timings_json() const { return root / "timings.json"; }
  fs::path config_echo() const { return root / "config_echo.json"; }

  void prepare() const {
    fs::create_directories(root);
    fs::create_directories(artifacts());
  }
};

// ---------------------------------------------------------------------------
// Stages. Every stage reads and writes files only, so running the matching
// CLI subcommands in sequence reproduces run_pipeline byte for byte.
// ---------------------------------------------------------------------------

inline void stage_synth(const RunConfig& cfg, const RunDir& dir) {
  if (!cfg.input.synthetic)
    throw ConfigError("synth stage: config has no input.synthetic spec");
  auto data = synth::gen_hydro(*cfg.input.synthetic);
  save_csv(data.dataset, dir.data_csv().string());
  write_json(dir.schema_json(), schema_to_json(dataset_schema(data.dataset)));
  write_json(dir.truth_json(), data.truth.to_json());
}

// Input CSV/schema paths: synthetic runs read what stage_synth wrote.
inline std::pair<std::string, std::string> input_paths(const RunConfig& cfg, const RunDir& dir) {
  if (cfg.input.synthetic) return {dir.data_csv().string(), dir.schema_json().string()};
  return {cfg.input.data, cfg.input.schema};
}

inline void stage_preprocess(const RunConfig& cfg, const RunDir& dir) {
  const auto [csv_path, schema_path] = input_paths(cfg, dir);
  Dataset ds = load_csv(csv_path, load_schema(schema_path));

  ds = filter_salinity_outliers(ds, cfg.preprocess.outlier_threshold);
  ds = impute_mean(ds);

  std::vector<std::string> one_hot_cols = cfg.preprocess.one_hot_columns;
  if (cfg.preprocess.one_hot_auto) {
    one_hot_cols.clear();
    for (const auto& c : ds.columns)
      if (c.spec.kind == ColumnKind::Categorical && c.spec.name != cfg.preprocess.weight_group)
        one_hot_cols.push_back(c.spec.name);
  }
  if (!one_hot_cols.empty()) ds = one_hot_encode(ds, one_hot_cols);

  ds = drop_low_variance(ds, cfg.preprocess.variance_eps);
  ds = prune_correlated(ds, cfg.preprocess.correlation_threshold);

  if (!cfg.preprocess.weight_group.empty()) {
    const auto* density =
        cfg.preprocess.density_override.empty() ? nullptr : &cfg.preprocess.density_override;
    ds = basin_weights(ds, cfg.preprocess.weight_group, density);
  }

  ScalerParams scaler;
  if (cfg.preprocess.standardize) {
    auto [scaled, params] = standardize(ds);
    ds = std::move(scaled);
    scaler = std::move(params);
  }

  SplitPlan split = temporal_split(ds, cfg.preprocess.valid_fraction);

  save_dataset(ds, dir.processed_csv().string(), dir.processed_meta().string());
  write_json(dir.scaler_json(), scaler.to_json());
  write_json(dir.split_json(), split.to_json());
  std::string provenance;
  for (const auto& line : ds.provenance) provenance += line + "\n";
  write_text(dir.artifacts() / "provenance.txt", provenance);
}

namespace detail {

struct TrainingView {
  Dataset ds;
  SplitPlan split;
  FeatureMatrix x;
  std::vector<double> y;
  std::vector<double> y_train, w_train, y_valid, w_valid;
  FeatureMatrix x_train, x_valid;
};

inline TrainingView load_training_view(const RunDir& dir) {
  TrainingView v;
  v.ds = load_dataset(dir.processed_csv().string(), dir.processed_meta().string());
  v.split = SplitPlan::from_json(read_json(dir.split_json()));
  v.x = v.ds.feature_matrix();
  v.y = v.ds.target_values();
  v.x_train = v.x.select_rows(v.split.train);
  v.x_valid = v.x.select_rows(v.split.valid);
  for (auto r : v.split.train) {
    v.y_train.push_back(v.y[r]);
    v.w_train.push_back(v.ds.weights[r]);
  }
  for (auto r : v.split.valid) {
    v.y_valid.push_back(v.y[r]);
    v.w_valid.push_back(v.ds.weights[r]);
  }
  return v;
}

}  // namespace detail

inline void stage_train(const RunConfig& cfg, const RunDir& dir) {
  auto view = detail::load_training_view(dir);
  for (const auto& [kind, spec] : cfg.models.enabled_specs()) {
    ModelPtr model = fit_model(spec, view.x_train, view.y_train, view.w_train, cfg.seed);
    save_model(*model, dir.model_json(kind).string());
  }
}

inline void stage_eval(const RunConfig& cfg, const RunDir& dir) {
  auto view = detail::load_training_view(dir);
  for (const auto& [kind, spec] : cfg.models.enabled_specs()) {
    ModelPtr model = load_model(dir.model_json(kind).string());
    const auto train_rep = evaluate(view.y_train, model->predict(view.x_train), &view.w_train);
    const auto valid_rep = evaluate(view.y_valid, model->predict(view.x_valid), &view.w_valid);
    write_json(dir.eval_json(kind),
               {{"kind", kind}, {"train", train_rep.to_json()}, {"valid", valid_rep.to_json()}});
  }
}

inline void stage_dml(const RunConfig& cfg, const RunDir& dir) {
  Dataset ds = load_dataset(dir.processed_csv().string(), dir.processed_meta().string());
  if (cfg.dml.standardize_before_dml && !cfg.preprocess.standardize)
    ds = standardize(ds).first;
  const auto outcome = ds.columns[static_cast<std::size_t>(ds.target_index())].spec.name;
  DmlOptions opts;
  opts.k_folds = cfg.dml.k_folds;
  opts.alpha = cfg.dml.alpha;
  opts.intercept = cfg.dml.intercept;
  opts.seed = cfg.seed;
  auto scan = dml_scan(ds, outcome, cfg.dml.learner_spec(), opts);
  write_json(dir.dml_json(), dml_scan_to_json(scan));
  write_text(dir.dml_md(), dml_scan_to_markdown(scan));
}

inline void stage_rfe(const RunConfig& cfg, const RunDir& dir) {
  auto view = detail::load_training_view(dir);
  auto trace = rfe(view.ds, cfg.attribution.rfe_forest, view.split,
                   cfg.attribution.rfe_min_features, cfg.seed);
  write_json(dir.rfe_trace(), trace.to_json());
  auto result = rfe_attribution(trace, view.x.names,
                                {{"learner", "forest"}, {"seed", cfg.seed}});
  write_text(dir.rfe_csv(), result.to_csv());
}

inline void stage_shap(const RunConfig& cfg, const RunDir& dir) {
  auto view = detail::load_training_view(dir);
  for (const auto& [kind, spec] : cfg.models.enabled_specs()) {
    ModelPtr model = load_model(dir.model_json(kind).string());
    FeatureMatrix background =
        background_sample(view.x_train, cfg.attribution.shap_background, cfg.seed);

    FeatureMatrix rows = view.x_train;
    if (rows.n_rows > cfg.attribution.shap_explain_rows) {
      Rng rng = Rng::stream(cfg.seed, "shap-rows");
      auto idx = rng.sample_without_replacement(rows.n_rows, cfg.attribution.shap_explain_rows);
      std::sort(idx.begin(), idx.end());
      rows = rows.select_rows(idx);
    }

    const auto mode = cfg.attribution.shap_mode == "exact" ? ShapMode::Exact : ShapMode::Kernel;
    auto [scores, expl] =
        shap_summary(*model, rows, background, mode, cfg.attribution.shap_coalitions, cfg.seed);
    auto result = AttributionResult::make(
        "shap", view.x.names, scores,
        {{"mode", expl.mode},
         {"model", kind},
         {"background_rows", expl.background_rows},
         {"explained_rows", rows.n_rows},
         {"n_coalitions", mode == ShapMode::Kernel ? cfg.attribution.shap_coalitions : 0},
         {"seed", cfg.seed}});
    write_text(dir.shap_csv(kind), result.to_csv());

    // per-row contribution matrix (rows x features)
    std::string phi_csv;
    for (std::size_t j = 0; j < expl.features.size(); ++j)
      phi_csv += (j ? "," : "") + expl.features[j];
    phi_csv += "\n";
    for (const auto& row : expl.phi) {
      for (std::size_t j = 0; j < row.size(); ++j)
        phi_csv += (j ? "," : "") + format_double(row[j]);
      phi_csv += "\n";
    }
    write_text(dir.shap_phi_csv(kind), phi_csv);

    // mean-|phi| ranking chart, most important on top
    auto order = result.ordered_features();
    std::vector<double> ordered_scores;
    std::map<std::string, double> by_name;
    for (std::size_t i = 0; i < result.features.size(); ++i)
      by_name[result.features[i]] = result.scores[i];
    for (const auto& f : order) ordered_scores.push_back(by_name[f]);
    write_text(dir.shap_svg(kind),
               svg::bar_chart("mean |SHAP| (" + kind + ", mg/L)", order,
                              {{"mean |phi|", "#4477aa", ordered_scores, {}, {}}}));
  }
}

inline void stage_gsa(const RunConfig& cfg, const RunDir& dir) {
  auto view = detail::load_training_view(dir);
  const Dataset train_ds = view.ds.select_rows(view.split.train);
  const auto sampling = cfg.attribution.gsa_sampling == "empirical-marginal"
                            ? GsaSampling::EmpiricalMarginal
                            : GsaSampling::UniformRange;
  for (const auto& [kind, spec] : cfg.models.enabled_specs()) {
    ModelPtr model = load_model(dir.model_json(kind).string());
    auto gsa = gsa_over_model(*model, train_ds, cfg.attribution.gsa_n_base, cfg.seed, sampling,
                              cfg.attribution.gsa_bootstrap);
    nlohmann::json meta = gsa.s1.metadata;
    meta["model"] = kind;
    auto s1 = AttributionResult::make("gsa-s1", gsa.s1.features, gsa.s1.scores, meta);
    write_text(dir.gsa_csv(kind), s1.to_csv());

    std::string csv = "feature,s1,s1_lo,s1_hi,st,st_lo,st_hi\n";
    const auto& idx = gsa.indices;
    for (std::size_t i = 0; i < idx.features.size(); ++i) {
      csv += idx.features[i] + "," + format_double(idx.s1[i]) + "," + format_double(idx.s1_lo[i]) +
             "," + format_double(idx.s1_hi[i]) + "," + format_double(idx.st[i]) + "," +
             format_double(idx.st_lo[i]) + "," + format_double(idx.st_hi[i]) + "\n";
    }
    write_text(dir.sobol_csv(kind), csv);

    svg::BarSeries s1_series{"S1", "#4477aa", idx.s1, idx.s1_lo, idx.s1_hi};
    svg::BarSeries st_series{"ST", "#ee6677", idx.st, idx.st_lo, idx.st_hi};
    write_text(dir.gsa_svg(kind),
               svg::bar_chart("Sobol indices (" + kind + ")", idx.features,
                              {s1_series, st_series}));
  }
}

inline void stage_compare(const RunConfig& cfg, const RunDir& dir) {
  std::ifstream rfe_in(dir.rfe_csv());
  if (!rfe_in) throw DataError("compare stage: missing " + dir.rfe_csv().string());
  const auto rfe_result = AttributionResult::from_csv(rfe_in);
  for (const auto& [kind, spec] : cfg.models.enabled_specs()) {
    std::ifstream shap_in(dir.shap_csv(kind));
    std::ifstream gsa_in(dir.gsa_csv(kind));
    if (!shap_in || !gsa_in)
      throw DataError("compare stage: missing attribution CSVs for model '" + kind + "'");
    const auto shap_result = AttributionResult::from_csv(shap_in);
    const auto gsa_result = AttributionResult::from_csv(gsa_in);
    auto matrix = rank_compare({rfe_result, shap_result, gsa_result});
    write_json(dir.spearman_json(kind), matrix.to_json());
    write_text(dir.spearman_md(kind), matrix.to_markdown());
  }
}

inline void stage_report(const RunConfig& cfg, const RunDir& dir) {
  nlohmann::json report;
  report["version"] = 1;
  report["config"] = cfg.to_json();

  const auto meta = read_json(dir.processed_meta());
  report["provenance"] = meta.at("provenance");

  nlohmann::json models = nlohmann::json::object();
  for (const auto& [kind, spec] : cfg.models.enabled_specs())
    models[kind] = read_json(dir.eval_json(kind));
  report["models"] = models;

  report["dml"] = read_json(dir.dml_json());

  nlohmann::json attribution = nlohmann::json::object();
  {
    std::ifstream in(dir.rfe_csv());
    attribution["rfe"] = AttributionResult::from_csv(in).to_json();
  }
  nlohmann::json per_model = nlohmann::json::object();
  for (const auto& [kind, spec] : cfg.models.enabled_specs()) {
    std::ifstream shap_in(dir.shap_csv(kind));
    std::ifstream gsa_in(dir.gsa_csv(kind));
    per_model[kind] = {{"shap", AttributionResult::from_csv(shap_in).to_json()},
                       {"gsa_s1", AttributionResult::from_csv(gsa_in).to_json()}};
  }
  attribution["per_model"] = per_model;
  report["attribution"] = attribution;

  nlohmann::json spearman = nlohmann::json::object();
  for (const auto& [kind, spec] : cfg.models.enabled_specs())
    spearman[kind] = read_json(dir.spearman_json(kind));
  report["spearman"] = spearman;

  write_json(dir.report_json(), report);

  // human-readable summary
  std::string md = "# Run report\n\n## Model performance (validation)\n\n";
  md += "| model | MAE | RMSE | R2 |\n|---|---|---|---|\n";
  for (const auto& [kind, spec] : cfg.models.enabled_specs()) {
    const auto& v = models[kind]["valid"];
    md += "| " + kind + " | " + v["mae"].dump() + " | " + v["rmse"].dump() + " | " +
          v["r2"].dump() + " |\n";
  }
  md += "\n## Causal scan (DML)\n\n";
  {
    std::ifstream in(dir.dml_md());
    std::string line;
    while (std::getline(in, line)) md += line + "\n";
  }
  md += "\n## Attribution rank agreement (Spearman)\n";
  for (const auto& [kind, spec] : cfg.models.enabled_specs()) {
    md += "\n### " + kind + "\n\n";
    std::ifstream in(dir.spearman_md(kind));
    std::string line;
    while (std::getline(in, line)) md += line + "\n";
  }
  write_text(dir.report_md(), md);
}

// The Fig. 2 style three-stage workflow, end to end. Returns the report
// JSON; per-stage wall times land in timings.json (kept out of report.json
// so reruns stay byte-identical).
inline nlohmann::json run_pipeline(const RunConfig& cfg) {
  RunDir dir(cfg.output_dir);
  dir.prepare();
  write_json(dir.config_echo(), cfg.to_json());

  using Clock = std::chrono::steady_clock;
  nlohmann::json timings = nlohmann::json::object();
  auto timed = [&](const char* name, auto&& fn) {
    const auto start = Clock::now();
    try {
      fn();
    } catch (const Error& e) {
      throw Error(e.category(), std::string("stage ") + name + ": " + e.what());
    }
    timings[name] =
        std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count();
  };

  if (cfg.input.synthetic) timed("synth", [&] { stage_synth(cfg, dir); });
  timed("preprocess", [&] { stage_preprocess(cfg, dir); });
  timed("train", [&] { stage_train(cfg, dir); });
  timed("eval", [&] { stage_eval(cfg, dir); });
  timed("dml", [&] { stage_dml(cfg, dir); });
  timed("rfe", [&] { stage_rfe(cfg, dir); });
  timed("shap", [&] { stage_shap(cfg, dir); });
  timed("gsa", [&] { stage_gsa(cfg, dir); });
  timed("compare", [&] { stage_compare(cfg, dir); });
  timed("report", [&] { stage_report(cfg, dir); });

  write_json(dir.timings_json(), timings);
  return read_json(dir.report_json());
}

}  // namespace salix::pipeline
