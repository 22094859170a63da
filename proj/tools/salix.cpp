// salix: config-driven pipeline runner for tabular salinity modelling.
// Subcommands mirror the pipeline stages; running them in sequence over one
// run directory reproduces `salix run` byte for byte.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "salix/pipeline.hpp"

namespace fs = std::filesystem;
using namespace salix;

namespace {

int exit_code_for(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::Config: return 2;
    case ErrorCategory::Data: return 3;
    case ErrorCategory::Numeric: return 4;
  }
  return 1;
}

void print_error(const std::string& category, const std::string& message) {
  nlohmann::json diag{{"error", {{"category", category}, {"message", message}}}};
  std::cerr << diag.dump() << std::endl;
}

struct CommonArgs {
  std::string config_path;
  std::string dir;
  std::optional<std::uint64_t> seed;

  void attach(CLI::App* cmd, bool config_required = true) {
    auto* opt = cmd->add_option("--config", config_path, "Run configuration JSON");
    if (config_required) opt->required();
    cmd->add_option("--dir", dir, "Run directory (defaults to the config's output_dir)");
    cmd->add_option("--seed", seed, "Override the config seed");
  }

  RunConfig load() const {
    RunConfig cfg = RunConfig::load(config_path);
    if (seed) cfg.seed = *seed;
    if (!dir.empty()) cfg.output_dir = dir;
    return cfg;
  }
};

Dataset load_data_with_meta(const std::string& data_path, std::string meta_path) {
  if (meta_path.empty()) {
    fs::path p(data_path);
    p.replace_extension(".meta.json");
    meta_path = p.string();
  }
  return load_dataset(data_path, meta_path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"salix: groundwater-salinity modelling, causal scans and attribution"};
  app.require_subcommand(1);

  // --- run -----------------------------------------------------------------
  CommonArgs run_args;
  auto* cmd_run = app.add_subcommand("run", "Execute the full pipeline");
  run_args.attach(cmd_run);

  // --- synth ---------------------------------------------------------------
  std::string synth_spec_path, synth_out = "data.csv", synth_truth = "truth.json",
              synth_schema = "schema.json";
  std::optional<std::uint64_t> synth_seed;
  auto* cmd_synth = app.add_subcommand("synth", "Generate a synthetic borehole-year dataset");
  cmd_synth->add_option("--spec", synth_spec_path, "SynthSpec JSON")->required();
  cmd_synth->add_option("--out", synth_out, "Output CSV path");
  cmd_synth->add_option("--truth", synth_truth, "Ground-truth JSON path");
  cmd_synth->add_option("--schema-out", synth_schema, "Schema JSON path");
  cmd_synth->add_option("--seed", synth_seed, "Override the seed field of --spec");

  // --- stage subcommands over a run directory -------------------------------
  CommonArgs pre_args, train_args, eval_args, rfe_args, shap_args, report_args;
  auto* cmd_pre =
      app.add_subcommand("preprocess", "Outlier gate, imputation, encoding, weights, split");
  pre_args.attach(cmd_pre);
  auto* cmd_train = app.add_subcommand("train", "Fit the configured models on the train split");
  train_args.attach(cmd_train);
  std::string train_grid_path, train_grid_kind = "grid";
  cmd_train->add_option("--grid", train_grid_path,
                        "JSON array of model specs: grid-search instead of config models");
  cmd_train->add_option("--grid-out", train_grid_kind, "Model kind name for the grid result");
  auto* cmd_eval = app.add_subcommand("eval", "Evaluate trained models (MAE, RMSE, R2)");
  eval_args.attach(cmd_eval);
  auto* cmd_rfe = app.add_subcommand("rfe", "Recursive feature elimination ranking");
  rfe_args.attach(cmd_rfe);
  auto* cmd_shap = app.add_subcommand("shap", "SHAP attributions per configured model");
  shap_args.attach(cmd_shap);
  auto* cmd_report =
      app.add_subcommand("report", "Merge stage outputs into report.json/report.md");
  report_args.attach(cmd_report);

  // --- dml -----------------------------------------------------------------
  CommonArgs dml_args;
  std::string dml_outcome;
  auto* cmd_dml = app.add_subcommand("dml", "Double-ML causal scan over all predictors");
  dml_args.attach(cmd_dml);
  cmd_dml->add_option("--outcome", dml_outcome, "Outcome column (defaults to the target)");

  // --- gsa (run-dir mode or direct --model/--data mode) ---------------------
  CommonArgs gsa_args;
  std::string gsa_model, gsa_data, gsa_meta, gsa_out_csv, gsa_svg_path;
  std::optional<std::size_t> gsa_n_base;
  auto* cmd_gsa = app.add_subcommand("gsa", "Sobol global sensitivity analysis");
  gsa_args.attach(cmd_gsa, /*config_required=*/false);
  cmd_gsa->add_option("--model", gsa_model, "Trained model JSON (direct mode)");
  cmd_gsa->add_option("--data", gsa_data, "Dataset CSV (direct mode; meta sidecar required)");
  cmd_gsa->add_option("--meta", gsa_meta, "Dataset meta JSON (defaults to <data>.meta.json)");
  cmd_gsa->add_option("--n-base", gsa_n_base, "Sobol base sample count (power of 2)");
  cmd_gsa->add_option("--out", gsa_out_csv, "Output CSV (direct mode)");
  cmd_gsa->add_option("--svg", gsa_svg_path, "Output SVG (direct mode)");

  // --- compare ---------------------------------------------------------------
  CommonArgs compare_args;
  std::vector<std::string> compare_inputs;
  std::string compare_out, compare_md;
  auto* cmd_compare = app.add_subcommand("compare", "Spearman rank agreement across attributions");
  compare_args.attach(cmd_compare, /*config_required=*/false);
  cmd_compare->add_option("--inputs", compare_inputs, "Attribution CSVs (direct mode)");
  cmd_compare->add_option("--out", compare_out, "Matrix JSON output (direct mode)");
  cmd_compare->add_option("--md", compare_md, "Matrix Markdown output (direct mode)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cmd_run) {
      pipeline::run_pipeline(run_args.load());
      return 0;
    }
    if (*cmd_synth) {
      auto spec = synth::synth_spec_from_json(pipeline::read_json(synth_spec_path));
      if (synth_seed) spec.seed = *synth_seed;
      auto data = synth::gen_hydro(spec);
      save_csv(data.dataset, synth_out);
      pipeline::write_json(synth_truth, data.truth.to_json());
      pipeline::write_json(synth_schema, schema_to_json(dataset_schema(data.dataset)));
      return 0;
    }

    auto run_stage = [&](const CommonArgs& args, auto stage) {
      RunConfig cfg = args.load();
      pipeline::RunDir dir(cfg.output_dir);
      dir.prepare();
      if (cfg.input.synthetic && !fs::exists(dir.data_csv())) pipeline::stage_synth(cfg, dir);
      stage(cfg, dir);
      return 0;
    };

    if (*cmd_pre) return run_stage(pre_args, pipeline::stage_preprocess);
    if (*cmd_eval) return run_stage(eval_args, pipeline::stage_eval);
    if (*cmd_rfe) return run_stage(rfe_args, pipeline::stage_rfe);
    if (*cmd_shap) return run_stage(shap_args, pipeline::stage_shap);
    if (*cmd_report) {
      RunConfig cfg = report_args.load();
      pipeline::RunDir dir(cfg.output_dir);
      pipeline::stage_report(cfg, dir);
      return 0;
    }

    if (*cmd_train) {
      if (train_grid_path.empty()) return run_stage(train_args, pipeline::stage_train);
      // grid-search mode: fit every spec, keep the best by validation R2
      RunConfig cfg = train_args.load();
      pipeline::RunDir dir(cfg.output_dir);
      dir.prepare();
      std::vector<ModelSpec> grid;
      for (const auto& e : pipeline::read_json(train_grid_path))
        grid.push_back(model_spec_from_json(e));
      auto view = pipeline::detail::load_training_view(dir);
      auto result = grid_search(grid, view.x, view.y, view.ds.weights, view.split, cfg.seed);
      save_model(*result.best, dir.model_json(train_grid_kind).string());
      pipeline::write_json(dir.root / ("grid_table_" + train_grid_kind + ".json"),
                           result.table_to_json());
      return 0;
    }

    if (*cmd_dml) {
      RunConfig cfg = dml_args.load();
      pipeline::RunDir dir(cfg.output_dir);
      dir.prepare();
      if (cfg.input.synthetic && !fs::exists(dir.data_csv())) pipeline::stage_synth(cfg, dir);
      if (dml_outcome.empty()) {
        pipeline::stage_dml(cfg, dir);
        return 0;
      }
      Dataset ds = load_dataset(dir.processed_csv().string(), dir.processed_meta().string());
      DmlOptions opts;
      opts.k_folds = cfg.dml.k_folds;
      opts.alpha = cfg.dml.alpha;
      opts.intercept = cfg.dml.intercept;
      opts.seed = cfg.seed;
      auto scan = dml_scan(ds, dml_outcome, cfg.dml.learner_spec(), opts);
      pipeline::write_json(dir.dml_json(), dml_scan_to_json(scan));
      pipeline::write_text(dir.dml_md(), dml_scan_to_markdown(scan));
      return 0;
    }

    if (*cmd_gsa) {
      if (!gsa_model.empty()) {  // direct mode
        if (gsa_data.empty()) throw ConfigError("gsa: --data is required with --model");
        Dataset ds = load_data_with_meta(gsa_data, gsa_meta);
        ModelPtr model = load_model(gsa_model);
        const std::size_t n_base = gsa_n_base.value_or(4096);
        const std::uint64_t seed = gsa_args.seed.value_or(42);
        auto gsa = gsa_over_model(*model, ds, n_base, seed);
        const std::string out_csv = gsa_out_csv.empty() ? "sobol.csv" : gsa_out_csv;
        std::string csv = "feature,s1,s1_lo,s1_hi,st,st_lo,st_hi\n";
        const auto& idx = gsa.indices;
        for (std::size_t i = 0; i < idx.features.size(); ++i)
          csv += idx.features[i] + "," + format_double(idx.s1[i]) + "," +
                 format_double(idx.s1_lo[i]) + "," + format_double(idx.s1_hi[i]) + "," +
                 format_double(idx.st[i]) + "," + format_double(idx.st_lo[i]) + "," +
                 format_double(idx.st_hi[i]) + "\n";
        pipeline::write_text(out_csv, csv);
        if (!gsa_svg_path.empty()) {
          svg::BarSeries s1{"S1", "#4477aa", idx.s1, idx.s1_lo, idx.s1_hi};
          svg::BarSeries st{"ST", "#ee6677", idx.st, idx.st_lo, idx.st_hi};
          pipeline::write_text(gsa_svg_path,
                               svg::bar_chart("Sobol indices", idx.features, {s1, st}));
        }
        return 0;
      }
      if (gsa_args.config_path.empty())
        throw ConfigError("gsa: provide either --model/--data or --config");
      RunConfig cfg = gsa_args.load();
      if (gsa_n_base) cfg.attribution.gsa_n_base = *gsa_n_base;
      pipeline::RunDir dir(cfg.output_dir);
      dir.prepare();
      pipeline::stage_gsa(cfg, dir);
      return 0;
    }

    if (*cmd_compare) {
      if (!compare_inputs.empty()) {  // direct mode over attribution CSVs
        std::vector<AttributionResult> results;
        for (const auto& path : compare_inputs) {
          std::ifstream in(path);
          if (!in) throw DataError("compare: cannot open '" + path + "'");
          results.push_back(AttributionResult::from_csv(in));
        }
        auto matrix = rank_compare(results);
        if (!compare_out.empty()) pipeline::write_json(compare_out, matrix.to_json());
        if (!compare_md.empty()) pipeline::write_text(compare_md, matrix.to_markdown());
        if (compare_out.empty() && compare_md.empty()) std::cout << matrix.to_markdown();
        return 0;
      }
      if (compare_args.config_path.empty())
        throw ConfigError("compare: provide either --inputs or --config");
      RunConfig cfg = compare_args.load();
      pipeline::RunDir dir(cfg.output_dir);
      dir.prepare();
      pipeline::stage_compare(cfg, dir);
      return 0;
    }
  } catch (const Error& e) {
    print_error(e.category_name(), e.what());
    return exit_code_for(e.category());
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return 1;
  }
  return 0;
}
