#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "salix/errors.hpp"
#include "salix/models.hpp"
#include "salix/synth.hpp"

namespace salix {

namespace detail {

// Fail-closed config parsing: any key outside the allowed set is an error.
inline void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                       const std::string& context) {
  if (!j.is_object()) throw ConfigError("config: '" + context + "' must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key))
      throw ConfigError("config: unknown key '" + key + "' in " + context);
}

}  // namespace detail

struct InputConfig {
  std::string data;    // CSV path; empty when synthetic
  std::string schema;  // schema JSON path
  std::optional<synth::SynthSpec> synthetic;
  nlohmann::json synthetic_echo;  // raw spec JSON, kept for the config echo

  nlohmann::json to_json() const {
    nlohmann::json j{{"data", data}, {"schema", schema}};
    if (synthetic) j["synthetic"] = synthetic_echo;
    return j;
  }
};

struct PreprocessConfig {
  double outlier_threshold = 4000.0;
  double variance_eps = 1e-12;
  double correlation_threshold = 0.95;
  bool one_hot_auto = true;                  // every categorical except the weight group
  std::vector<std::string> one_hot_columns;  // explicit list when not auto
  std::string weight_group = "basin";        // empty disables weighting
  std::map<std::string, double> density_override;
  bool standardize = true;
  double valid_fraction = 0.2;

  nlohmann::json to_json() const {
    nlohmann::json j{{"outlier_threshold", outlier_threshold},
                     {"variance_eps", variance_eps},
                     {"correlation_threshold", correlation_threshold},
                     {"weight_group", weight_group},
                     {"standardize", standardize},
                     {"valid_fraction", valid_fraction}};
    if (one_hot_auto) j["one_hot"] = "auto";
    else j["one_hot"] = one_hot_columns;
    if (!density_override.empty()) j["density_override"] = density_override;
    return j;
  }
};

struct ModelsConfig {
  bool linear = true;
  bool forest = true;
  ForestParams forest_params;
  bool gbt = true;
  GbtParams gbt_params;
  bool mlp = false;
  MlpParams mlp_params;

  std::vector<std::pair<std::string, ModelSpec>> enabled_specs() const {
    std::vector<std::pair<std::string, ModelSpec>> out;
    if (linear) out.emplace_back("linear", LinearSpec{});
    if (forest) out.emplace_back("forest", ForestSpec{forest_params});
    if (gbt) out.emplace_back("gbt", GbtSpec{gbt_params});
    if (mlp) out.emplace_back("mlp", MlpSpec{mlp_params});
    return out;
  }

  nlohmann::json to_json() const {
    return {{"linear", {{"enabled", linear}}},
            {"forest", {{"enabled", forest}, {"params", forest_params.to_json()}}},
            {"gbt", {{"enabled", gbt}, {"params", gbt_params.to_json()}}},
            {"mlp", {{"enabled", mlp}, {"params", mlp_params.to_json()}}}};
  }
};

struct DmlConfig {
  std::string learner = "gbt";
  nlohmann::json learner_params = {{"n_rounds", 60}, {"tree", {{"max_depth", 3}}}};
  int k_folds = 5;
  double alpha = 0.05;
  bool intercept = false;
  bool standardize_before_dml = false;

  ModelSpec learner_spec() const {
    return model_spec_from_json({{"kind", learner}, {"params", learner_params}});
  }

  nlohmann::json to_json() const {
    return {{"learner", learner},       {"learner_params", learner_params},
            {"k_folds", k_folds},       {"alpha", alpha},
            {"intercept", intercept},   {"standardize_before_dml", standardize_before_dml}};
  }
};

struct AttributionConfig {
  std::string shap_mode = "kernel";
  std::size_t shap_coalitions = 1000;
  std::size_t shap_background = 100;  // capped at the train row count
  std::size_t shap_explain_rows = 25;
  std::size_t gsa_n_base = 4096;
  std::size_t gsa_bootstrap = 200;
  std::string gsa_sampling = "uniform-range";
  std::size_t rfe_min_features = 1;
  ForestParams rfe_forest{.n_trees = 50,
                          .tree = TreeParams{.max_depth = 10, .min_samples_leaf = 2,
                                             .feature_subsample = 1.0 / 3.0}};

  nlohmann::json to_json() const {
    return {{"shap",
             {{"mode", shap_mode},
              {"n_coalitions", shap_coalitions},
              {"background", shap_background},
              {"explain_rows", shap_explain_rows}}},
            {"gsa",
             {{"n_base", gsa_n_base}, {"bootstrap", gsa_bootstrap}, {"sampling", gsa_sampling}}},
            {"rfe", {{"min_features", rfe_min_features}, {"forest", rfe_forest.to_json()}}}};
  }
};

struct RunConfig {
  int version = 1;
  std::uint64_t seed = 42;
  InputConfig input;
  PreprocessConfig preprocess;
  ModelsConfig models;
  DmlConfig dml;
  AttributionConfig attribution;
  std::string output_dir = "out";

  nlohmann::json to_json() const {
    return {{"version", version},
            {"seed", seed},
            {"input", input.to_json()},
            {"preprocess", preprocess.to_json()},
            {"models", models.to_json()},
            {"dml", dml.to_json()},
            {"attribution", attribution.to_json()},
            {"output_dir", output_dir}};
  }

  static RunConfig from_json(const nlohmann::json& j) {
    detail::check_keys(j, {"version", "seed", "input", "preprocess", "models", "dml",
                           "attribution", "output_dir"},
                       "top level");
    RunConfig cfg;
    cfg.version = j.value("version", 1);
    if (cfg.version != 1) throw ConfigError("config: unsupported version");
    cfg.seed = j.value("seed", cfg.seed);
    cfg.output_dir = j.value("output_dir", cfg.output_dir);

    if (j.contains("input")) {
      detail::check_keys(j["input"], {"data", "schema", "synthetic"}, "input");
      cfg.input.data = j["input"].value("data", "");
      cfg.input.schema = j["input"].value("schema", "");
      if (j["input"].contains("synthetic")) {
        detail::check_keys(j["input"]["synthetic"],
                           {"n_drills", "years_per_drill", "basin_sizes", "effects", "noise_sd",
                            "missing_rate", "outlier_rows", "seed"},
                           "input.synthetic");
        cfg.input.synthetic = synth::synth_spec_from_json(j["input"]["synthetic"]);
        cfg.input.synthetic_echo = j["input"]["synthetic"];
      }
    }
    if (!cfg.input.synthetic && cfg.input.data.empty())
      throw ConfigError("config: input needs either a data path or a synthetic spec");
    if (!cfg.input.data.empty() && cfg.input.schema.empty())
      throw ConfigError("config: input.data needs input.schema");

    if (j.contains("preprocess")) {
      const auto& p = j["preprocess"];
      detail::check_keys(p,
                         {"outlier_threshold", "variance_eps", "correlation_threshold", "one_hot",
                          "weight_group", "density_override", "standardize", "valid_fraction"},
                         "preprocess");
      cfg.preprocess.outlier_threshold = p.value("outlier_threshold", cfg.preprocess.outlier_threshold);
      cfg.preprocess.variance_eps = p.value("variance_eps", cfg.preprocess.variance_eps);
      cfg.preprocess.correlation_threshold =
          p.value("correlation_threshold", cfg.preprocess.correlation_threshold);
      if (p.contains("one_hot")) {
        if (p["one_hot"].is_string() && p["one_hot"] == "auto") {
          cfg.preprocess.one_hot_auto = true;
        } else if (p["one_hot"].is_array()) {
          cfg.preprocess.one_hot_auto = false;
          cfg.preprocess.one_hot_columns = p["one_hot"].get<std::vector<std::string>>();
        } else {
          throw ConfigError("config: preprocess.one_hot must be \"auto\" or a list of columns");
        }
      }
      cfg.preprocess.weight_group = p.value("weight_group", cfg.preprocess.weight_group);
      if (p.contains("density_override"))
        cfg.preprocess.density_override =
            p["density_override"].get<std::map<std::string, double>>();
      cfg.preprocess.standardize = p.value("standardize", cfg.preprocess.standardize);
      cfg.preprocess.valid_fraction = p.value("valid_fraction", cfg.preprocess.valid_fraction);
    }

    if (j.contains("models")) {
      detail::check_keys(j["models"], {"linear", "forest", "gbt", "mlp"}, "models");
      auto parse_model = [&](const char* name, bool& enabled, auto parse_params) {
        if (!j["models"].contains(name)) return;
        detail::check_keys(j["models"][name], {"enabled", "params"},
                           std::string("models.") + name);
        enabled = j["models"][name].value("enabled", enabled);
        if (j["models"][name].contains("params")) parse_params(j["models"][name]["params"]);
      };
      parse_model("linear", cfg.models.linear, [](const nlohmann::json&) {});
      parse_model("forest", cfg.models.forest, [&](const nlohmann::json& p) {
        cfg.models.forest_params = ForestParams::from_json(p);
      });
      parse_model("gbt", cfg.models.gbt, [&](const nlohmann::json& p) {
        cfg.models.gbt_params = GbtParams::from_json(p);
      });
      parse_model("mlp", cfg.models.mlp, [&](const nlohmann::json& p) {
        cfg.models.mlp_params = MlpParams::from_json(p);
      });
    }

    if (j.contains("dml")) {
      detail::check_keys(j["dml"],
                         {"learner", "learner_params", "k_folds", "alpha", "intercept",
                          "standardize_before_dml"},
                         "dml");
      cfg.dml.learner = j["dml"].value("learner", cfg.dml.learner);
      if (j["dml"].contains("learner_params")) cfg.dml.learner_params = j["dml"]["learner_params"];
      cfg.dml.k_folds = j["dml"].value("k_folds", cfg.dml.k_folds);
      cfg.dml.alpha = j["dml"].value("alpha", cfg.dml.alpha);
      cfg.dml.intercept = j["dml"].value("intercept", cfg.dml.intercept);
      cfg.dml.standardize_before_dml =
          j["dml"].value("standardize_before_dml", cfg.dml.standardize_before_dml);
      cfg.dml.learner_spec();  // validates kind + params now, not at stage time
    }

    if (j.contains("attribution")) {
      detail::check_keys(j["attribution"], {"shap", "gsa", "rfe"}, "attribution");
      if (j["attribution"].contains("shap")) {
        const auto& s = j["attribution"]["shap"];
        detail::check_keys(s, {"mode", "n_coalitions", "background", "explain_rows"},
                           "attribution.shap");
        cfg.attribution.shap_mode = s.value("mode", cfg.attribution.shap_mode);
        if (cfg.attribution.shap_mode != "kernel" && cfg.attribution.shap_mode != "exact")
          throw ConfigError("config: attribution.shap.mode must be 'kernel' or 'exact'");
        cfg.attribution.shap_coalitions = s.value("n_coalitions", cfg.attribution.shap_coalitions);
        cfg.attribution.shap_background = s.value("background", cfg.attribution.shap_background);
        cfg.attribution.shap_explain_rows = s.value("explain_rows", cfg.attribution.shap_explain_rows);
      }
      if (j["attribution"].contains("gsa")) {
        const auto& g = j["attribution"]["gsa"];
        detail::check_keys(g, {"n_base", "bootstrap", "sampling"}, "attribution.gsa");
        cfg.attribution.gsa_n_base = g.value("n_base", cfg.attribution.gsa_n_base);
        cfg.attribution.gsa_bootstrap = g.value("bootstrap", cfg.attribution.gsa_bootstrap);
        cfg.attribution.gsa_sampling = g.value("sampling", cfg.attribution.gsa_sampling);
        if (cfg.attribution.gsa_sampling != "uniform-range" &&
            cfg.attribution.gsa_sampling != "empirical-marginal")
          throw ConfigError(
              "config: attribution.gsa.sampling must be 'uniform-range' or 'empirical-marginal'");
      }
      if (j["attribution"].contains("rfe")) {
        const auto& r = j["attribution"]["rfe"];
        detail::check_keys(r, {"min_features", "forest"}, "attribution.rfe");
        cfg.attribution.rfe_min_features = r.value("min_features", cfg.attribution.rfe_min_features);
        if (r.contains("forest"))
          cfg.attribution.rfe_forest = ForestParams::from_json(r["forest"]);
      }
    }
    return cfg;
  }

  static RunConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return from_json(j);
  }
};

}  // namespace salix
