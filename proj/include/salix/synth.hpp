#pragma once

#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "salix/dataset.hpp"
#include "salix/model.hpp"
#include "salix/rng.hpp"

namespace salix::synth {

// ---------------------------------------------------------------------------
// Ishigami oracle for the Sobol estimators.
// f(x) = sin x1 + a sin^2 x2 + b x3^4 sin x1 over [-pi, pi]^3.
// Closed-form variance decomposition:
//   V1 = 0.5 (1 + b pi^4 / 5)^2,  V2 = a^2 / 8,  V13 = 8 b^2 pi^8 / 225.
// ---------------------------------------------------------------------------
struct IshigamiOracle {
  double a = 7.0, b = 0.1;
  ModelPtr model;
  std::vector<std::array<double, 2>> bounds;
  std::vector<double> analytic_s1;
  std::vector<double> analytic_st;

  double eval(double x1, double x2, double x3) const {
    return std::sin(x1) + a * std::sin(x2) * std::sin(x2) + b * x3 * x3 * x3 * x3 * std::sin(x1);
  }
};

inline IshigamiOracle gen_ishigami(double a = 7.0, double b = 0.1) {
  IshigamiOracle oracle;
  oracle.a = a;
  oracle.b = b;
  const double pi = std::numbers::pi;
  oracle.bounds.assign(3, {-pi, pi});
  oracle.model = std::make_shared<FunctionModel>(
      std::vector<std::string>{"x1", "x2", "x3"},
      [a, b](const double* x) {
        return std::sin(x[0]) + a * std::sin(x[1]) * std::sin(x[1]) +
               b * x[2] * x[2] * x[2] * x[2] * std::sin(x[0]);
      });
  const double pi4 = pi * pi * pi * pi;
  const double v1 = 0.5 * (1.0 + b * pi4 / 5.0) * (1.0 + b * pi4 / 5.0);
  const double v2 = a * a / 8.0;
  const double v13 = 8.0 * b * b * pi4 * pi4 / 225.0;
  const double v = v1 + v2 + v13;
  oracle.analytic_s1 = {v1 / v, v2 / v, 0.0};
  oracle.analytic_st = {(v1 + v13) / v, v2 / v, v13 / v};
  return oracle;
}

// ---------------------------------------------------------------------------
// Linear-Gaussian causal generator for the DML oracle.
// X has AR(1) correlation rho=0.3; T = X gamma + t-noise;
// Y = theta T + X beta + y-noise. Each row is its own drill so grouped
// cross-fitting degenerates to plain row folds.
// ---------------------------------------------------------------------------
struct LinearCausalSpec {
  std::size_t n = 2000;
  std::size_t p = 5;
  double theta = 2.0;
  double y_noise_sd = 1.0;
  double t_noise_sd = 1.0;
  std::uint64_t seed = 0;
};

struct LinearCausalTruth {
  double theta = 0.0;
  std::vector<double> gamma;
  std::vector<double> beta;
};

struct LinearCausalData {
  Dataset dataset;
  LinearCausalTruth truth;
  std::string treatment = "t";
  std::string outcome = "cl_mg_l";
  std::vector<std::string> covariates;
};

inline LinearCausalData gen_linear_causal(const LinearCausalSpec& spec) {
  if (spec.n < 50) throw ConfigError("gen_linear_causal: n must be >= 50");
  if (spec.p < 1) throw ConfigError("gen_linear_causal: p must be >= 1");

  Rng coef_rng = Rng::stream(spec.seed, "coef");
  LinearCausalTruth truth;
  truth.theta = spec.theta;
  truth.gamma.resize(spec.p);
  truth.beta.resize(spec.p);
  // Confounding strength keeps signal-to-noise moderate: strong enough that
  // skipping the nuisance step visibly biases theta, weak enough that tree
  // learners can remove it within the estimator's own standard error.
  for (auto& g : truth.gamma) g = coef_rng.normal(0.0, 0.3);
  for (auto& b : truth.beta) b = coef_rng.normal(0.0, 0.6);

  Rng rng = Rng::stream(spec.seed, "rows");
  constexpr double kRho = 0.3;
  const double kResid = std::sqrt(1.0 - kRho * kRho);

  std::vector<std::vector<double>> x(spec.p, std::vector<double>(spec.n));
  std::vector<double> t(spec.n), y(spec.n);
  for (std::size_t r = 0; r < spec.n; ++r) {
    double prev = 0.0;
    for (std::size_t j = 0; j < spec.p; ++j) {
      const double z = rng.normal();
      const double v = (j == 0) ? z : kRho * prev + kResid * z;
      x[j][r] = v;
      prev = v;
    }
    double xg = 0.0, xb = 0.0;
    for (std::size_t j = 0; j < spec.p; ++j) {
      xg += truth.gamma[j] * x[j][r];
      xb += truth.beta[j] * x[j][r];
    }
    t[r] = xg + spec.t_noise_sd * rng.normal();
    y[r] = spec.theta * t[r] + xb + spec.y_noise_sd * rng.normal();
  }

  LinearCausalData out;
  out.truth = truth;

  Column drill;
  drill.spec = {"drill", ColumnKind::GroupKey, ""};
  for (std::size_t r = 0; r < spec.n; ++r) drill.str.push_back("d" + std::to_string(r));
  drill.missing.assign(spec.n, 0);
  out.dataset.columns.push_back(std::move(drill));

  for (std::size_t j = 0; j < spec.p; ++j) {
    Column c;
    c.spec = {"x" + std::to_string(j + 1), ColumnKind::Numeric, ""};
    c.num = std::move(x[j]);
    c.missing.assign(spec.n, 0);
    out.covariates.push_back(c.spec.name);
    out.dataset.columns.push_back(std::move(c));
  }
  Column tc;
  tc.spec = {"t", ColumnKind::Numeric, ""};
  tc.num = std::move(t);
  tc.missing.assign(spec.n, 0);
  out.dataset.columns.push_back(std::move(tc));

  Column yc;
  yc.spec = {"cl_mg_l", ColumnKind::Target, ""};
  yc.num = std::move(y);
  yc.missing.assign(spec.n, 0);
  out.dataset.columns.push_back(std::move(yc));

  out.dataset.weights.assign(spec.n, 1.0);
  out.dataset.log_step("gen_linear_causal",
                       "n=" + std::to_string(spec.n) + " p=" + std::to_string(spec.p) +
                           " seed=" + std::to_string(spec.seed),
                       0, spec.n);
  return out;
}

// ---------------------------------------------------------------------------
// Borehole-year generator with planted ground truth, the stand-in for the
// private national dataset. Planted signs: TWI strongly positive,
// precipitation negative, temperature positive, distance to saline bodies
// negative; fishponds and factory counts are inert.
// ---------------------------------------------------------------------------
enum class EffectForm { Linear, Threshold, Interaction };

inline const char* to_string(EffectForm f) {
  switch (f) {
    case EffectForm::Linear: return "linear";
    case EffectForm::Threshold: return "threshold";
    case EffectForm::Interaction: return "interaction";
  }
  return "?";
}

struct PlantedEffect {
  std::string feature;
  double coef = 0.0;        // mg/L per standardized unit
  EffectForm form = EffectForm::Linear;
  std::string partner;      // second feature for interaction form
};

struct SynthSpec {
  std::size_t n_drills = 200;
  std::size_t years_per_drill = 15;
  std::vector<std::size_t> basin_sizes = {80, 60, 30, 20, 10};
  std::vector<PlantedEffect> effects;  // empty -> default planted map
  double noise_sd = 120.0;
  double missing_rate = 0.02;
  std::size_t outlier_rows = 8;
  std::uint64_t seed = 0;

  void validate() const {
    std::size_t total = 0;
    for (auto b : basin_sizes) total += b;
    if (total != n_drills)
      throw ConfigError("gen_hydro: basin_sizes must sum to n_drills");
    if (n_drills == 0 || years_per_drill == 0)
      throw ConfigError("gen_hydro: need at least one drill and one year");
    if (noise_sd < 0) throw ConfigError("gen_hydro: noise_sd must be >= 0");
  }
};

inline std::vector<PlantedEffect> default_hydro_effects() {
  return {
      {"twi", 420.0, EffectForm::Threshold, ""},
      {"precip_mm", -240.0, EffectForm::Linear, ""},
      {"max_temp_c", 170.0, EffectForm::Linear, ""},
      {"dist_saline_m", -80.0, EffectForm::Linear, ""},
      {"tww_cl_mg_l", 65.0, EffectForm::Linear, ""},
      {"drill_depth_m", 90.0, EffectForm::Threshold, ""},
      {"max_temp_c", -130.0, EffectForm::Interaction, "precip_mm"},
  };
}

struct HydroTruth {
  std::vector<PlantedEffect> effects;
  std::vector<std::string> inert;
  double noise_sd = 0.0;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const {
    nlohmann::json eff = nlohmann::json::array();
    for (const auto& e : effects) {
      nlohmann::json je{{"feature", e.feature}, {"coef", e.coef}, {"form", to_string(e.form)}};
      if (!e.partner.empty()) je["partner"] = e.partner;
      eff.push_back(std::move(je));
    }
    return {{"version", 1},
            {"kind", "hydro"},
            {"effects", eff},
            {"inert", inert},
            {"noise_sd", noise_sd},
            {"seed", seed}};
  }
};

struct HydroData {
  Dataset dataset;
  HydroTruth truth;
  std::vector<std::string> top_drivers;  // |coef|-ordered planted features
};

namespace detail {

// Feature scaling constants used to express planted effects per standardized
// unit: {center, scale} of each feature's generating distribution.
struct FeatureScale {
  double center, scale;
};

inline const std::map<std::string, FeatureScale>& hydro_scales() {
  static const std::map<std::string, FeatureScale> scales = {
      {"twi", {7.0, 2.5}},
      {"precip_mm", {380.0, 170.0}},
      {"max_temp_c", {27.0, 4.0}},
      {"min_temp_c", {15.0, 4.0}},
      {"aridity_index", {0.5, 0.22}},
      {"dist_saline_m", {9500.0, 5500.0}},
      {"dist_river_m", {2500.0, 1450.0}},
      {"shoreline_dist_m", {25000.0, 14500.0}},
      {"drill_depth_m", {160.0, 80.0}},
      {"tww_cl_mg_l", {200.0, 115.0}},
      {"tww_irrigated_area_m2", {500000.0, 290000.0}},
      {"agri_field_area_m2", {450000.0, 260000.0}},
      {"clay_pct", {33.0, 12.0}},
      {"sand_pct", {34.0, 12.0}},
      {"silt_pct", {33.0, 12.0}},
      {"population_density", {380.0, 290.0}},
      {"fishponds_per_km2", {1.5, 1.2}},
      {"factories_per_km2", {2.0, 1.5}},
  };
  return scales;
}

}  // namespace detail

inline HydroData gen_hydro(const SynthSpec& spec_in) {
  SynthSpec spec = spec_in;
  spec.validate();
  if (spec.effects.empty()) spec.effects = default_hydro_effects();

  const std::size_t n_rows = spec.n_drills * spec.years_per_drill;
  const auto& scales = detail::hydro_scales();

  HydroData out;
  out.truth.effects = spec.effects;
  out.truth.noise_sd = spec.noise_sd;
  out.truth.seed = spec.seed;
  out.truth.inert = {"fishponds_per_km2", "factories_per_km2", "population_density",
                     "clay_pct", "sand_pct", "silt_pct", "dist_river_m",
                     "shoreline_dist_m", "tww_irrigated_area_m2", "agri_field_area_m2",
                     "min_temp_c", "aridity_index", "lulc"};

  // |coef|-ranked distinct planted features
  {
    std::map<std::string, double> total;
    for (const auto& e : spec.effects) total[e.feature] += std::fabs(e.coef);
    std::vector<std::pair<double, std::string>> ranked;
    for (const auto& [f, c] : total) ranked.emplace_back(c, f);
    std::sort(ranked.rbegin(), ranked.rend());
    for (const auto& [c, f] : ranked) out.top_drivers.push_back(f);
  }

  std::vector<std::string> drill_col(n_rows), basin_col(n_rows), lulc_col(n_rows);
  std::vector<double> year_col(n_rows);
  std::map<std::string, std::vector<double>> num;
  for (const auto& [name, sc] : scales) num[name].assign(n_rows, 0.0);
  std::vector<double> target(n_rows, 0.0);

  static const char* kLulcLevels[3] = {"agricultural", "natural", "urban"};

  std::size_t drill_index = 0;
  std::size_t row = 0;
  for (std::size_t b = 0; b < spec.basin_sizes.size(); ++b) {
    Rng basin_rng = Rng::stream(spec.seed, "basin-" + std::to_string(b));
    // Basin-level climate offsets create the geographic imbalance signal.
    const double basin_precip = basin_rng.uniform(-120, 120);
    const double basin_temp = basin_rng.uniform(-2.5, 2.5);

    for (std::size_t d = 0; d < spec.basin_sizes[b]; ++d, ++drill_index) {
      Rng rng = Rng::stream(spec.seed, "drill-" + std::to_string(drill_index));
      const std::string drill_name = "d" + std::to_string(1000 + drill_index);
      const std::string basin_name = "basin_" + std::to_string(b + 1);

      // Static per-drill attributes.
      const double twi = rng.uniform(2.0, 12.0);
      const double dist_saline = rng.uniform(200.0, 19000.0);
      const double dist_river = rng.uniform(50.0, 5000.0);
      const double shoreline = rng.uniform(500.0, 50000.0);
      const double depth = rng.uniform(20.0, 300.0);
      double clay = rng.uniform(10.0, 60.0);
      double sand = rng.uniform(10.0, 60.0);
      double silt = std::max(5.0, 100.0 - clay - sand);
      const double popdens = std::exp(rng.normal(5.5, 0.8));
      const double fishponds = std::floor(rng.uniform(0.0, 4.0));
      const double factories = std::floor(rng.uniform(0.0, 5.0));
      const char* lulc = kLulcLevels[rng.uniform_int(3)];

      for (std::size_t t = 0; t < spec.years_per_drill; ++t, ++row) {
        drill_col[row] = drill_name;
        basin_col[row] = basin_name;
        lulc_col[row] = lulc;
        year_col[row] = 2000.0 + static_cast<double>(t);

        const double precip =
            std::max(20.0, 380.0 + basin_precip + rng.normal(0.0, 130.0));
        const double max_temp = 27.0 + basin_temp + rng.normal(0.0, 3.0);
        const double min_temp = max_temp - rng.uniform(8.0, 16.0);
        // Correlated with climate but below the 0.95 pruning bar.
        const double aridity =
            std::clamp(0.5 - 0.0011 * (precip - 380.0) + 0.02 * (max_temp - 27.0) +
                           rng.normal(0.0, 0.1),
                       0.01, 1.2);
        const double tww_cl = rng.uniform(0.0, 400.0);
        const double tww_area = rng.uniform(0.0, 1e6);
        const double agri_area = rng.uniform(0.0, 9e5);

        num["twi"][row] = twi;
        num["precip_mm"][row] = precip;
        num["max_temp_c"][row] = max_temp;
        num["min_temp_c"][row] = min_temp;
        num["aridity_index"][row] = aridity;
        num["dist_saline_m"][row] = dist_saline;
        num["dist_river_m"][row] = dist_river;
        num["shoreline_dist_m"][row] = shoreline;
        num["drill_depth_m"][row] = depth;
        num["tww_cl_mg_l"][row] = tww_cl;
        num["tww_irrigated_area_m2"][row] = tww_area;
        num["agri_field_area_m2"][row] = agri_area;
        num["clay_pct"][row] = clay;
        num["sand_pct"][row] = sand;
        num["silt_pct"][row] = silt;
        num["population_density"][row] = popdens;
        num["fishponds_per_km2"][row] = fishponds;
        num["factories_per_km2"][row] = factories;

        double cl = 900.0;
        for (const auto& eff : spec.effects) {
          const auto& sc = scales.at(eff.feature);
          const double z = (num[eff.feature][row] - sc.center) / sc.scale;
          switch (eff.form) {
            case EffectForm::Linear:
              cl += eff.coef * z;
              break;
            case EffectForm::Threshold:  // step above the feature's center
              cl += z > 0.0 ? eff.coef : 0.0;
              break;
            case EffectForm::Interaction: {
              const auto& psc = scales.at(eff.partner);
              const double pz = (num[eff.partner][row] - psc.center) / psc.scale;
              cl += eff.coef * z * pz;
              break;
            }
          }
        }
        cl += spec.noise_sd * rng.normal();
        target[row] = std::max(5.0, cl);
      }
    }
  }

  // A few extreme rows exercise the outlier gate.
  Rng outlier_rng = Rng::stream(spec.seed, "outliers");
  for (std::size_t k = 0; k < std::min<std::size_t>(spec.outlier_rows, n_rows); ++k) {
    const std::size_t r = static_cast<std::size_t>(outlier_rng.uniform_int(n_rows));
    target[r] = 4200.0 + outlier_rng.uniform(0.0, 3000.0);
  }

  Dataset& ds = out.dataset;
  auto add_str = [&](const std::string& name, ColumnKind kind, std::vector<std::string> values) {
    Column c;
    c.spec = {name, kind, ""};
    c.missing.assign(values.size(), 0);
    c.str = std::move(values);
    ds.columns.push_back(std::move(c));
  };
  auto add_num = [&](const std::string& name, ColumnKind kind, std::vector<double> values,
                     const std::string& units = "") {
    Column c;
    c.spec = {name, kind, units};
    c.missing.assign(values.size(), 0);
    c.num = std::move(values);
    ds.columns.push_back(std::move(c));
  };

  add_str("drill", ColumnKind::GroupKey, std::move(drill_col));
  add_str("basin", ColumnKind::Categorical, std::move(basin_col));
  add_num("year", ColumnKind::TimeKey, std::move(year_col));
  add_num("precip_mm", ColumnKind::Numeric, std::move(num["precip_mm"]), "mm");
  add_num("max_temp_c", ColumnKind::Numeric, std::move(num["max_temp_c"]), "C");
  add_num("min_temp_c", ColumnKind::Numeric, std::move(num["min_temp_c"]), "C");
  add_num("aridity_index", ColumnKind::Numeric, std::move(num["aridity_index"]));
  add_num("twi", ColumnKind::Numeric, std::move(num["twi"]));
  add_num("dist_saline_m", ColumnKind::Numeric, std::move(num["dist_saline_m"]), "m");
  add_num("dist_river_m", ColumnKind::Numeric, std::move(num["dist_river_m"]), "m");
  add_num("shoreline_dist_m", ColumnKind::Numeric, std::move(num["shoreline_dist_m"]), "m");
  add_num("drill_depth_m", ColumnKind::Numeric, std::move(num["drill_depth_m"]), "m");
  add_num("tww_cl_mg_l", ColumnKind::Numeric, std::move(num["tww_cl_mg_l"]), "mg/L");
  add_num("tww_irrigated_area_m2", ColumnKind::Numeric, std::move(num["tww_irrigated_area_m2"]), "m2");
  add_num("agri_field_area_m2", ColumnKind::Numeric, std::move(num["agri_field_area_m2"]), "m2");
  add_num("clay_pct", ColumnKind::Numeric, std::move(num["clay_pct"]), "%");
  add_num("sand_pct", ColumnKind::Numeric, std::move(num["sand_pct"]), "%");
  add_num("silt_pct", ColumnKind::Numeric, std::move(num["silt_pct"]), "%");
  add_str("lulc", ColumnKind::Categorical, std::move(lulc_col));
  add_num("population_density", ColumnKind::Numeric, std::move(num["population_density"]));
  add_num("fishponds_per_km2", ColumnKind::Numeric, std::move(num["fishponds_per_km2"]));
  add_num("factories_per_km2", ColumnKind::Numeric, std::move(num["factories_per_km2"]));
  add_num("cl_mg_l", ColumnKind::Target, std::move(target), "mg/L");

  ds.weights.assign(n_rows, 1.0);

  // Missing cells over numeric predictors only; keys and target stay intact.
  if (spec.missing_rate > 0) {
    Rng miss_rng = Rng::stream(spec.seed, "missing");
    for (auto& c : ds.columns) {
      if (c.spec.kind != ColumnKind::Numeric) continue;
      for (std::size_t r = 0; r < n_rows; ++r) {
        if (miss_rng.uniform01() < spec.missing_rate) {
          c.num[r] = std::numeric_limits<double>::quiet_NaN();
          c.missing[r] = 1;
        }
      }
    }
  }

  ds.log_step("gen_hydro",
              "drills=" + std::to_string(spec.n_drills) +
                  " years=" + std::to_string(spec.years_per_drill) +
                  " seed=" + std::to_string(spec.seed),
              0, n_rows);
  return out;
}

inline SynthSpec synth_spec_from_json(const nlohmann::json& j) {
  SynthSpec spec;
  spec.n_drills = j.value("n_drills", spec.n_drills);
  spec.years_per_drill = j.value("years_per_drill", spec.years_per_drill);
  if (j.contains("basin_sizes")) spec.basin_sizes = j["basin_sizes"].get<std::vector<std::size_t>>();
  spec.noise_sd = j.value("noise_sd", spec.noise_sd);
  spec.missing_rate = j.value("missing_rate", spec.missing_rate);
  spec.outlier_rows = j.value("outlier_rows", spec.outlier_rows);
  spec.seed = j.value("seed", spec.seed);
  if (j.contains("effects")) {
    for (const auto& e : j["effects"]) {
      PlantedEffect eff;
      eff.feature = e.at("feature").get<std::string>();
      eff.coef = e.at("coef").get<double>();
      const auto form = e.value("form", std::string("linear"));
      if (form == "linear") eff.form = EffectForm::Linear;
      else if (form == "threshold") eff.form = EffectForm::Threshold;
      else if (form == "interaction") eff.form = EffectForm::Interaction;
      else throw ConfigError("gen_hydro: unknown effect form '" + form + "'");
      eff.partner = e.value("partner", std::string());
      spec.effects.push_back(std::move(eff));
    }
  }
  spec.validate();
  return spec;
}

}  // namespace salix::synth
