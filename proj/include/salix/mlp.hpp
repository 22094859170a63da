#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "salix/model.hpp"
#include "salix/rng.hpp"

namespace salix {

enum class Activation { Relu, LeakyRelu };
enum class Optimizer { SgdMomentum, Adam };

inline const char* to_string(Activation a) {
  return a == Activation::Relu ? "relu" : "leaky-relu";
}
inline const char* to_string(Optimizer o) {
  return o == Optimizer::SgdMomentum ? "sgd-momentum" : "adam";
}
inline Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::Relu;
  if (s == "leaky-relu") return Activation::LeakyRelu;
  throw ConfigError("unknown activation '" + s + "'");
}
inline Optimizer optimizer_from_string(const std::string& s) {
  if (s == "sgd-momentum") return Optimizer::SgdMomentum;
  if (s == "adam") return Optimizer::Adam;
  throw ConfigError("unknown optimizer '" + s + "'");
}

struct MlpParams {
  std::vector<int> hidden = {10, 10};
  Activation activation = Activation::Relu;
  int epochs = 50;
  int batch_size = 32;
  Optimizer optimizer = Optimizer::Adam;
  double learning_rate = 1e-3;
  double momentum = 0.9;

  void validate() const {
    if (hidden.empty()) throw ConfigError("mlp: at least one hidden layer required");
    for (int h : hidden)
      if (h < 1) throw ConfigError("mlp: hidden widths must be >= 1");
    if (epochs < 1) throw ConfigError("mlp: epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("mlp: batch_size must be >= 1");
    if (!(learning_rate > 0)) throw ConfigError("mlp: learning_rate must be positive");
  }

  nlohmann::json to_json() const {
    return {{"hidden", hidden},          {"activation", to_string(activation)},
            {"epochs", epochs},          {"batch_size", batch_size},
            {"optimizer", to_string(optimizer)}, {"learning_rate", learning_rate},
            {"momentum", momentum}};
  }
  static MlpParams from_json(const nlohmann::json& j) {
    MlpParams p;
    if (j.contains("hidden")) p.hidden = j["hidden"].get<std::vector<int>>();
    if (j.contains("activation")) p.activation = activation_from_string(j["activation"]);
    p.epochs = j.value("epochs", p.epochs);
    p.batch_size = j.value("batch_size", p.batch_size);
    if (j.contains("optimizer")) p.optimizer = optimizer_from_string(j["optimizer"]);
    p.learning_rate = j.value("learning_rate", p.learning_rate);
    p.momentum = j.value("momentum", p.momentum);
    return p;
  }
};

namespace mlp {

constexpr double kLeakySlope = 0.01;

// Dense feed-forward net with a linear output unit. Parameters live in one
// flat vector (per layer: weights row-major then biases) so the gradient can
// be checked against finite differences.
struct Network {
  std::vector<int> widths;  // input, hidden..., 1
  Activation activation = Activation::Relu;
  std::vector<double> params;

  static Network create(int n_inputs, const std::vector<int>& hidden, Activation act) {
    Network net;
    net.widths.push_back(n_inputs);
    for (int h : hidden) net.widths.push_back(h);
    net.widths.push_back(1);
    net.activation = act;
    std::size_t count = 0;
    for (std::size_t l = 0; l + 1 < net.widths.size(); ++l)
      count += static_cast<std::size_t>(net.widths[l + 1]) * net.widths[l] + net.widths[l + 1];
    net.params.assign(count, 0.0);
    return net;
  }

  // Glorot uniform, +-sqrt(6/(fan_in+fan_out)); biases zero.
  void init(Rng& rng) {
    std::size_t offset = 0;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
      const int fan_in = widths[l], fan_out = widths[l + 1];
      const double bound = std::sqrt(6.0 / (fan_in + fan_out));
      for (int i = 0; i < fan_out * fan_in; ++i) params[offset + i] = rng.uniform(-bound, bound);
      offset += static_cast<std::size_t>(fan_out) * fan_in;
      for (int i = 0; i < fan_out; ++i) params[offset + i] = 0.0;
      offset += static_cast<std::size_t>(fan_out);
    }
  }

  std::size_t layer_offset(std::size_t layer) const {
    std::size_t off = 0;
    for (std::size_t l = 0; l < layer; ++l)
      off += static_cast<std::size_t>(widths[l + 1]) * widths[l] + widths[l + 1];
    return off;
  }

  double act(double z) const {
    if (z > 0) return z;
    return activation == Activation::Relu ? 0.0 : kLeakySlope * z;
  }
  double act_grad(double z) const {
    if (z > 0) return 1.0;
    return activation == Activation::Relu ? 0.0 : kLeakySlope;
  }

  double forward(const double* x) const {
    std::vector<double> a(x, x + widths[0]);
    std::size_t offset = 0;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
      const int n_in = widths[l], n_out = widths[l + 1];
      std::vector<double> next(static_cast<std::size_t>(n_out));
      const double* wts = params.data() + offset;
      const double* bias = wts + static_cast<std::size_t>(n_out) * n_in;
      const bool last = (l + 2 == widths.size());
      for (int o = 0; o < n_out; ++o) {
        double z = bias[o];
        for (int i = 0; i < n_in; ++i) z += wts[o * n_in + i] * a[static_cast<std::size_t>(i)];
        next[static_cast<std::size_t>(o)] = last ? z : act(z);
      }
      a = std::move(next);
      offset += static_cast<std::size_t>(n_out) * n_in + n_out;
    }
    return a[0];
  }

  // Weighted mean squared error over the given rows and its gradient with
  // respect to every parameter: L = sum w (yhat - y)^2 / sum w.
  double loss_and_gradient(const FeatureMatrix& x, const std::vector<double>& y,
                           const std::vector<double>& w, const std::vector<std::size_t>& rows,
                           std::vector<double>& grad) const {
    grad.assign(params.size(), 0.0);
    std::vector<double> comp(params.size(), 0.0);  // Kahan compensation
    double sw = 0.0;
    for (auto r : rows) sw += w[r];
    if (sw <= 0.0) throw DataError("mlp: batch has nonpositive total weight");

    const std::size_t n_layers = widths.size() - 1;
    std::vector<std::vector<double>> z(n_layers), a(n_layers + 1);
    double loss = 0.0;

    auto accumulate = [&](std::size_t idx, double v) {
      // Neumaier-compensated add keeps the batch gradient independent of row
      // order at full batch.
      const double t = grad[idx] + v;
      if (std::fabs(grad[idx]) >= std::fabs(v))
        comp[idx] += (grad[idx] - t) + v;
      else
        comp[idx] += (v - t) + grad[idx];
      grad[idx] = t;
    };

    for (auto r : rows) {
      a[0].assign(x.row(r), x.row(r) + widths[0]);
      std::size_t offset = 0;
      for (std::size_t l = 0; l < n_layers; ++l) {
        const int n_in = widths[l], n_out = widths[l + 1];
        z[l].assign(static_cast<std::size_t>(n_out), 0.0);
        a[l + 1].assign(static_cast<std::size_t>(n_out), 0.0);
        const double* wts = params.data() + offset;
        const double* bias = wts + static_cast<std::size_t>(n_out) * n_in;
        const bool last = (l + 1 == n_layers);
        for (int o = 0; o < n_out; ++o) {
          double s = bias[o];
          for (int i = 0; i < n_in; ++i) s += wts[o * n_in + i] * a[l][static_cast<std::size_t>(i)];
          z[l][static_cast<std::size_t>(o)] = s;
          a[l + 1][static_cast<std::size_t>(o)] = last ? s : act(s);
        }
        offset += static_cast<std::size_t>(n_out) * n_in + n_out;
      }

      const double yhat = a[n_layers][0];
      const double err = yhat - y[r];
      loss += w[r] * err * err;

      std::vector<double> delta{2.0 * w[r] * err / sw};  // dL/dz at the output
      for (std::size_t l = n_layers; l-- > 0;) {
        const int n_in = widths[l], n_out = widths[l + 1];
        const std::size_t offset_l = layer_offset(l);
        const double* wts = params.data() + offset_l;
        std::vector<double> prev_delta(static_cast<std::size_t>(n_in), 0.0);
        for (int o = 0; o < n_out; ++o) {
          const double d = delta[static_cast<std::size_t>(o)];
          for (int i = 0; i < n_in; ++i) {
            accumulate(offset_l + static_cast<std::size_t>(o) * n_in + i,
                       d * a[l][static_cast<std::size_t>(i)]);
            prev_delta[static_cast<std::size_t>(i)] += d * wts[o * n_in + i];
          }
          accumulate(offset_l + static_cast<std::size_t>(n_out) * n_in + o, d);
        }
        if (l > 0)
          for (int i = 0; i < n_in; ++i)
            prev_delta[static_cast<std::size_t>(i)] *= act_grad(z[l - 1][static_cast<std::size_t>(i)]);
        delta = std::move(prev_delta);
      }
    }
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += comp[i];
    return loss / sw;
  }
};

}  // namespace mlp

class MlpModel final : public Model {
 public:
  MlpModel(std::vector<std::string> names, mlp::Network net, MlpParams params)
      : names_(std::move(names)), net_(std::move(net)), params_(std::move(params)) {}

  std::string kind() const override { return "mlp"; }
  const std::vector<std::string>& feature_names() const override { return names_; }
  const mlp::Network& network() const { return net_; }

  nlohmann::json to_json() const override {
    return {{"kind", "mlp"},
            {"version", 1},
            {"features", names_},
            {"widths", net_.widths},
            {"activation", to_string(net_.activation)},
            {"params", net_.params},
            {"config", params_.to_json()}};
  }

  static std::shared_ptr<MlpModel> from_json(const nlohmann::json& j) {
    mlp::Network net;
    net.widths = j.at("widths").get<std::vector<int>>();
    net.activation = activation_from_string(j.at("activation").get<std::string>());
    net.params = j.at("params").get<std::vector<double>>();
    return std::make_shared<MlpModel>(j.at("features").get<std::vector<std::string>>(),
                                      std::move(net), MlpParams::from_json(j.at("config")));
  }

 protected:
  std::vector<double> predict_impl(const FeatureMatrix& x) const override {
    std::vector<double> out(x.n_rows);
    for (std::size_t r = 0; r < x.n_rows; ++r) out[r] = net_.forward(x.row(r));
    return out;
  }

 private:
  std::vector<std::string> names_;
  mlp::Network net_;
  MlpParams params_;
};

// Mini-batch training with a seeded shuffle per epoch; single-threaded and
// bit-reproducible for a fixed seed. Standardized features are strongly
// recommended. Throws NumericError naming the epoch if the loss diverges.
inline ModelPtr fit_mlp(const FeatureMatrix& x, const std::vector<double>& y,
                        const std::vector<double>& w, const MlpParams& params,
                        std::uint64_t seed = 0) {
  detail::check_fit_inputs(x, y, w);
  params.validate();
  if (x.n_rows == 0) throw DataError("fit_mlp: empty training set");

  mlp::Network net = mlp::Network::create(static_cast<int>(x.n_cols()), params.hidden,
                                          params.activation);
  Rng init_rng = Rng::stream(seed, "mlp-init");
  net.init(init_rng);

  // Optimizer state.
  std::vector<double> velocity(net.params.size(), 0.0);
  std::vector<double> adam_m(net.params.size(), 0.0), adam_v(net.params.size(), 0.0);
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kAdamEps = 1e-8;
  std::size_t step = 0;

  std::vector<std::size_t> order(x.n_rows);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng shuffle_rng = Rng::stream(seed, "mlp-shuffle");

  std::vector<double> grad;
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(params.batch_size)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(params.batch_size));
      std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                     order.begin() + static_cast<std::ptrdiff_t>(end));
      const double loss = net.loss_and_gradient(x, y, w, batch, grad);
      if (!std::isfinite(loss))
        throw NumericError("fit_mlp: loss diverged at epoch " + std::to_string(epoch + 1));

      ++step;
      if (params.optimizer == Optimizer::Adam) {
        const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
        const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
        for (std::size_t i = 0; i < net.params.size(); ++i) {
          adam_m[i] = kBeta1 * adam_m[i] + (1.0 - kBeta1) * grad[i];
          adam_v[i] = kBeta2 * adam_v[i] + (1.0 - kBeta2) * grad[i] * grad[i];
          net.params[i] -= params.learning_rate * (adam_m[i] / bc1) /
                           (std::sqrt(adam_v[i] / bc2) + kAdamEps);
        }
      } else {
        for (std::size_t i = 0; i < net.params.size(); ++i) {
          velocity[i] = params.momentum * velocity[i] + grad[i];
          net.params[i] -= params.learning_rate * velocity[i];
        }
      }
    }
  }
  return std::make_shared<MlpModel>(x.names, std::move(net), params);
}

}  // namespace salix
