#include "parcel/autonet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "parcel/error.hpp"
#include "parcel/eval.hpp"
#include "parcel/random.hpp"

namespace parcel {

std::string_view to_string(AutoencoderVariant v) {
  switch (v) {
    case AutoencoderVariant::ae: return "ae";
    case AutoencoderVariant::vae: return "vae";
    case AutoencoderVariant::dae: return "dae";
  }
  return "ae";
}

AutoencoderVariant autoencoder_variant_from_string(std::string_view name) {
  if (name == "ae") return AutoencoderVariant::ae;
  if (name == "vae") return AutoencoderVariant::vae;
  if (name == "dae") return AutoencoderVariant::dae;
  throw InvalidArgument(fmt::format("unknown autoencoder variant '{}'", name));
}

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
    case Activation::elu: return "elu";
    case Activation::linear: return "linear";
  }
  return "linear";
}

Activation activation_from_string(std::string_view name) {
  if (name == "relu") return Activation::relu;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "elu") return Activation::elu;
  if (name == "linear") return Activation::linear;
  throw InvalidArgument(fmt::format("unknown activation '{}'", name));
}

void NetworkSpec::validate() const {
  if (input_features < 1) throw InvalidArgument("input_features must be >= 1");
  if (hidden_layers.empty()) throw InvalidArgument("an autoencoder needs at least one hidden layer");
  for (std::size_t i = 0; i < hidden_layers.size(); ++i) {
    if (hidden_layers[i] < 1) throw InvalidArgument("hidden layer widths must be >= 1");
    if (hidden_layers[i] != hidden_layers[hidden_layers.size() - 1 - i])
      throw InvalidArgument("hidden layers must be symmetric around the bottleneck");
  }
  if (hidden_layers.size() % 2 == 0) throw InvalidArgument("hidden layers need a single bottleneck layer");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw InvalidArgument("dropout_rate must lie in [0,1)");
  if (!(noise_sigma >= 0.0)) throw InvalidArgument("noise_sigma must be >= 0");
  if (noise_sigma > 0.0 && variant != AutoencoderVariant::dae)
    throw InvalidArgument("input noise is only defined for the denoising variant");
  if (!(kl_weight >= 0.0)) throw InvalidArgument("kl_weight must be >= 0");
}

NetworkSpec NetworkSpec::preset_ae() {
  NetworkSpec s;
  s.variant = AutoencoderVariant::ae;
  s.input_features = 25;
  s.hidden_layers = {8, 4, 8};
  s.boundary_activation = Activation::relu;
  s.hidden_activation = Activation::sigmoid;
  s.dropout_rate = 0.2;
  return s;
}

NetworkSpec NetworkSpec::preset_vae() {
  NetworkSpec s;
  s.variant = AutoencoderVariant::vae;
  s.input_features = 15;
  s.hidden_layers = {8, 4, 8};
  s.latent_dim = 4;
  s.boundary_activation = Activation::sigmoid;
  s.hidden_activation = Activation::elu;
  s.dropout_rate = 0.5;
  s.kl_weight = 1.0;
  return s;
}

NetworkSpec NetworkSpec::preset_dae() {
  NetworkSpec s;
  s.variant = AutoencoderVariant::dae;
  s.input_features = 25;
  s.hidden_layers = {8, 4, 2, 4, 8};
  s.boundary_activation = Activation::relu;
  s.hidden_activation = Activation::sigmoid;
  s.dropout_rate = 0.1;
  s.noise_sigma = 0.2;
  return s;
}

NetworkSpec NetworkSpec::preset(AutoencoderVariant variant) {
  switch (variant) {
    case AutoencoderVariant::vae: return preset_vae();
    case AutoencoderVariant::dae: return preset_dae();
    default: return preset_ae();
  }
}

void TrainConfig::validate() const {
  if (epochs < 1) throw InvalidArgument("epochs must be >= 1");
  if (batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw InvalidArgument("learning_rate must be > 0");
  if (!(adam_beta1 > 0.0 && adam_beta1 < adam_beta2 && adam_beta2 < 1.0))
    throw InvalidArgument("Adam betas must satisfy 0 < beta1 < beta2 < 1");
  if (!(adam_epsilon > 0.0)) throw InvalidArgument("adam_epsilon must be > 0");
  if (early_stop_patience < 0) throw InvalidArgument("early_stop_patience must be >= 0");
}

// ---------------------------------------------------------------------------

namespace {

using ConstMap = Eigen::Map<const Matrix>;
using ConstVecMap = Eigen::Map<const Eigen::RowVectorXd>;

void activate(Activation a, const Matrix& z, Matrix& out) {
  switch (a) {
    case Activation::relu: out = z.cwiseMax(0.0); break;
    case Activation::sigmoid: out = z.unaryExpr([](double v) { return v >= 0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v)); }); break;
    case Activation::elu: out = z.unaryExpr([](double v) { return v > 0 ? v : std::expm1(v); }); break;
    case Activation::linear: out = z; break;
  }
}

/// Derivative of the activation evaluated at pre-activation z, given the activation output y.
Matrix activation_grad(Activation a, const Matrix& z, const Matrix& y) {
  switch (a) {
    case Activation::relu: return z.unaryExpr([](double v) { return v > 0 ? 1.0 : 0.0; });
    case Activation::sigmoid: return y.array() * (1.0 - y.array());
    case Activation::elu: return z.unaryExpr([](double v) { return v > 0 ? 1.0 : std::exp(v); });
    case Activation::linear: return Matrix::Ones(z.rows(), z.cols());
  }
  return Matrix::Ones(z.rows(), z.cols());
}

struct LayerCache {
  Matrix input, pre, post;  // post = activation output before dropout
};

}  // namespace

Network::Network(const NetworkSpec& spec) {
  spec.validate();
  kl_weight_ = spec.kl_weight;
  std::size_t offset = 0;
  auto add = [&](std::size_t in, std::size_t out, Activation act, bool dropout) {
    LayerShape l;
    l.in = in;
    l.out = out;
    l.activation = act;
    l.weight_offset = offset;
    offset += in * out;
    l.bias_offset = offset;
    offset += out;
    l.dropout = dropout;
    layers_.push_back(l);
  };
  const std::size_t d = spec.input_features;
  const auto& h = spec.hidden_layers;
  if (spec.variant != AutoencoderVariant::vae) {
    std::vector<std::size_t> widths{d};
    widths.insert(widths.end(), h.begin(), h.end());
    widths.push_back(d);
    const std::size_t count = widths.size() - 1;
    for (std::size_t l = 0; l < count; ++l) {
      const bool boundary = l == 0 || l + 1 == count;
      add(widths[l], widths[l + 1], boundary ? spec.boundary_activation : spec.hidden_activation, l + 1 != count);
    }
    encoder_layers_ = count;
  } else {
    variational_ = true;
    const std::size_t mid = h.size() / 2;
    latent_dim_ = spec.latent_dim > 0 ? spec.latent_dim : h[mid];
    std::size_t width = d;
    for (std::size_t l = 0; l < mid; ++l) {
      add(width, h[l], l == 0 ? spec.boundary_activation : spec.hidden_activation, true);
      width = h[l];
    }
    encoder_layers_ = mid;
    add(width, latent_dim_, Activation::linear, false);  // mean
    add(width, latent_dim_, Activation::linear, false);  // log-variance
    width = latent_dim_;
    for (std::size_t l = mid + 1; l < h.size(); ++l) {
      add(width, h[l], spec.hidden_activation, true);
      width = h[l];
    }
    add(width, d, spec.boundary_activation, false);
  }
  parameter_count_ = offset;
}

std::vector<double> Network::initialize(std::uint64_t seed, std::span<const double> column_means) const {
  std::vector<double> p(parameter_count_, 0.0);
  Rng rng(derive_seed(seed, "autonet_init"));
  for (const auto& l : layers_) {
    const double limit = std::sqrt(6.0 / static_cast<double>(l.in + l.out));
    for (std::size_t k = 0; k < l.in * l.out; ++k) p[l.weight_offset + k] = limit * (2.0 * uniform01(rng) - 1.0);
  }
  const auto& last = layers_.back();
  if (column_means.size() == last.out) {
    for (std::size_t j = 0; j < last.out; ++j) {
      double m = column_means[j];
      if (last.activation == Activation::sigmoid) {
        m = std::clamp(m, 0.01, 0.99);
        m = std::log(m / (1.0 - m));
      }
      p[last.bias_offset + j] = m;
    }
  }
  return p;
}

StochasticDraws Network::draw(std::size_t rows, double dropout_rate, std::uint64_t seed) const {
  StochasticDraws d;
  Rng rng(seed);
  d.dropout_masks.resize(layers_.size());
  if (dropout_rate > 0.0) {
    const double keep = 1.0 - dropout_rate;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      if (!layers_[l].dropout) continue;
      Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(layers_[l].out));
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform01(rng) < keep ? 1.0 / keep : 0.0;
      d.dropout_masks[l] = std::move(m);
    }
  }
  if (variational_) {
    d.latent_noise.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(latent_dim_));
    for (Eigen::Index i = 0; i < d.latent_noise.size(); ++i) d.latent_noise.data()[i] = standard_normal(rng);
  }
  return d;
}

double Network::loss(std::span<const double> params, const Matrix& input, const Matrix& target,
                     const StochasticDraws& draws, std::vector<double>* gradient, double* kl_out) const {
  if (params.size() != parameter_count_) throw InvalidArgument("parameter vector has the wrong size");
  const auto batch = input.rows();
  std::vector<LayerCache> cache(layers_.size());

  auto weights = [&](const LayerShape& l) {
    return ConstMap(params.data() + l.weight_offset, static_cast<Eigen::Index>(l.out), static_cast<Eigen::Index>(l.in));
  };
  auto bias = [&](const LayerShape& l) {
    return ConstVecMap(params.data() + l.bias_offset, static_cast<Eigen::Index>(l.out));
  };
  auto mask_of = [&](std::size_t l) -> const Matrix* {
    if (l < draws.dropout_masks.size() && draws.dropout_masks[l].size() > 0) return &draws.dropout_masks[l];
    return nullptr;
  };
  auto forward = [&](std::size_t l, const Matrix& a) -> Matrix {
    const auto& shape = layers_[l];
    auto& c = cache[l];
    c.input = a;
    c.pre = (a * weights(shape).transpose()).rowwise() + bias(shape);
    activate(shape.activation, c.pre, c.post);
    if (const Matrix* m = mask_of(l)) return c.post.cwiseProduct(*m);
    return c.post;
  };

  Matrix a = input;
  Matrix mu, logvar, noise_scale;
  std::size_t first_decoder = 0;
  if (!variational_) {
    for (std::size_t l = 0; l < layers_.size(); ++l) a = forward(l, a);
  } else {
    for (std::size_t l = 0; l < encoder_layers_; ++l) a = forward(l, a);
    mu = forward(encoder_layers_, a);
    logvar = forward(encoder_layers_ + 1, a);
    noise_scale = (0.5 * logvar.array()).exp().matrix();
    Matrix z = mu;
    if (draws.latent_noise.size() > 0) z += noise_scale.cwiseProduct(draws.latent_noise);
    first_decoder = encoder_layers_ + 2;
    a = z;
    for (std::size_t l = first_decoder; l < layers_.size(); ++l) a = forward(l, a);
  }

  const double denom = static_cast<double>(batch) * static_cast<double>(target.cols());
  const Matrix diff = a - target;
  const double mse = diff.squaredNorm() / denom;
  double kl = 0.0;
  if (variational_)
    kl = -0.5 * (1.0 + logvar.array() - mu.array().square() - logvar.array().exp()).sum() / static_cast<double>(batch);
  if (kl_out) *kl_out = kl;
  const double total = mse + (variational_ ? kl_weight_ * kl : 0.0);
  if (!gradient) return total;

  gradient->assign(parameter_count_, 0.0);
  auto backward = [&](std::size_t l, const Matrix& d_out) -> Matrix {
    const auto& shape = layers_[l];
    const auto& c = cache[l];
    Matrix d_act = d_out;
    if (const Matrix* m = mask_of(l)) d_act = d_act.cwiseProduct(*m);
    const Matrix dz = d_act.cwiseProduct(activation_grad(shape.activation, c.pre, c.post));
    Eigen::Map<Matrix> gw(gradient->data() + shape.weight_offset, static_cast<Eigen::Index>(shape.out),
                          static_cast<Eigen::Index>(shape.in));
    Eigen::Map<Eigen::RowVectorXd> gb(gradient->data() + shape.bias_offset, static_cast<Eigen::Index>(shape.out));
    gw += dz.transpose() * c.input;
    gb += dz.colwise().sum();
    return dz * weights(shape);
  };

  Matrix d = (2.0 / denom) * diff;
  if (!variational_) {
    for (std::size_t l = layers_.size(); l-- > 0;) d = backward(l, d);
    return total;
  }
  for (std::size_t l = layers_.size(); l-- > first_decoder;) d = backward(l, d);
  const double kb = kl_weight_ / static_cast<double>(batch);
  Matrix d_mu = d + kb * mu;
  Matrix d_logvar = kb * 0.5 * (logvar.array().exp() - 1.0).matrix();
  if (draws.latent_noise.size() > 0)
    d_logvar += (d.array() * draws.latent_noise.array() * 0.5 * noise_scale.array()).matrix();
  Matrix d_h = backward(encoder_layers_, d_mu) + backward(encoder_layers_ + 1, d_logvar);
  for (std::size_t l = encoder_layers_; l-- > 0;) d_h = backward(l, d_h);
  return total;
}

Matrix Network::reconstruct(std::span<const double> params, const Matrix& input) const {
  StochasticDraws none;
  Matrix a = input;
  auto apply = [&](std::size_t l, const Matrix& x) {
    const auto& s = layers_[l];
    ConstMap w(params.data() + s.weight_offset, static_cast<Eigen::Index>(s.out), static_cast<Eigen::Index>(s.in));
    ConstVecMap b(params.data() + s.bias_offset, static_cast<Eigen::Index>(s.out));
    Matrix pre = (x * w.transpose()).rowwise() + b;
    Matrix out;
    activate(s.activation, pre, out);
    return out;
  };
  if (!variational_) {
    for (std::size_t l = 0; l < layers_.size(); ++l) a = apply(l, a);
    return a;
  }
  for (std::size_t l = 0; l < encoder_layers_; ++l) a = apply(l, a);
  a = apply(encoder_layers_, a);  // latent mean
  for (std::size_t l = encoder_layers_ + 2; l < layers_.size(); ++l) a = apply(l, a);
  return a;
}

// ---------------------------------------------------------------------------

Matrix AutoencoderModel::scale(const Matrix& rows) const {
  if (static_cast<std::size_t>(rows.cols()) != spec.input_features)
    throw InvalidArgument(fmt::format("autoencoder expects {} features, got {}", spec.input_features, rows.cols()));
  Matrix s = rows;
  for (Eigen::Index j = 0; j < s.cols(); ++j) {
    const auto k = static_cast<std::size_t>(j);
    s.col(j) = (s.col(j).array() - input_min[k]) / input_range[k];
  }
  return s;
}

Matrix AutoencoderModel::reconstruct_scaled(const Matrix& rows) const {
  return network().reconstruct(parameters, scale(rows));
}

double point_biserial(const LabeledTable& table, std::size_t column) {
  const auto& x = table.matrix();
  const auto n = static_cast<double>(table.rows());
  const auto c = static_cast<Eigen::Index>(column);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < table.rows(); ++i) {
    mx += x(static_cast<Eigen::Index>(i), c);
    my += table.labels()[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < table.rows(); ++i) {
    const double dx = x(static_cast<Eigen::Index>(i), c) - mx;
    const double dy = table.labels()[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

std::vector<std::size_t> select_input_features(const LabeledTable& table, std::size_t k) {
  if (k < 1 || k > table.cols())
    throw InvalidArgument(fmt::format("cannot select {} of {} features", k, table.cols()));
  std::vector<double> strength(table.cols());
  for (std::size_t j = 0; j < table.cols(); ++j) strength[j] = std::abs(point_biserial(table, j));
  std::vector<std::size_t> order(table.cols());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return strength[a] > strength[b]; });
  order.resize(k);
  return order;
}

AutoencoderModel train_autoencoder(const LabeledTable& normals, const NetworkSpec& spec, const TrainConfig& config) {
  spec.validate();
  config.validate();
  if (normals.rows() == 0) throw DataError("autoencoder training set is empty");
  if (normals.positives() > 0)
    throw DataError(fmt::format("autoencoder training set contains {} positive rows; only normals are allowed",
                                normals.positives()));
  if (normals.cols() != spec.input_features)
    throw InvalidArgument(fmt::format("network expects {} inputs, table has {}", spec.input_features, normals.cols()));

  AutoencoderModel model;
  model.spec = spec;
  model.selected_feature_indices.resize(normals.cols());
  std::iota(model.selected_feature_indices.begin(), model.selected_feature_indices.end(), std::size_t{0});
  const Matrix& raw = normals.matrix();
  for (Eigen::Index j = 0; j < raw.cols(); ++j) {
    const double lo = raw.col(j).minCoeff();
    const double hi = raw.col(j).maxCoeff();
    model.input_min.push_back(lo);
    model.input_range.push_back(hi > lo ? hi - lo : 1.0);
  }
  const Matrix x = model.scale(raw);
  const Network net(spec);
  std::vector<double> means(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index j = 0; j < x.cols(); ++j) means[static_cast<std::size_t>(j)] = x.col(j).mean();
  std::vector<double> params = net.initialize(config.seed, means);

  const auto n = static_cast<std::size_t>(x.rows());
  const auto batch = std::min<std::size_t>(static_cast<std::size_t>(config.batch_size), n);
  std::vector<double> m(params.size(), 0.0), v(params.size(), 0.0), grad;
  std::vector<double> best = params;
  double best_loss = std::numeric_limits<double>::infinity();
  int stale = 0;
  std::uint64_t step = 0;
  double b1t = 1.0, b2t = 1.0;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng epoch_rng(derive_seed(config.seed, "autonet_epoch", static_cast<std::uint64_t>(epoch)));
    shuffle(order, epoch_rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t rows = std::min(batch, n - start);
      Matrix target(static_cast<Eigen::Index>(rows), x.cols());
      for (std::size_t i = 0; i < rows; ++i)
        target.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(order[start + i]));
      const auto step_seed = derive_seed(config.seed, "autonet_step", step);
      Matrix input = target;
      if (spec.variant == AutoencoderVariant::dae && spec.noise_sigma > 0.0) {
        Rng noise_rng(derive_seed(step_seed, "input_noise"));
        for (Eigen::Index k = 0; k < input.size(); ++k) input.data()[k] += spec.noise_sigma * standard_normal(noise_rng);
      }
      const auto draws = net.draw(rows, spec.dropout_rate, step_seed);
      const double loss = net.loss(params, input, target, draws, &grad);
      if (!std::isfinite(loss))
        throw TrainingError(fmt::format("autoencoder loss diverged at epoch {} (loss={})", epoch, loss));
      epoch_loss += loss * static_cast<double>(rows);

      ++step;
      b1t *= config.adam_beta1;
      b2t *= config.adam_beta2;
      for (std::size_t k = 0; k < params.size(); ++k) {
        m[k] = config.adam_beta1 * m[k] + (1.0 - config.adam_beta1) * grad[k];
        v[k] = config.adam_beta2 * v[k] + (1.0 - config.adam_beta2) * grad[k] * grad[k];
        const double mh = m[k] / (1.0 - b1t);
        const double vh = v[k] / (1.0 - b2t);
        params[k] -= config.learning_rate * mh / (std::sqrt(vh) + config.adam_epsilon);
      }
    }
    epoch_loss /= static_cast<double>(n);
    model.loss_history.push_back(epoch_loss);
    if (epoch_loss < best_loss) {
      best_loss = epoch_loss;
      best = params;
      stale = 0;
    } else if (config.early_stop_patience > 0 && ++stale >= config.early_stop_patience) {
      break;
    }
  }
  model.parameters = std::move(best);
  return model;
}

// ---------------------------------------------------------------------------

Matrix reconstruction_errors(const AutoencoderModel& model, const Matrix& rows) {
  const Matrix s = model.scale(rows);
  const Matrix r = model.network().reconstruct(model.parameters, s);
  return (s - r).array().square().matrix();
}

std::vector<double> reconstruction_mses(const AutoencoderModel& model, const Matrix& rows) {
  const Matrix e = reconstruction_errors(model, rows);
  std::vector<double> out(static_cast<std::size_t>(e.rows()));
  for (Eigen::Index i = 0; i < e.rows(); ++i) out[static_cast<std::size_t>(i)] = e.row(i).mean();
  return out;
}

std::vector<double> reconstruction_error_vector(const AutoencoderModel& model, std::span<const double> row) {
  Matrix m(1, static_cast<Eigen::Index>(row.size()));
  for (std::size_t j = 0; j < row.size(); ++j) m(0, static_cast<Eigen::Index>(j)) = row[j];
  const Matrix e = reconstruction_errors(model, m);
  return {e.data(), e.data() + e.size()};
}

double reconstruction_mse(const AutoencoderModel& model, std::span<const double> row) {
  const auto e = reconstruction_error_vector(model, row);
  return std::accumulate(e.begin(), e.end(), 0.0) / static_cast<double>(e.size());
}

double median(std::vector<double> values) {
  if (values.empty()) throw InvalidArgument("median of an empty set");
  const auto mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

namespace {

std::pair<double, double> median_and_mad(std::span<const double> errors) {
  if (errors.size() < 3) throw InvalidArgument("modified Z-score needs at least 3 errors");
  std::vector<double> v(errors.begin(), errors.end());
  const double med = median(v);
  for (auto& e : v) e = std::abs(e - med);
  const double mad = median(std::move(v));
  if (!(mad > 0.0)) throw DataError("median absolute deviation is zero; modified Z-score undefined");
  return {med, mad};
}

}  // namespace

std::vector<double> modified_z_scores(std::span<const double> errors) {
  const auto [med, mad] = median_and_mad(errors);
  std::vector<double> out;
  out.reserve(errors.size());
  for (double e : errors) out.push_back(kModifiedZScale * (e - med) / mad);
  return out;
}

ThresholdRule threshold_modified_z(std::span<const double> errors, double cutoff) {
  const auto [med, mad] = median_and_mad(errors);
  ThresholdRule rule;
  rule.kind = ThresholdKind::modified_z;
  rule.cutoff = cutoff;
  rule.value = med + cutoff * mad / kModifiedZScale;
  if (!std::isfinite(rule.value) || rule.value <= 0.0)
    throw DataError(fmt::format("modified Z threshold resolved to {}, which is not positive", rule.value));
  return rule;
}

SweepResult threshold_ba_sweep(std::span<const double> errors, std::span<const int> labels,
                               std::span<const double> grid) {
  if (errors.size() != labels.size()) throw InvalidArgument("errors and labels differ in length");
  if (grid.empty()) throw InvalidArgument("threshold grid is empty");
  const double auc = roc_auc(errors, labels);  // also rejects single-class labels
  SweepResult result;
  result.rule.kind = ThresholdKind::ba_sweep;
  result.rule.grid.assign(grid.begin(), grid.end());
  std::optional<std::size_t> best;
  for (double t : grid) {
    std::vector<int> pred(errors.size());
    for (std::size_t i = 0; i < errors.size(); ++i) pred[i] = errors[i] > t ? 1 : 0;
    const auto r = metrics(confusion(labels, pred));
    SweepRow row;
    row.threshold = t;
    row.precision = r.precision;
    row.recall = *r.recall;
    row.tnr = *r.tnr;
    row.balanced_accuracy = *r.balanced_accuracy;
    row.roc_auc = auc;
    result.table.push_back(row);
    const auto& cur = result.table.back();
    if (!best) {
      best = result.table.size() - 1;
      continue;
    }
    const auto& b = result.table[*best];
    const bool better = cur.balanced_accuracy > b.balanced_accuracy + 1e-12;
    const bool tie = std::abs(cur.balanced_accuracy - b.balanced_accuracy) <= 1e-12 && cur.threshold > b.threshold;
    if (better || tie) best = result.table.size() - 1;
  }
  result.rule.value = result.table[*best].threshold;
  if (!std::isfinite(result.rule.value) || result.rule.value <= 0.0)
    throw InvalidArgument("selected threshold must be finite and > 0");
  return result;
}

std::vector<int> classify_by_threshold(const AutoencoderModel& model, const ThresholdRule& rule, const Matrix& rows) {
  if (!std::isfinite(rule.value)) throw InvalidArgument("threshold is not finite");
  const auto mse = reconstruction_mses(model, rows);
  std::vector<int> out(mse.size());
  for (std::size_t i = 0; i < mse.size(); ++i) out[i] = mse[i] > rule.value ? 1 : 0;
  return out;
}

}  // namespace parcel
