#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "parcel/tabular.hpp"

namespace parcel {

enum class AutoencoderVariant { ae, vae, dae };
enum class Activation { relu, sigmoid, elu, linear };

std::string_view to_string(AutoencoderVariant v);
AutoencoderVariant autoencoder_variant_from_string(std::string_view name);
std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view name);

struct NetworkSpec {
  AutoencoderVariant variant = AutoencoderVariant::ae;
  std::size_t input_features = 25;
  std::vector<std::size_t> hidden_layers{8, 4, 8};
  std::size_t latent_dim = 0;  // vae only; replaces the middle hidden width
  /// Used on the first layer and on the reconstruction layer.
  Activation boundary_activation = Activation::relu;
  Activation hidden_activation = Activation::sigmoid;
  double dropout_rate = 0.0;
  double noise_sigma = 0.0;  // dae only
  double kl_weight = 1.0;    // vae only

  void validate() const;

  /// Tuned architectures: AE 8-4-8, VAE 8-4-8 with 4 latent units, DAE 8-4-2-4-8.
  static NetworkSpec preset_ae();
  static NetworkSpec preset_vae();
  static NetworkSpec preset_dae();
  static NetworkSpec preset(AutoencoderVariant variant);
};

struct TrainConfig {
  int epochs = 100;
  int batch_size = 256;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 0;
  int early_stop_patience = 10;

  void validate() const;
};

/// Dense layer stored as views into a flat parameter vector.
struct LayerShape {
  std::size_t in = 0, out = 0;
  Activation activation = Activation::linear;
  std::size_t weight_offset = 0;  // out x in, row-major
  std::size_t bias_offset = 0;
  bool dropout = false;  // dropout applies to this layer's output during training
};

/// Stochastic inputs of one training step, drawn outside the network so that
/// a step can be replayed exactly (gradient checks, determinism tests).
struct StochasticDraws {
  std::vector<Matrix> dropout_masks;  // per layer; entries 0 or 1/(1-p); empty = no dropout
  Matrix latent_noise;                // vae: batch x latent; empty = zero noise
};

/// Layer graph of an autoencoder. For the VAE, layers are: encoder layers,
/// the mean head, the log-variance head, then decoder layers.
class Network {
 public:
  explicit Network(const NetworkSpec& spec);

  std::size_t parameter_count() const { return parameter_count_; }
  const std::vector<LayerShape>& layers() const { return layers_; }
  bool variational() const { return variational_; }
  std::size_t encoder_layers() const { return encoder_layers_; }
  std::size_t latent_dim() const { return latent_dim_; }

  /// Loss = mean squared error over batch and features, plus kl_weight times
  /// the batch-mean KL term for the VAE. Fills `gradient` when non-null.
  double loss(std::span<const double> params, const Matrix& input, const Matrix& target,
              const StochasticDraws& draws, std::vector<double>* gradient = nullptr,
              double* kl_out = nullptr) const;

  /// Inference pass: no dropout, VAE decodes the latent mean.
  Matrix reconstruct(std::span<const double> params, const Matrix& input) const;

  /// Glorot-uniform weights, zero biases; the output bias starts at the data mean.
  std::vector<double> initialize(std::uint64_t seed, std::span<const double> column_means) const;

  /// Masks and noise for a batch of `rows`, drawn from the given engine.
  StochasticDraws draw(std::size_t rows, double dropout_rate, std::uint64_t seed) const;

 private:
  std::vector<LayerShape> layers_;
  std::size_t parameter_count_ = 0;
  std::size_t encoder_layers_ = 0;
  std::size_t latent_dim_ = 0;
  bool variational_ = false;
  double kl_weight_ = 0.0;
};

struct AutoencoderModel {
  NetworkSpec spec;
  std::vector<double> parameters;
  /// Columns of the full encoded table this model reads, in input order.
  std::vector<std::size_t> selected_feature_indices;
  /// Min-max scaling fitted on the training normals; errors are in scaled units.
  std::vector<double> input_min;
  std::vector<double> input_range;
  std::vector<double> loss_history;

  Network network() const { return Network(spec); }
  /// Scaled inputs and their reconstructions; rows have input_features columns.
  Matrix scale(const Matrix& rows) const;
  Matrix reconstruct_scaled(const Matrix& rows) const;
};

/// Top-k columns by absolute point-biserial correlation with the label; ties by index.
std::vector<std::size_t> select_input_features(const LabeledTable& table, std::size_t k);
/// Pearson correlation of a column with the 0/1 label (0 for constant columns).
double point_biserial(const LabeledTable& table, std::size_t column);

/// Trains on label-0 rows only; a positive row is rejected as label leakage.
AutoencoderModel train_autoencoder(const LabeledTable& normals, const NetworkSpec& spec, const TrainConfig& config);

/// Per-feature squared reconstruction error (x_j - x'_j)^2 in scaled units.
std::vector<double> reconstruction_error_vector(const AutoencoderModel& model, std::span<const double> row);
double reconstruction_mse(const AutoencoderModel& model, std::span<const double> row);
/// Batch forms; rows have input_features columns.
Matrix reconstruction_errors(const AutoencoderModel& model, const Matrix& rows);
std::vector<double> reconstruction_mses(const AutoencoderModel& model, const Matrix& rows);

enum class ThresholdKind { modified_z, ba_sweep };

struct ThresholdRule {
  ThresholdKind kind = ThresholdKind::modified_z;
  double value = 0.0;
  double cutoff = 3.5;
  std::vector<double> grid;
};

inline constexpr double kModifiedZScale = 0.6745;

/// 0.6745 (e - median) / MAD for every error.
std::vector<double> modified_z_scores(std::span<const double> errors);
double median(std::vector<double> values);

/// Resolved so that {M_i > cutoff} <=> {e_i > value}.
ThresholdRule threshold_modified_z(std::span<const double> errors, double cutoff = 3.5);

struct SweepRow {
  double threshold = 0.0;
  std::optional<double> precision;
  double recall = 0.0;
  double tnr = 0.0;
  double balanced_accuracy = 0.0;
  double roc_auc = 0.0;
};

struct SweepResult {
  ThresholdRule rule;
  std::vector<SweepRow> table;
};

/// e > t is positive; picks the grid value with the highest BA, ties to the larger t.
SweepResult threshold_ba_sweep(std::span<const double> errors, std::span<const int> labels,
                               std::span<const double> grid);

/// label = 1 iff reconstruction MSE > rule.value.
std::vector<int> classify_by_threshold(const AutoencoderModel& model, const ThresholdRule& rule, const Matrix& rows);

}  // namespace parcel
