#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fnmt/checkpoint.hpp"
#include "fnmt/corpus.hpp"
#include "fnmt/model.hpp"

namespace fnmt::training {

/// Running averages of squared gradients and squared updates, one buffer per
/// parameter tensor.
struct AdadeltaState {
  double rho = 0.95;
  double epsilon = 1e-6;
  std::vector<std::vector<double>> sq_grad;
  std::vector<std::vector<double>> sq_update;

  static AdadeltaState for_params(std::span<const Tensor> params, double rho = 0.95,
                                  double epsilon = 1e-6);
};

// Applies one update from the gradients currently stored on `params`.
// Tensors without a gradient are treated as having a zero gradient.
void adadelta_step(std::span<Tensor> params, AdadeltaState& state);

struct TrainConfig {
  std::size_t emb_dim = 620;
  std::size_t hid_dim = 1000;
  std::size_t source_shortlist = 30000;
  std::size_t lemma_shortlist = 30000;
  std::size_t batch_size = 80;
  double clip_norm = 1.0;
  std::size_t validation_interval = 5000;
  std::size_t patience = 10;
  std::size_t max_len = 50;
  std::size_t max_epochs = 100;
  // Validation starts once this many full epochs have completed.
  std::size_t warmup_epochs = 1;
  // Stop as soon as a validation reaches this BLEU (0 disables).
  double stop_bleu = 0.0;
  std::size_t beam_size = 12;
  std::size_t per_head_candidates = 0;  // 0: same as beam_size
  std::size_t max_output_len = 100;
  model::FeedbackMode feedback = model::FeedbackMode::kLemma;
  bool dependency = false;
  double factor_weight = 1.0;
  std::uint64_t seed = 1;

  // Dims 32/64, batch 8, beam 4.
  void apply_desk_scale();
  // Throws ConfigError naming the offending field.
  void validate() const;

  // Flat `key=value` lines; '#' starts a comment. Unknown keys are errors.
  static TrainConfig parse(std::string_view text, const std::string& origin = "<config>");
  void set(const std::string& key, const std::string& value);
  std::string to_text() const;
};

struct TrainHooks {
  // Returns the validation BLEU of the current parameters.
  std::function<double(const model::Model&)> validate;
  // Receives each log line (without newline) as it is produced.
  std::function<void(const std::string&)> log;
  // Where to write the current parameters if the loss becomes non-finite.
  std::optional<std::filesystem::path> diagnostic_checkpoint;
};

struct TrainResult {
  model::Checkpoint best;
  std::string log;
  std::vector<double> validation_bleu;
  std::size_t updates = 0;
  std::size_t epochs = 0;
  bool early_stopped = false;
};

// `initial` supplies the vocabularies, configuration and starting
// parameters; its parameters are not modified. The returned checkpoint holds
// the parameters of the best validation, or the final parameters when no
// validation ran. Throws NumericError on a non-finite loss.
TrainResult train(const model::Checkpoint& initial, const std::vector<corpus::Batch>& batches,
                  const TrainConfig& config, const TrainHooks& hooks);

// Decides when training stops on the validation BLEU sequence.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience, double stop_bleu = 0.0)
      : patience_(patience), stop_bleu_(stop_bleu) {}

  // Records a score; returns true when it is a new best.
  bool record(double bleu);
  bool should_stop() const;
  std::optional<std::size_t> best_index() const { return best_index_; }
  double best() const { return best_; }

 private:
  std::size_t patience_;
  double stop_bleu_;
  std::size_t seen_ = 0;
  std::size_t bad_streak_ = 0;
  double best_ = 0.0;
  std::optional<std::size_t> best_index_;
  bool reached_target_ = false;
};

std::string format_update_line(std::size_t update, double loss);
std::string format_validation_line(std::size_t index, double bleu, bool best);

}  // namespace fnmt::training
