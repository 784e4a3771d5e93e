#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "fnmt/error.hpp"
#include "fnmt/random.hpp"
#include "fnmt/training.hpp"

namespace fnmt::training {

bool EarlyStopping::record(double bleu) {
  ++seen_;
  const bool improved = !best_index_ || bleu > best_;
  if (improved) {
    best_ = bleu;
    best_index_ = seen_ - 1;
    bad_streak_ = 0;
  } else {
    ++bad_streak_;
  }
  if (stop_bleu_ > 0.0 && bleu >= stop_bleu_) reached_target_ = true;
  return improved;
}

bool EarlyStopping::should_stop() const { return reached_target_ || bad_streak_ >= patience_; }

std::string format_update_line(std::size_t update, double loss) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "update=%zu loss=%.6f", update, loss);
  return buf;
}

std::string format_validation_line(std::size_t index, double bleu, bool best) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "validation=%zu bleu=%.4f best=%s", index, bleu,
                best ? "true" : "false");
  return buf;
}

TrainResult train(const model::Checkpoint& initial, const std::vector<corpus::Batch>& batches,
                  const TrainConfig& config, const TrainHooks& hooks) {
  config.validate();
  if (batches.empty()) throw DataError("no training batches");
  initial.config.validate();

  model::Checkpoint current = initial;
  current.params = initial.params.clone();
  model::Model m = current.model();
  m.set_trainable(true);
  auto params = m.params.tensors();
  auto state = AdadeltaState::for_params(params);

  TrainResult result;
  result.best = current;
  result.best.params = m.params.clone();
  auto emit = [&](const std::string& line) {
    result.log += line + "\n";
    if (hooks.log) hooks.log(line);
  };
  EarlyStopping stopping(config.patience, config.stop_bleu);
  std::size_t last_validated = 0;

  auto run_validation = [&] {
    m.set_trainable(false);
    const double bleu = hooks.validate(m);
    m.set_trainable(true);
    last_validated = result.updates;
    const bool best = stopping.record(bleu);
    result.validation_bleu.push_back(bleu);
    emit(format_validation_line(result.validation_bleu.size(), bleu, best));
    if (best) {
      result.best.params = m.params.clone();
      result.best.info["best_validation"] = std::to_string(result.validation_bleu.size());
      result.best.info["best_update"] = std::to_string(result.updates);
    }
    return stopping.should_stop();
  };

  Rng rng(config.seed);
  std::vector<std::size_t> order(batches.size());
  std::iota(order.begin(), order.end(), 0);
  bool stop = false;
  for (std::size_t epoch = 0; epoch < config.max_epochs && !stop; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    for (std::size_t idx : order) {
      Tape tape;
      Tensor loss;
      double value = std::numeric_limits<double>::quiet_NaN();
      std::string cause;
      try {
        TapeScope scope(tape);
        loss = model::sequence_loss(m, batches[idx]);
        value = loss.item();
      } catch (const NumericError& e) {
        cause = std::string(": ") + e.what();
      }
      if (!std::isfinite(value)) {
        std::string where;
        if (hooks.diagnostic_checkpoint) {
          model::Checkpoint diag = current;
          diag.params = m.params;
          diag.info["diagnostic_update"] = std::to_string(result.updates + 1);
          save_checkpoint(*hooks.diagnostic_checkpoint, diag);
          where = "; parameters saved to " + hooks.diagnostic_checkpoint->string();
        }
        throw NumericError("non-finite loss at update " + std::to_string(result.updates + 1) +
                           " (epoch " + std::to_string(epoch + 1) + ")" + cause + where);
      }
      tape.backward(loss);
      clip_global_norm(params, config.clip_norm);
      adadelta_step(params, state);
      for (auto& p : params) p.clear_grad();
      ++result.updates;
      emit(format_update_line(result.updates, value));
      if (hooks.validate && epoch >= config.warmup_epochs &&
          result.updates % config.validation_interval == 0 && run_validation()) {
        stop = true;
        result.early_stopped = true;
        break;
      }
    }
    result.epochs = epoch + 1;
  }
  // Make sure the final parameters are considered at least once.
  if (!stop && hooks.validate && result.epochs > config.warmup_epochs &&
      last_validated != result.updates) {
    run_validation();
  }
  result.best.info["updates"] = std::to_string(result.updates);
  result.best.info["epochs"] = std::to_string(result.epochs);
  if (!result.validation_bleu.empty()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", stopping.best());
    result.best.info["best_bleu"] = buf;
  } else {
    result.best.params = m.params.clone();
  }
  return result;
}

}  // namespace fnmt::training
