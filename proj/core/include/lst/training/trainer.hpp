/* Copyright 2026 The LS-Transducer Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/


#ifndef LST_TRAINING_TRAINER_HPP_
#define LST_TRAINING_TRAINER_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "lst/nn/ls_transducer.hpp"
#include "lst/training/dataset.hpp"

namespace lst::train {

using ad::Value;

struct TrainConfig {
  double gamma = 0.5;  // CTC weight
  double mu = 0.05;    // quantity-loss weight (multiplied by L)
  double lr = 4e-3;
  int warmup_steps = 100;
  double final_lr_ratio = 0.1;  // linear decay target at the last update
  int epochs = 30;
  int batch_size = 8;
  double clip_norm = 5.0;
  std::uint64_t seed = 1;
  bool train_eos = true;
  int freeze_below = 2;  // adaptation updates prediction layers >= this
  int lm_epochs = 10;
  double lm_lr = 2e-3;
  int adapt_epochs = 5;
  double adapt_lr = 1e-3;

  void bind(ConfigBinder& binder);
  void validate() const;
};

struct LossBreakdown {
  Value total;
  double ce = 0.0;
  double ctc = 0.0;   // +inf when infeasible
  double qua = 0.0;   // unscaled |sum(alpha) - L| + |sum(w) - P|
  bool ctc_feasible = true;
  double alpha_sum = 0.0;
};

// gamma * L_ctc + (1 - gamma) * L_ce + mu * L_qua * L, teacher-forced.
// An infeasible CTC target drops the CTC term and clears ctc_feasible.
LossBreakdown lst_loss(const nn::LsTransducer& model, const Utterance& utt,
                       const TrainConfig& config);

struct EpochMetrics {
  int epoch = 0;
  double loss = 0.0;
  double ce = 0.0;
  double ctc = 0.0;
  double qua = 0.0;
  double count_error = 0.0;  // mean |sum(alpha) - L|
};

struct TrainResult {
  std::vector<EpochMetrics> log;
  bool diverged = false;
};

// Called after every completed epoch; returning false stops training.
using EpochCallback = std::function<bool(const EpochMetrics&, nn::LsTransducer&)>;

// Adaptive-moment training on the composite loss. Deterministic for a given
// seed. On a NaN loss the parameters are restored to the last completed epoch
// and the result is flagged as diverged.
TrainResult train(nn::LsTransducer& model, const Dataset& data, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

void write_metrics_csv(std::ostream& out, const std::vector<EpochMetrics>& log);

// Any model exposing the prediction-network forward pass.
using LmForward = std::function<nn::PredNetOutput(std::span<const int>)>;

// Summed next-token negative log-likelihood over [sos] y_1..y_N -> y_1..y_N [eos],
// full softmax over the vocabulary.
Value lm_sequence_nll(const LmForward& forward, const std::vector<int>& tokens);

struct CorpusScore {
  double nll = 0.0;  // total
  long predictions = 0;
  double perplexity() const;
};

CorpusScore lm_corpus_score(const LmForward& forward, const TextCorpus& corpus);

// Per-epoch training-set perplexity.
std::vector<double> pretrain_lm(nn::PredictionLm& lm, const TextCorpus& corpus,
                                const TrainConfig& config);

// Copies the pre-trained LM weights into the transducer's prediction network.
void load_prediction_network(nn::LsTransducer& model, const nn::PredictionLm& lm);

// Text-only fine-tuning of the prediction network layers >= freeze_below and
// its LM head. Every other parameter stays bit-identical.
std::vector<double> adapt_prediction_network(nn::LsTransducer& model, const TextCorpus& corpus,
                                             const TrainConfig& config);

}  // namespace lst::train

#endif  // LST_TRAINING_TRAINER_HPP_
