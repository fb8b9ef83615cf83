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


#include "lst/training/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>

#include "lst/alignment/alignment.hpp"
#include "lst/autodiff/ops.hpp"
#include "lst/common.hpp"
#include "lst/ctc/ctc.hpp"
#include "lst/rng.hpp"

namespace lst::train {

using nn::Vocabulary;

void TrainConfig::bind(ConfigBinder& binder) {
  binder.bind("gamma", gamma);
  binder.bind("mu", mu);
  binder.bind("lr", lr);
  binder.bind("warmup_steps", warmup_steps);
  binder.bind("final_lr_ratio", final_lr_ratio);
  binder.bind("epochs", epochs);
  binder.bind("batch_size", batch_size);
  binder.bind("clip_norm", clip_norm);
  binder.bind("seed", seed);
  binder.bind("train_eos", train_eos);
  binder.bind("freeze_below", freeze_below);
  binder.bind("lm_epochs", lm_epochs);
  binder.bind("lm_lr", lm_lr);
  binder.bind("adapt_epochs", adapt_epochs);
  binder.bind("adapt_lr", adapt_lr);
}

void TrainConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ContractError(std::string("train config: ") + what);
  };
  require(gamma >= 0.0 && gamma <= 1.0, "gamma must lie in [0, 1]");
  require(mu >= 0.0, "mu must be >= 0");
  require(lr >= 0.0 && lm_lr >= 0.0 && adapt_lr >= 0.0, "learning rates must be >= 0");
  require(warmup_steps >= 0, "warmup_steps must be >= 0");
  require(final_lr_ratio >= 0.0 && final_lr_ratio <= 1.0, "final_lr_ratio must lie in [0, 1]");
  require(epochs >= 0 && lm_epochs >= 0 && adapt_epochs >= 0, "epoch counts must be >= 0");
  require(batch_size >= 1, "batch_size must be >= 1");
  require(clip_norm >= 0.0, "clip_norm must be >= 0");
  require(freeze_below >= 0, "freeze_below must be >= 0");
}

namespace {

// Cross-entropy summed over rows with the blank class removed from the softmax.
Value blank_free_ce(const Value& logits, std::span<const int> targets) {
  std::vector<unsigned char> mask(logits.rows() * logits.cols(), 0);
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    mask[r * logits.cols() + static_cast<std::size_t>(Vocabulary::kBlank)] = 1;
  }
  return ad::cross_entropy_with_logits(ad::masked_fill(logits, mask, kLogSentinel), targets);
}

// `updates` is the total number of optimizer steps of the run.
ad::AdamConfig adam_config(double lr, const TrainConfig& config, long updates) {
  ad::AdamConfig out;
  out.lr = lr;
  out.warmup_steps = config.warmup_steps;
  out.decay_steps = static_cast<int>(updates);
  out.final_lr_ratio = config.final_lr_ratio;
  out.clip_norm = config.clip_norm;
  return out;
}

std::vector<std::size_t> shuffled(std::size_t n, Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

}  // namespace

LossBreakdown lst_loss(const nn::LsTransducer& model, const Utterance& utt,
                       const TrainConfig& config) {
  utt.validate();
  const int n = utt.num_tokens();
  const int frames = utt.num_frames();
  const auto& mc = model.config();
  if (n + 1 > mc.max_label_len) {
    throw ContractError(utt.id + ": " + std::to_string(n) + " tokens exceed max_label_len");
  }

  const nn::EncoderOutput enc = model.encode(utt.feats);
  const align::FrameWeights fw = align::frame_weights(enc.E);
  const std::vector<double> alpha = align::column_values(fw.alpha);

  std::vector<int> boundaries = align::aif_boundaries(alpha, n);
  std::vector<int> targets = utt.tokens;
  if (config.train_eos) {
    boundaries.push_back(frames);
    targets.push_back(Vocabulary::kSosEos);
  }
  const auto rows = targets.size();

  const nn::PredNetOutput pred = model.predict(utt.tokens);
  Value queries = pred.d_inter;
  if (queries.rows() != rows) queries = ad::slice_rows(queries, 0, rows);
  const Value memory = model.aif_memory(enc);
  align::AifOptions aif;
  aif.scale_qk = mc.aif_scale_qk;
  const align::LabelRepr repr = align::aif_extract(memory, queries, boundaries, aif);
  const Value logits = model.joint(repr.C, pred.h_pre);
  const Value ce = blank_free_ce(logits, targets);

  const ctc::CtcLoss ctc_term = ctc::ctc_loss(model.ctc_log_probs(enc), utt.tokens);
  const Value qua = align::quantity_loss(fw.alpha, fw.w_phone, n, utt.phones);

  LossBreakdown out;
  out.ce = ce.item();
  out.ctc = ctc_term.loss.item();
  out.qua = qua.item();
  out.ctc_feasible = ctc_term.feasible;
  out.alpha_sum = std::accumulate(alpha.begin(), alpha.end(), 0.0);

  Value total;
  auto accumulate = [&total](const Value& term) { total = total.valid() ? total + term : term; };
  if (config.gamma > 0.0 && ctc_term.feasible) accumulate(ad::scale(ctc_term.loss, config.gamma));
  if (config.gamma < 1.0) accumulate(ad::scale(ce, 1.0 - config.gamma));
  if (config.mu > 0.0) accumulate(ad::scale(qua, config.mu * static_cast<double>(n)));
  out.total = total.valid() ? total : ad::scale(ce, 0.0);
  return out;
}

TrainResult train(nn::LsTransducer& model, const Dataset& data, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  config.validate();
  if (data.empty()) throw ContractError("train: empty dataset");
  for (const auto& u : data) u.validate();

  ad::ParamStore& params = model.params();
  const auto batch = static_cast<std::size_t>(config.batch_size);
  const auto per_epoch = static_cast<long>((data.size() + batch - 1) / batch);
  ad::Adam adam(adam_config(config.lr, config, per_epoch * config.epochs));
  Rng shuffle_rng = make_stream(config.seed, "shuffle");
  ad::ParamStore last_good = params.clone();

  TrainResult result;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto order = shuffled(data.size(), shuffle_rng);
    EpochMetrics m;
    m.epoch = epoch;
    long ctc_count = 0;
    bool diverged = false;
    for (std::size_t start = 0; start < order.size() && !diverged; start += batch) {
      const std::size_t stop = std::min(order.size(), start + batch);
      params.zero_grad();
      for (std::size_t k = start; k < stop; ++k) {
        const LossBreakdown lb = lst_loss(model, data[order[k]], config);
        const double total = lb.total.item();
        if (!std::isfinite(total)) {
          diverged = true;
          break;
        }
        ad::backward(lb.total);
        m.loss += total;
        m.ce += lb.ce;
        m.qua += lb.qua;
        if (lb.ctc_feasible) {
          m.ctc += lb.ctc;
          ++ctc_count;
        }
        m.count_error += std::fabs(lb.alpha_sum - data[order[k]].num_tokens());
      }
      if (diverged) break;
      const double norm = adam.step(params, 1.0 / static_cast<double>(stop - start));
      if (!std::isfinite(norm)) diverged = true;
    }
    if (diverged) {
      params.copy_from(last_good);
      params.zero_grad();
      result.diverged = true;
      return result;
    }
    const auto count = static_cast<double>(data.size());
    m.loss /= count;
    m.ce /= count;
    m.qua /= count;
    m.count_error /= count;
    m.ctc = ctc_count ? m.ctc / static_cast<double>(ctc_count) : 0.0;
    result.log.push_back(m);
    last_good = params.clone();
    if (on_epoch && !on_epoch(m, model)) break;
  }
  params.zero_grad();
  return result;
}

void write_metrics_csv(std::ostream& out, const std::vector<EpochMetrics>& log) {
  out << "epoch,loss,ce,ctc,qua,count_error\n";
  char buf[160];
  for (const auto& m : log) {
    std::snprintf(buf, sizeof(buf), "%d,%.10g,%.10g,%.10g,%.10g,%.10g\n", m.epoch, m.loss, m.ce,
                  m.ctc, m.qua, m.count_error);
    out << buf;
  }
}

Value lm_sequence_nll(const LmForward& forward, const std::vector<int>& tokens) {
  const nn::PredNetOutput out = forward(tokens);
  std::vector<int> targets = tokens;
  targets.push_back(Vocabulary::kSosEos);
  return ad::cross_entropy_with_logits(out.lm_logits, targets);
}

double CorpusScore::perplexity() const {
  return predictions ? std::exp(nll / static_cast<double>(predictions))
                     : std::numeric_limits<double>::quiet_NaN();
}

CorpusScore lm_corpus_score(const LmForward& forward, const TextCorpus& corpus) {
  ad::NoGradGuard no_grad;
  CorpusScore score;
  for (const auto& seq : corpus) {
    score.nll += lm_sequence_nll(forward, seq).item();
    score.predictions += static_cast<long>(seq.size()) + 1;
  }
  return score;
}

namespace {

// Shared text-only loop behind pre-training and adaptation.
std::vector<double> fit_lm(ad::ParamStore& params, const LmForward& forward,
                           const TextCorpus& corpus, const TrainConfig& config, double lr,
                           int epochs, const ad::Adam::Filter& filter, const char* stream) {
  config.validate();
  if (corpus.empty()) throw ContractError("language model training: empty corpus");
  const auto batch = static_cast<std::size_t>(config.batch_size);
  const auto per_epoch = static_cast<long>((corpus.size() + batch - 1) / batch);
  ad::Adam adam(adam_config(lr, config, per_epoch * epochs), filter);
  Rng rng = make_stream(config.seed, stream);
  std::vector<double> ppl;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    const auto order = shuffled(corpus.size(), rng);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t stop = std::min(order.size(), start + batch);
      params.zero_grad();
      for (std::size_t k = start; k < stop; ++k) {
        ad::backward(lm_sequence_nll(forward, corpus[order[k]]));
      }
      const double norm = adam.step(params, 1.0 / static_cast<double>(stop - start));
      if (!std::isfinite(norm)) throw NumericError("language model training diverged");
    }
    ppl.push_back(lm_corpus_score(forward, corpus).perplexity());
  }
  params.zero_grad();
  return ppl;
}

}  // namespace

std::vector<double> pretrain_lm(nn::PredictionLm& lm, const TextCorpus& corpus,
                                const TrainConfig& config) {
  const LmForward forward = [&lm](std::span<const int> t) { return lm.forward(t); };
  return fit_lm(lm.params(), forward, corpus, config, config.lm_lr, config.lm_epochs, {},
                "shuffle.lm");
}

void load_prediction_network(nn::LsTransducer& model, const nn::PredictionLm& lm) {
  const auto& a = model.config();
  const auto& b = lm.config();
  if (a.vocab_size != b.vocab_size || a.pred_dim != b.pred_dim ||
      a.pred_layers != b.pred_layers || a.pred_ffn != b.pred_ffn ||
      a.max_label_len != b.max_label_len) {
    throw ContractError("load_prediction_network: language model shape does not match the model");
  }
  model.params().copy_from(lm.params(), "pred.");
}

std::vector<double> adapt_prediction_network(nn::LsTransducer& model, const TextCorpus& corpus,
                                             const TrainConfig& config) {
  const int freeze = config.freeze_below;
  const ad::Adam::Filter filter = [freeze](const std::string& path) {
    return nn::PredictionNetwork::is_adaptable(path, freeze);
  };
  const LmForward forward = [&model](std::span<const int> t) { return model.predict(t); };
  return fit_lm(model.params(), forward, corpus, config, config.adapt_lr, config.adapt_epochs,
                filter, "shuffle.adapt");
}

}  // namespace lst::train
