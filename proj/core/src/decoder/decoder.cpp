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


#include "lst/decoder/decoder.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "lst/alignment/alignment.hpp"
#include "lst/autodiff/ops.hpp"
#include "lst/common.hpp"

namespace lst::decode {

using ad::Value;
using nn::Vocabulary;

void BeamConfig::bind(ConfigBinder& binder) {
  binder.bind("beam", beam);
  binder.bind("ctc_weight", ctc_weight);
  binder.bind("lm_weight", lm_weight);
  binder.bind("max_len", max_len);
  binder.bind("len_margin", len_margin);
  binder.bind("eos_modification", eos_modification);
}

void BeamConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ContractError(std::string("beam config: ") + what);
  };
  require(beam >= 1, "beam must be >= 1");
  require(ctc_weight >= 0.0 && ctc_weight <= 1.0, "ctc_weight must lie in [0, 1]");
  require(std::isfinite(lm_weight), "lm_weight must be finite");
  require(max_len >= 1, "max_len must be >= 1");
  require(len_margin >= 0, "len_margin must be >= 0");
}

std::vector<int> Hypothesis::output() const {
  auto begin = tokens.begin();
  auto end = tokens.end();
  if (begin != end && *begin == Vocabulary::kSosEos) ++begin;
  if (done && end != begin && *(end - 1) == Vocabulary::kSosEos) --end;
  return {begin, end};
}

Matrix lst_step_score(const nn::LsTransducer& model, const Value& c_i, const Value& h_row) {
  return nn::log_softmax_without_blank(model.joint(c_i, h_row)).data();
}

namespace {

std::vector<double> last_row(const Value& v) {
  const auto r = v.data().row_span(v.rows() - 1);
  return {r.begin(), r.end()};
}

// Higher score first; equal scores prefer the lexicographically smaller sequence.
bool ranks_before(double sa, const std::vector<int>& a, double sb, const std::vector<int>& b) {
  if (sa != sb) return sa > sb;
  return a < b;
}

void sort_hypotheses(std::vector<Hypothesis>& hyps) {
  std::sort(hyps.begin(), hyps.end(), [](const Hypothesis& a, const Hypothesis& b) {
    return ranks_before(a.score, a.tokens, b.score, b.tokens);
  });
}

struct Candidate {
  double score = 0.0;
  std::size_t parent = 0;
  int q = 0;
  double s_ctc = 0.0;
  double lst_inc = 0.0;
  double lm_inc = 0.0;
  ctc::PrefixStatePtr state;
  std::vector<int> tokens;
};

}  // namespace

StreamingDecoder::StreamingDecoder(const nn::LsTransducer& model, const BeamConfig& config,
                                   const nn::PredictionLm* lm)
    : model_(model), config_(config), lm_(lm) {
  config_.validate();
  if (config_.lm_weight != 0.0) {
    if (lm_ == nullptr) throw ContractError("decode: lm_weight is set but no language model given");
    if (lm_->config().vocab_size != model_.config().vocab_size) {
      throw ContractError("decode: language model vocabulary size " +
                          std::to_string(lm_->config().vocab_size) + " differs from model's " +
                          std::to_string(model_.config().vocab_size));
    }
  }
  feats_ = Matrix(0, static_cast<std::size_t>(model_.config().feat_dim));
  Hypothesis root;
  root.tokens = {Vocabulary::kSosEos};
  root.ctc_state = ctc::initial_prefix_state();
  live_.push_back(std::move(root));
}

void StreamingDecoder::accept_frames(const Matrix& chunk) {
  if (final_) throw ContractError("decode: frames after finish()");
  if (chunk.rows() == 0) return;
  if (chunk.cols() != feats_.cols()) {
    throw DimensionError("decode: frame width " + std::to_string(chunk.cols()) + " but model expects " +
                         std::to_string(feats_.cols()));
  }
  std::vector<double> values = feats_.values();
  values.insert(values.end(), chunk.values().begin(), chunk.values().end());
  feats_ = Matrix(feats_.rows() + chunk.rows(), feats_.cols(), std::move(values));
  refresh();
  while (run_step()) {
  }
}

DecodeResult StreamingDecoder::finish() {
  if (feats_.rows() == 0) throw ContractError("decode: no frames");
  final_ = true;
  while (run_step()) {
  }
  DecodeResult out;
  if (finished_.empty()) {
    out.truncated = true;
    out.nbest = live_;
  } else {
    out.nbest = finished_;
  }
  sort_hypotheses(out.nbest);
  return out;
}

void StreamingDecoder::refresh() {
  ad::NoGradGuard no_grad;
  const nn::EncoderOutput enc = model_.encode(feats_);
  memory_ = model_.aif_memory(enc);
  ctc_logp_ = model_.ctc_log_probs(enc).data();
  cumsum_ = align::prefix_sums(align::column_values(align::frame_weights(enc.E).alpha));
}

int StreamingDecoder::length_cap() const {
  const int hard = std::min(config_.max_len, model_.config().max_label_len - 1);
  if (!final_) return hard;
  const double total = cumsum_.empty() ? 0.0 : cumsum_.back();
  const double soft = std::ceil(total) + config_.len_margin;
  return soft < hard ? static_cast<int>(soft) : hard;
}

bool StreamingDecoder::run_step() {
  if (live_.empty() || feats_.rows() == 0) return false;
  const int label = step_ + 1;
  const int cap = length_cap();
  if (label > cap + 1) return false;
  if (!final_ && label > cap) return false;
  const bool eos_only = label == cap + 1;

  const int boundary = align::boundary_for_label(cumsum_, label, final_);
  if (boundary < 0) return false;
  const int horizon = std::max(boundary, 1);
  const int total = final_ ? frames() : INT_MAX;

  ad::NoGradGuard no_grad;
  const double beta = config_.ctc_weight;
  const double lambda = config_.lm_weight;
  const bool fuse = lambda != 0.0;
  const int vocab = model_.config().vocab_size;
  ctc::PrefixOptions popts;
  popts.eos_modification = config_.eos_modification;
  align::AifOptions aif;
  aif.scale_qk = model_.config().aif_scale_qk;

  std::vector<Candidate> cands;
  for (std::size_t h = 0; h < live_.size(); ++h) {
    const Hypothesis& hyp = live_[h];
    const std::span<const int> g(hyp.tokens.data() + 1, hyp.tokens.size() - 1);
    const nn::PredNetOutput pred = model_.predict(g);
    const std::size_t row = g.size();
    const Value query = ad::slice_rows(pred.d_inter, row, row + 1);
    const Value c = align::aif_extract_one(memory_, query, horizon, aif);
    const Matrix lp = lst_step_score(model_, c, ad::slice_rows(pred.h_pre, row, row + 1));
    std::vector<double> lm_lp;
    if (fuse) lm_lp = last_row(ad::log_softmax_rows(lm_->forward(g).lm_logits));

    const ctc::PrefixStatePtr state = ctc::extend_horizon(hyp.ctc_state, ctc_logp_, horizon);
    if (state->horizon != horizon) throw ContractError("decode: CTC horizon out of sync with AIF");

    // Candidates are the normal tokens and [eos]; blank and unk are never emitted.
    for (int q = Vocabulary::kSosEos; q < vocab; ++q) {
      if (eos_only && q != Vocabulary::kSosEos) continue;
      const ctc::PrefixScore ps =
          ctc::prefix_score_online(g, q, state, ctc_logp_, horizon, total, popts);
      if (beta > 0.0 && ps.score <= kLogSentinel) continue;
      Candidate cand;
      cand.parent = h;
      cand.q = q;
      cand.s_ctc = ps.score;
      cand.lst_inc = lp(0, static_cast<std::size_t>(q));
      cand.lm_inc = fuse ? lm_lp[static_cast<std::size_t>(q)] : 0.0;
      cand.state = ps.state;
      cand.score = beta * ps.score + (1.0 - beta) * (hyp.s_lst + cand.lst_inc);
      if (fuse) cand.score += lambda * (hyp.s_lm + cand.lm_inc);
      cand.tokens = hyp.tokens;
      cand.tokens.push_back(q);
      cands.push_back(std::move(cand));
    }
  }

  // Nothing can extend the beam (e.g. only [eos] was allowed but not all
  // frames are visible): stop and leave the live hypotheses as they are.
  if (cands.empty()) return false;
  const auto keep = std::min(cands.size(), static_cast<std::size_t>(config_.beam));
  std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(keep), cands.end(),
                    [](const Candidate& a, const Candidate& b) {
                      return ranks_before(a.score, a.tokens, b.score, b.tokens);
                    });
  std::vector<Hypothesis> next;
  for (std::size_t k = 0; k < keep; ++k) {
    Candidate& cand = cands[k];
    const Hypothesis& parent = live_[cand.parent];
    Hypothesis hyp;
    hyp.tokens = std::move(cand.tokens);
    hyp.score = cand.score;
    hyp.s_lst = parent.s_lst + cand.lst_inc;
    hyp.s_ctc = cand.s_ctc;
    hyp.s_lm = parent.s_lm + cand.lm_inc;
    hyp.boundaries = parent.boundaries;
    hyp.boundaries.push_back(boundary);
    if (cand.q == Vocabulary::kSosEos) {
      hyp.done = true;
      finished_.push_back(std::move(hyp));
    } else {
      hyp.ctc_state = std::move(cand.state);
      next.push_back(std::move(hyp));
    }
  }
  live_ = std::move(next);
  ++step_;
  return true;
}

DecodeResult decode_utterance(const nn::LsTransducer& model, const Matrix& frames,
                              const BeamConfig& config, const nn::PredictionLm* lm) {
  StreamingDecoder decoder(model, config, lm);
  decoder.accept_frames(frames);
  return decoder.finish();
}

Replay replay_lst_score(const nn::LsTransducer& model, const Matrix& frames,
                        const std::vector<int>& tokens) {
  if (tokens.empty() || tokens.front() != Vocabulary::kSosEos) {
    throw ContractError("replay: token sequence must start with [sos]");
  }
  ad::NoGradGuard no_grad;
  const nn::EncoderOutput enc = model.encode(frames);
  const Value memory = model.aif_memory(enc);
  const auto alpha = align::column_values(align::frame_weights(enc.E).alpha);
  const int labels = static_cast<int>(tokens.size()) - 1;
  align::AifOptions aif;
  aif.scale_qk = model.config().aif_scale_qk;

  Replay out;
  out.boundaries = align::aif_boundaries(alpha, labels);
  for (int i = 1; i <= labels; ++i) {
    const std::span<const int> g(tokens.data() + 1, static_cast<std::size_t>(i - 1));
    const nn::PredNetOutput pred = model.predict(g);
    const auto row = g.size();
    const Value c = align::aif_extract_one(memory, ad::slice_rows(pred.d_inter, row, row + 1),
                                           std::max(out.boundaries[static_cast<std::size_t>(i - 1)], 1), aif);
    const Matrix lp = lst_step_score(model, c, ad::slice_rows(pred.h_pre, row, row + 1));
    out.s_lst += lp(0, static_cast<std::size_t>(tokens[static_cast<std::size_t>(i)]));
  }
  return out;
}

void write_nbest(std::ostream& out, const std::string& utt_id, const DecodeResult& result) {
  char buf[96];
  for (std::size_t r = 0; r < result.nbest.size(); ++r) {
    const Hypothesis& h = result.nbest[r];
    std::snprintf(buf, sizeof(buf), "\t%zu\t%.10g\t%.10g\t%.10g\t", r + 1, h.score, h.s_lst, h.s_ctc);
    out << utt_id << buf;
    const auto toks = h.output();
    for (std::size_t k = 0; k < toks.size(); ++k) out << (k ? " " : "") << toks[k];
    out << '\t';
    for (std::size_t k = 0; k < toks.size() && k < h.boundaries.size(); ++k) {
      out << (k ? "," : "") << h.boundaries[k];
    }
    out << '\n';
  }
}

}  // namespace lst::decode
