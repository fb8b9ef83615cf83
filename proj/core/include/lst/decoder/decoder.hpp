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


#ifndef LST_DECODER_DECODER_HPP_
#define LST_DECODER_DECODER_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include "lst/config.hpp"
#include "lst/ctc/ctc.hpp"
#include "lst/nn/ls_transducer.hpp"

namespace lst::decode {

using ad::Matrix;

struct BeamConfig {
  int beam = 10;
  double ctc_weight = 0.3;  // beta
  double lm_weight = 0.0;
  int max_len = 60;         // hard cap on output tokens
  int len_margin = 5;       // cap is also ceil(sum(alpha)) + margin
  bool eos_modification = true;

  void bind(ConfigBinder& binder);
  void validate() const;
};

struct Hypothesis {
  std::vector<int> tokens;       // starts with [sos]; ends with [eos] once done
  double score = 0.0;            // combined ranking score
  double s_lst = 0.0;
  double s_ctc = 0.0;
  double s_lm = 0.0;
  ctc::PrefixStatePtr ctc_state; // state of tokens[1..] (null once done)
  std::vector<int> boundaries;   // T_i of every emitted label, [eos] included
  bool done = false;

  // Emitted tokens without [sos] and [eos].
  std::vector<int> output() const;
};

struct DecodeResult {
  std::vector<Hypothesis> nbest;  // best first
  bool truncated = false;         // no hypothesis reached [eos]
};

// Log-probabilities of the transducer path for one label: the joint logits of
// c_i and the H_pre row, with blank masked to the sentinel. Returns 1 x V.
Matrix lst_step_score(const nn::LsTransducer& model, const ad::Value& c_i, const ad::Value& h_row);

// Label-synchronous beam search that consumes frames as they arrive. Label
// step i runs as soon as its boundary T_i is known, so feeding the frames in
// chunks gives the same result as feeding them at once.
class StreamingDecoder {
 public:
  // `lm` is the external language model for shallow fusion; it must outlive
  // the decoder and is required when lm_weight != 0.
  StreamingDecoder(const nn::LsTransducer& model, const BeamConfig& config,
                   const nn::PredictionLm* lm = nullptr);

  void accept_frames(const Matrix& chunk);
  // Marks the input complete and runs the remaining steps.
  DecodeResult finish();

  int frames() const { return static_cast<int>(feats_.rows()); }
  int steps() const { return step_; }
  const std::vector<Hypothesis>& live() const { return live_; }

 private:
  void refresh();
  bool run_step();
  int length_cap() const;

  const nn::LsTransducer& model_;
  BeamConfig config_;
  const nn::PredictionLm* lm_;
  Matrix feats_;
  ad::Value memory_;
  Matrix ctc_logp_;
  std::vector<double> cumsum_;
  bool final_ = false;
  int step_ = 0;  // completed label steps
  std::vector<Hypothesis> live_;
  std::vector<Hypothesis> finished_;
};

DecodeResult decode_utterance(const nn::LsTransducer& model, const Matrix& frames,
                              const BeamConfig& config, const nn::PredictionLm* lm = nullptr);

struct Replay {
  double s_lst = 0.0;
  std::vector<int> boundaries;
};

// Recomputes the transducer-path score of `tokens` (with [sos], optionally
// ending in [eos]) from scratch over the full utterance.
Replay replay_lst_score(const nn::LsTransducer& model, const Matrix& frames,
                        const std::vector<int>& tokens);

// One line per hypothesis:
// utt_id \t rank \t S \t S_lst \t S_ctc \t tokens \t boundaries
void write_nbest(std::ostream& out, const std::string& utt_id, const DecodeResult& result);

}  // namespace lst::decode

#endif  // LST_DECODER_DECODER_HPP_
