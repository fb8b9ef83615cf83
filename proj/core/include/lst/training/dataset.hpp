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


#ifndef LST_TRAINING_DATASET_HPP_
#define LST_TRAINING_DATASET_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "lst/autodiff/matrix.hpp"
#include "lst/config.hpp"

namespace lst::train {

using ad::Matrix;

struct Utterance {
  std::string id;
  Matrix feats;             // T x F
  std::vector<int> tokens;  // y_1 .. y_N
  int phones = 0;           // P
  std::string domain;

  int num_tokens() const { return static_cast<int>(tokens.size()); }
  int num_frames() const { return static_cast<int>(feats.rows()); }
  // Throws DataError unless N >= 1, P >= N and T >= N.
  void validate() const;
};

using Dataset = std::vector<Utterance>;
using TextCorpus = std::vector<std::vector<int>>;

enum class Domain { kSource, kTarget };
const char* domain_name(Domain d);
Domain parse_domain(const std::string& name);

// Parameters of the synthetic task. The lexicon (sub-unit decomposition,
// sub-unit embeddings, both Markov chains) depends only on lexicon_seed, so
// source and target sets drawn with different data seeds share it.
struct SynthSpec {
  int vocab_size = 20;
  int feat_dim = 16;
  int num_subunits = 40;
  int min_tokens = 3;
  int max_tokens = 10;
  int min_duration = 2;
  int max_duration = 6;
  double noise = 0.3;
  double preferred_mass = 0.85;  // bigram mass on the preferred successors
  int preferred_successors = 3;
  std::uint64_t lexicon_seed = 1234;

  void bind(ConfigBinder& binder);
  void validate() const;
};

// Fixed structure shared by every draw from a SynthSpec.
class Lexicon {
 public:
  explicit Lexicon(const SynthSpec& spec);

  const SynthSpec& spec() const { return spec_; }
  const std::vector<int>& subunits(int token) const;
  const Matrix& subunit_embeddings() const { return embeddings_; }
  // 1 x F frame template of a normal token.
  const Matrix& token_embedding(int token) const;
  // Row-stochastic transition matrix over the vocabulary (only normal
  // tokens carry mass); no self-transitions.
  const Matrix& chain(Domain d) const { return d == Domain::kSource ? chain_a_ : chain_b_; }
  // Probability of each duration in [min_duration, max_duration].
  const std::vector<double>& duration_profile(Domain d) const {
    return d == Domain::kSource ? dur_a_ : dur_b_;
  }
  // Mean of -log P(y_k | y_{k-1}) over all k >= 2 of the corpus.
  double chain_nll(const TextCorpus& corpus, Domain d) const;

 private:
  SynthSpec spec_;
  std::vector<std::vector<int>> subunits_;
  Matrix embeddings_;
  std::vector<Matrix> token_embeddings_;
  Matrix chain_a_;
  Matrix chain_b_;
  std::vector<double> dur_a_;
  std::vector<double> dur_b_;
};

TextCorpus synth_text(const Lexicon& lexicon, Domain domain, int count, std::uint64_t seed);
Dataset synth_dataset(const Lexicon& lexicon, Domain domain, int count, std::uint64_t seed);
// Renders one token sequence to frames with the given noise stream.
Utterance render_utterance(const Lexicon& lexicon, Domain domain, const std::vector<int>& tokens,
                           std::string id, std::uint64_t seed);

// Dataset file: per utterance a header "utt_id N P T F domain", one line of
// N token ids, then T lines of F space-separated decimals.
void write_dataset(std::ostream& out, const Dataset& data);
Dataset read_dataset(std::istream& in);
void save_dataset(const std::filesystem::path& path, const Dataset& data);
Dataset load_dataset(const std::filesystem::path& path);

// Text corpus: one space-separated token-id sequence per line.
void save_text(const std::filesystem::path& path, const TextCorpus& corpus);
TextCorpus load_text(const std::filesystem::path& path);
TextCorpus transcripts(const Dataset& data);

}  // namespace lst::train

#endif  // LST_TRAINING_DATASET_HPP_
