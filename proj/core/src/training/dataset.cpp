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


#include "lst/training/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "lst/common.hpp"
#include "lst/nn/model_config.hpp"
#include "lst/rng.hpp"

namespace lst::train {

using nn::Vocabulary;

void Utterance::validate() const {
  const int n = num_tokens();
  if (n < 1) throw DataError(id + ": utterance has no tokens");
  if (phones < n) throw DataError(id + ": phone count " + std::to_string(phones) + " < N");
  if (num_frames() < n) throw DataError(id + ": fewer frames than tokens");
}

const char* domain_name(Domain d) { return d == Domain::kSource ? "source" : "target"; }

Domain parse_domain(const std::string& name) {
  if (name == "source") return Domain::kSource;
  if (name == "target") return Domain::kTarget;
  throw ContractError("unknown domain '" + name + "' (expected source|target)");
}

void SynthSpec::bind(ConfigBinder& binder) {
  binder.bind("vocab_size", vocab_size);
  binder.bind("feat_dim", feat_dim);
  binder.bind("synth_subunits", num_subunits);
  binder.bind("synth_min_tokens", min_tokens);
  binder.bind("synth_max_tokens", max_tokens);
  binder.bind("synth_min_duration", min_duration);
  binder.bind("synth_max_duration", max_duration);
  binder.bind("synth_noise", noise);
  binder.bind("synth_preferred_mass", preferred_mass);
  binder.bind("synth_preferred_successors", preferred_successors);
  binder.bind("synth_lexicon_seed", lexicon_seed);
}

void SynthSpec::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ContractError(std::string("synth spec: ") + what);
  };
  const int normal = vocab_size - Vocabulary::kFirstNormal;
  require(normal >= 1, "vocab_size must leave at least one normal token");
  require(num_subunits >= normal, "need at least one distinct leading sub-unit per token");
  require(min_tokens >= 1 && max_tokens >= min_tokens, "token range");
  require(min_duration >= 1 && max_duration >= min_duration, "duration range");
  require(noise >= 0.0, "noise must be >= 0");
  require(preferred_mass >= 0.0 && preferred_mass <= 1.0, "preferred_mass in [0,1]");
  require(normal == 1 || 2 * preferred_successors <= normal - 1,
          "two disjoint successor sets must fit in the vocabulary");
}

namespace {

Matrix build_chain(const std::vector<std::vector<int>>& preferred, int vocab_size,
                   double preferred_mass) {
  const int first = Vocabulary::kFirstNormal;
  const int normal = vocab_size - first;
  Matrix chain(static_cast<std::size_t>(vocab_size), static_cast<std::size_t>(vocab_size));
  for (int i = first; i < vocab_size; ++i) {
    const auto& pref = preferred[static_cast<std::size_t>(i - first)];
    const int others = normal - 1 - static_cast<int>(pref.size());
    const double pref_mass = others > 0 ? preferred_mass : 1.0;
    for (int j = first; j < vocab_size; ++j) {
      if (j == i) continue;
      const bool is_pref = std::find(pref.begin(), pref.end(), j) != pref.end();
      double p = 0.0;
      if (is_pref) {
        p = pref_mass / static_cast<double>(pref.size());
      } else if (others > 0) {
        p = (1.0 - pref_mass) / static_cast<double>(others);
      }
      chain(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = p;
    }
  }
  return chain;
}

int sample_from(std::span<const double> probs, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = u(rng);
  double acc = 0.0;
  int last_positive = -1;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (probs[k] <= 0.0) continue;
    acc += probs[k];
    last_positive = static_cast<int>(k);
    if (r < acc) return static_cast<int>(k);
  }
  return last_positive;
}

std::vector<int> sample_sequence(const Lexicon& lex, Domain domain, Rng& rng) {
  const auto& spec = lex.spec();
  std::uniform_int_distribution<int> len(spec.min_tokens, spec.max_tokens);
  std::uniform_int_distribution<int> first(Vocabulary::kFirstNormal, spec.vocab_size - 1);
  const int n = len(rng);
  std::vector<int> seq;
  seq.push_back(first(rng));
  const Matrix& chain = lex.chain(domain);
  while (static_cast<int>(seq.size()) < n) {
    const int next = sample_from(chain.row_span(static_cast<std::size_t>(seq.back())), rng);
    // Single-token vocabularies have no successor other than the token itself.
    seq.push_back(next < 0 ? seq.back() : next);
  }
  return seq;
}

}  // namespace

Lexicon::Lexicon(const SynthSpec& spec) : spec_(spec) {
  spec_.validate();
  Rng rng = make_stream(spec_.lexicon_seed, "lexicon");
  const int first = Vocabulary::kFirstNormal;
  const int normal = spec_.vocab_size - first;

  std::normal_distribution<double> gauss(0.0, 1.0);
  embeddings_ = Matrix(static_cast<std::size_t>(spec_.num_subunits),
                       static_cast<std::size_t>(spec_.feat_dim));
  for (double& v : embeddings_.values()) v = gauss(rng);

  // Each token starts with its own sub-unit, then 0-2 more drawn from the
  // sub-units that lead no token, so no two tokens share a decomposition.
  std::vector<int> units_pool(static_cast<std::size_t>(spec_.num_subunits));
  std::iota(units_pool.begin(), units_pool.end(), 0);
  std::shuffle(units_pool.begin(), units_pool.end(), rng);
  const auto tail_count = static_cast<int>(units_pool.size()) - normal;
  std::uniform_int_distribution<int> extra(0, tail_count > 0 ? 2 : 0);
  std::uniform_int_distribution<int> tail(normal, std::max(normal, spec_.num_subunits - 1));
  subunits_.assign(static_cast<std::size_t>(spec_.vocab_size), {});
  for (int i = 0; i < normal; ++i) {
    auto& units = subunits_[static_cast<std::size_t>(first + i)];
    units.push_back(units_pool[static_cast<std::size_t>(i)]);
    const int more = extra(rng);
    for (int k = 0; k < more; ++k) {
      int u = units_pool[static_cast<std::size_t>(tail(rng))];
      while (tail_count > 1 && u == units.back()) u = units_pool[static_cast<std::size_t>(tail(rng))];
      units.push_back(u);
    }
  }

  // A token sounds like the normalised sum of its sub-units.
  token_embeddings_.assign(static_cast<std::size_t>(spec_.vocab_size), Matrix());
  for (int i = 0; i < normal; ++i) {
    const auto& units = subunits_[static_cast<std::size_t>(first + i)];
    Matrix e(1, static_cast<std::size_t>(spec_.feat_dim), 0.0);
    for (int u : units) {
      const auto row = embeddings_.row_span(static_cast<std::size_t>(u));
      for (std::size_t f = 0; f < row.size(); ++f) e(0, f) += row[f];
    }
    for (double& v : e.values()) v /= std::sqrt(static_cast<double>(units.size()));
    token_embeddings_[static_cast<std::size_t>(first + i)] = std::move(e);
  }

  // Disjoint preferred-successor sets for the two domains.
  std::vector<std::vector<int>> pref_a(static_cast<std::size_t>(normal));
  std::vector<std::vector<int>> pref_b(static_cast<std::size_t>(normal));
  for (int i = 0; i < normal; ++i) {
    std::vector<int> others;
    for (int j = 0; j < normal; ++j)
      if (j != i) others.push_back(first + j);
    std::shuffle(others.begin(), others.end(), rng);
    const auto k = static_cast<std::size_t>(
        std::min<int>(spec_.preferred_successors, static_cast<int>(others.size()) / 2));
    pref_a[static_cast<std::size_t>(i)].assign(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(k));
    pref_b[static_cast<std::size_t>(i)].assign(others.begin() + static_cast<std::ptrdiff_t>(k),
                                               others.begin() + static_cast<std::ptrdiff_t>(2 * k));
  }
  chain_a_ = build_chain(pref_a, spec_.vocab_size, spec_.preferred_mass);
  chain_b_ = build_chain(pref_b, spec_.vocab_size, spec_.preferred_mass);

  // Source durations are uniform; target speech is faster.
  const int span = spec_.max_duration - spec_.min_duration + 1;
  dur_a_.assign(static_cast<std::size_t>(span), 1.0 / span);
  dur_b_.resize(static_cast<std::size_t>(span));
  double total = 0.0;
  for (int k = 0; k < span; ++k) {
    dur_b_[static_cast<std::size_t>(k)] = 1.0 / static_cast<double>(k + 1);
    total += dur_b_[static_cast<std::size_t>(k)];
  }
  for (double& p : dur_b_) p /= total;
}

const Matrix& Lexicon::token_embedding(int token) const {
  subunits(token);  // range check
  return token_embeddings_[static_cast<std::size_t>(token)];
}

const std::vector<int>& Lexicon::subunits(int token) const {
  if (token < Vocabulary::kFirstNormal || token >= spec_.vocab_size) {
    throw ContractError("lexicon: token " + std::to_string(token) + " has no sub-units");
  }
  return subunits_[static_cast<std::size_t>(token)];
}

double Lexicon::chain_nll(const TextCorpus& corpus, Domain d) const {
  const Matrix& chain = this->chain(d);
  double nll = 0.0;
  long count = 0;
  for (const auto& seq : corpus) {
    for (std::size_t k = 1; k < seq.size(); ++k) {
      nll -= std::log(chain(static_cast<std::size_t>(seq[k - 1]), static_cast<std::size_t>(seq[k])));
      ++count;
    }
  }
  return count ? nll / static_cast<double>(count) : 0.0;
}

TextCorpus synth_text(const Lexicon& lexicon, Domain domain, int count, std::uint64_t seed) {
  Rng rng = make_stream(seed, std::string("text.") + domain_name(domain));
  TextCorpus out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out.push_back(sample_sequence(lexicon, domain, rng));
  return out;
}

Utterance render_utterance(const Lexicon& lexicon, Domain domain, const std::vector<int>& tokens,
                           std::string id, std::uint64_t seed) {
  const auto& spec = lexicon.spec();
  Rng rng = make_stream(seed, "render." + id);
  std::normal_distribution<double> noise(0.0, 1.0);
  const auto& profile = lexicon.duration_profile(domain);
  const auto F = static_cast<std::size_t>(spec.feat_dim);

  Utterance utt;
  utt.id = std::move(id);
  utt.tokens = tokens;
  utt.domain = domain_name(domain);
  std::vector<double> frames;
  std::size_t T = 0;
  for (int y : tokens) {
    const auto& units = lexicon.subunits(y);
    utt.phones += static_cast<int>(units.size());
    const int dur = spec.min_duration + sample_from(profile, rng);
    const auto emb = lexicon.token_embedding(y).row_span(0);
    for (int k = 0; k < dur; ++k) {
      for (std::size_t f = 0; f < F; ++f) frames.push_back(emb[f] + spec.noise * noise(rng));
      ++T;
    }
  }
  utt.feats = Matrix(T, F, std::move(frames));
  return utt;
}

Dataset synth_dataset(const Lexicon& lexicon, Domain domain, int count, std::uint64_t seed) {
  Rng rng = make_stream(seed, std::string("data.") + domain_name(domain));
  std::uniform_int_distribution<std::uint64_t> seeds;
  Dataset out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    auto tokens = sample_sequence(lexicon, domain, rng);
    char id[32];
    std::snprintf(id, sizeof(id), "%s_%06d", domain == Domain::kSource ? "src" : "tgt", i);
    out.push_back(render_utterance(lexicon, domain, tokens, id, seeds(rng)));
  }
  return out;
}

void write_dataset(std::ostream& out, const Dataset& data) {
  char buf[40];
  for (const auto& u : data) {
    out << u.id << ' ' << u.tokens.size() << ' ' << u.phones << ' ' << u.feats.rows() << ' '
        << u.feats.cols() << ' ' << u.domain << '\n';
    for (std::size_t i = 0; i < u.tokens.size(); ++i) out << (i ? " " : "") << u.tokens[i];
    out << '\n';
    for (std::size_t t = 0; t < u.feats.rows(); ++t) {
      for (std::size_t f = 0; f < u.feats.cols(); ++f) {
        std::snprintf(buf, sizeof(buf), "%.17g", u.feats(t, f));
        out << (f ? " " : "") << buf;
      }
      out << '\n';
    }
  }
}

namespace {

std::vector<int> parse_ints(const std::string& line, const std::string& where) {
  std::istringstream ss(line);
  std::vector<int> out;
  std::string tok;
  while (ss >> tok) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size()) throw DataError(where + ": bad token id '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

}  // namespace

Dataset read_dataset(std::istream& in) {
  Dataset data;
  std::string line;
  long lineno = 0;
  auto next_line = [&](const char* what) {
    if (!std::getline(in, line)) {
      throw DataError("dataset: unexpected end of file, expected " + std::string(what));
    }
    ++lineno;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream header(line);
    Utterance u;
    long n = -1, t = -1, f = -1;
    if (!(header >> u.id >> n >> u.phones >> t >> f >> u.domain) || n < 0 || t < 0 || f < 0) {
      throw DataError("dataset:" + std::to_string(lineno) + ": malformed header");
    }
    if (u.domain != "source" && u.domain != "target") {
      throw DataError("dataset:" + std::to_string(lineno) + ": unknown domain '" + u.domain + "'");
    }
    next_line("token line");
    u.tokens = parse_ints(line, "dataset:" + std::to_string(lineno));
    if (static_cast<long>(u.tokens.size()) != n) {
      throw DataError("dataset:" + std::to_string(lineno) + ": expected " + std::to_string(n) +
                      " tokens");
    }
    std::vector<double> vals;
    vals.reserve(static_cast<std::size_t>(t * f));
    for (long r = 0; r < t; ++r) {
      next_line("frame line");
      std::istringstream ss(line);
      std::string tok;
      long cols = 0;
      while (ss >> tok) {
        char* end = nullptr;
        const double v = std::strtod(tok.c_str(), &end);
        if (end != tok.c_str() + tok.size()) {
          throw DataError("dataset:" + std::to_string(lineno) + ": bad number '" + tok + "'");
        }
        vals.push_back(v);
        ++cols;
      }
      if (cols != f) {
        throw DataError("dataset:" + std::to_string(lineno) + ": expected " + std::to_string(f) +
                        " features");
      }
    }
    u.feats = Matrix(static_cast<std::size_t>(t), static_cast<std::size_t>(f), std::move(vals));
    u.validate();
    data.push_back(std::move(u));
  }
  return data;
}

void save_dataset(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  write_dataset(out, data);
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read '" + path.string() + "'");
  return read_dataset(in);
}

void save_text(const std::filesystem::path& path, const TextCorpus& corpus) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  for (const auto& seq : corpus) {
    for (std::size_t i = 0; i < seq.size(); ++i) out << (i ? " " : "") << seq[i];
    out << '\n';
  }
}

TextCorpus load_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read '" + path.string() + "'");
  TextCorpus corpus;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto seq = parse_ints(line, path.string() + ":" + std::to_string(lineno));
    if (!seq.empty()) corpus.push_back(std::move(seq));
  }
  return corpus;
}

TextCorpus transcripts(const Dataset& data) {
  TextCorpus out;
  out.reserve(data.size());
  for (const auto& u : data) out.push_back(u.tokens);
  return out;
}

}  // namespace lst::train
