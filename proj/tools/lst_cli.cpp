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


// lst: command-line front end for the label-synchronous transducer toolkit.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lst/autodiff/param_store.hpp"
#include "lst/common.hpp"
#include "lst/config.hpp"
#include "lst/ctc/ctc.hpp"
#include "lst/decoder/decoder.hpp"
#include "lst/rng.hpp"
#include "lst/training/dataset.hpp"
#include "lst/training/gradcheck.hpp"
#include "lst/training/metrics.hpp"
#include "lst/training/trainer.hpp"

namespace {

using namespace lst;

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

// Every tunable, populated from --config, then --set, then dedicated flags.
struct Settings {
  train::SynthSpec synth;
  nn::ModelConfig model;
  train::TrainConfig train;
  decode::BeamConfig beam;
};

struct CommonArgs {
  std::string config;
  std::vector<std::string> overrides;
  std::uint64_t seed = 1;
  std::string out;
  // Optional flag overrides.
  double gamma = 0.0, mu = 0.0, beta = 0.0, lm_weight = 0.0;
  int beam = 0, freeze_below = 0;
};

struct FlagHandles {
  CLI::Option* seed = nullptr;
  CLI::Option* gamma = nullptr;
  CLI::Option* mu = nullptr;
  CLI::Option* beta = nullptr;
  CLI::Option* beam = nullptr;
  CLI::Option* lm_weight = nullptr;
  CLI::Option* freeze_below = nullptr;
};

Settings load_settings(const CommonArgs& args, const FlagHandles& flags) {
  Settings s;
  ConfigBinder binder;
  s.synth.bind(binder);
  s.model.bind(binder);
  s.train.bind(binder);
  s.beam.bind(binder);
  KeyValueConfig kv;
  if (!args.config.empty()) kv = KeyValueConfig::from_file(args.config);
  for (const auto& pair : args.overrides) kv.set_pair(pair);
  binder.apply(kv);
  if (flags.seed->count()) s.train.seed = args.seed;
  if (flags.gamma && flags.gamma->count()) s.train.gamma = args.gamma;
  if (flags.mu && flags.mu->count()) s.train.mu = args.mu;
  if (flags.freeze_below && flags.freeze_below->count()) s.train.freeze_below = args.freeze_below;
  if (flags.beta && flags.beta->count()) s.beam.ctc_weight = args.beta;
  if (flags.beam && flags.beam->count()) s.beam.beam = args.beam;
  if (flags.lm_weight && flags.lm_weight->count()) s.beam.lm_weight = args.lm_weight;
  s.synth.vocab_size = s.model.vocab_size;
  s.synth.feat_dim = s.model.feat_dim;
  s.synth.validate();
  s.model.validate();
  s.train.validate();
  s.beam.validate();
  return s;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  return out;
}

nn::LsTransducer load_model(const Settings& s, const std::string& path) {
  nn::LsTransducer model(s.model, s.train.seed);
  ad::load_checkpoint(path, model.params());
  return model;
}

void check_vocabulary(const train::Dataset& data, const nn::ModelConfig& mc) {
  const nn::Vocabulary vocab = mc.vocab();
  for (const auto& u : data) {
    if (u.num_frames() > 0 && static_cast<int>(u.feats.cols()) != mc.feat_dim) {
      throw DataError(u.id + ": " + std::to_string(u.feats.cols()) + " features, model expects " +
                      std::to_string(mc.feat_dim));
    }
    for (int y : u.tokens) {
      if (!vocab.is_normal(y)) throw DataError(u.id + ": token id " + std::to_string(y) + " out of range");
    }
  }
}

void check_vocabulary(const train::TextCorpus& corpus, const nn::ModelConfig& mc) {
  const nn::Vocabulary vocab = mc.vocab();
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    for (int y : corpus[i]) {
      if (!vocab.is_normal(y)) {
        throw DataError("text line " + std::to_string(i + 1) + ": token id " + std::to_string(y) +
                        " out of range");
      }
    }
  }
}

void write_series_csv(const std::string& path, const char* column, const std::vector<double>& xs) {
  std::ofstream out = open_output(path);
  out << "epoch," << column << '\n';
  char buf[64];
  for (std::size_t i = 0; i < xs.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.10g\n", i + 1, xs[i]);
    out << buf;
  }
}

// ---------------------------------------------------------------------------

int run_synth(const Settings& s, const CommonArgs& args, const std::string& domain_name, int count,
              bool text_only) {
  const train::Domain domain = train::parse_domain(domain_name);
  if (count < 1) throw ContractError("synth: --count must be >= 1");
  const train::Lexicon lexicon(s.synth);
  if (text_only) {
    train::save_text(args.out, train::synth_text(lexicon, domain, count, s.train.seed));
  } else {
    train::save_dataset(args.out, train::synth_dataset(lexicon, domain, count, s.train.seed));
  }
  return 0;
}

int run_train(const Settings& s, const CommonArgs& args, const std::string& data_path,
              const std::string& metrics_path, const std::string& init_lm, bool trail) {
  const train::Dataset data = train::load_dataset(data_path);
  if (data.empty()) throw DataError("train: '" + data_path + "' holds no utterances");
  check_vocabulary(data, s.model);
  nn::LsTransducer model(s.model, s.train.seed);
  if (!init_lm.empty()) {
    nn::PredictionLm lm(s.model, s.train.seed);
    ad::load_checkpoint(init_lm, lm.params());
    train::load_prediction_network(model, lm);
  }
  const train::TrainResult result = train::train(
      model, data, s.train, [&](const train::EpochMetrics& m, nn::LsTransducer& mdl) {
        if (trail) {
          char suffix[32];
          std::snprintf(suffix, sizeof(suffix), ".epoch%03d", m.epoch);
          ad::save_checkpoint(mdl.params(), args.out + suffix);
        }
        return true;
      });
  ad::save_checkpoint(model.params(), args.out);
  std::ofstream metrics = open_output(metrics_path.empty() ? args.out + ".csv" : metrics_path);
  train::write_metrics_csv(metrics, result.log);
  if (result.diverged) {
    throw NumericError("train: loss became NaN after epoch " + std::to_string(result.log.size()) +
                       "; last good checkpoint written");
  }
  return 0;
}

int run_pretrain_lm(const Settings& s, const CommonArgs& args, const std::string& text_path,
                    const std::string& metrics_path) {
  const train::TextCorpus corpus = train::load_text(text_path);
  if (corpus.empty()) throw DataError("pretrain-lm: '" + text_path + "' holds no sequences");
  check_vocabulary(corpus, s.model);
  nn::PredictionLm lm(s.model, s.train.seed);
  const auto ppl = train::pretrain_lm(lm, corpus, s.train);
  ad::save_checkpoint(lm.params(), args.out);
  write_series_csv(metrics_path.empty() ? args.out + ".csv" : metrics_path, "perplexity", ppl);
  return 0;
}

int run_adapt(const Settings& s, const CommonArgs& args, const std::string& model_path,
              const std::string& text_path, const std::string& metrics_path) {
  const train::TextCorpus corpus = train::load_text(text_path);
  if (corpus.empty()) throw DataError("adapt: '" + text_path + "' holds no sequences");
  check_vocabulary(corpus, s.model);
  nn::LsTransducer model = load_model(s, model_path);
  const auto ppl = train::adapt_prediction_network(model, corpus, s.train);
  ad::save_checkpoint(model.params(), args.out);
  write_series_csv(metrics_path.empty() ? args.out + ".csv" : metrics_path, "perplexity", ppl);
  return 0;
}

int run_decode(const Settings& s, const CommonArgs& args, const std::string& model_path,
               const std::string& data_path, const std::string& lm_path, bool no_eos_mod,
               int chunk) {
  const train::Dataset data = train::load_dataset(data_path);
  check_vocabulary(data, s.model);
  const nn::LsTransducer model = load_model(s, model_path);
  decode::BeamConfig bc = s.beam;
  if (no_eos_mod) bc.eos_modification = false;
  std::unique_ptr<nn::PredictionLm> lm;
  if (!lm_path.empty()) {
    lm = std::make_unique<nn::PredictionLm>(s.model, s.train.seed);
    ad::load_checkpoint(lm_path, lm->params());
  }
  if (chunk < 0) throw ContractError("decode: --chunk must be >= 0");
  std::ofstream out = open_output(args.out);
  for (const auto& u : data) {
    decode::StreamingDecoder decoder(model, bc, lm.get());
    const auto T = u.feats.rows();
    const auto step = chunk > 0 ? static_cast<std::size_t>(chunk) : std::max<std::size_t>(T, 1);
    for (std::size_t t = 0; t < T; t += step) {
      const std::size_t stop = std::min(T, t + step);
      std::vector<double> rows(u.feats.values().begin() + static_cast<std::ptrdiff_t>(t * u.feats.cols()),
                               u.feats.values().begin() + static_cast<std::ptrdiff_t>(stop * u.feats.cols()));
      decoder.accept_frames(ad::Matrix(stop - t, u.feats.cols(), std::move(rows)));
    }
    decode::write_nbest(out, u.id, decoder.finish());
  }
  return 0;
}

// Rank-1 token sequences from an n-best file, keyed by utterance id.
std::map<std::string, std::vector<int>> read_one_best(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read '" + path + "'");
  std::map<std::string, std::vector<int>> best;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, '\t')) fields.push_back(f);
    if (line.back() == '\t') fields.emplace_back();
    if (fields.size() != 7) {
      throw DataError(path + ":" + std::to_string(lineno) + ": expected 7 tab-separated fields");
    }
    if (fields[1] != "1") continue;
    std::vector<int> toks;
    std::stringstream ts(fields[5]);
    std::string tok;
    while (ts >> tok) {
      try {
        toks.push_back(std::stoi(tok));
      } catch (const std::exception&) {
        throw DataError(path + ":" + std::to_string(lineno) + ": bad token '" + tok + "'");
      }
    }
    best[fields[0]] = std::move(toks);
  }
  return best;
}

bool looks_like_nbest(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) return line.find('\t') != std::string::npos;
  }
  return false;
}

bool looks_like_dataset(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string first;
    if (!(ss >> first)) continue;
    return first.find_first_not_of("-0123456789") != std::string::npos;
  }
  return false;
}

int run_eval(const std::string& ref_path, const std::string& hyp_path) {
  std::vector<std::string> ids;
  train::TextCorpus refs;
  if (looks_like_dataset(ref_path)) {
    for (auto& u : train::load_dataset(ref_path)) {
      ids.push_back(u.id);
      refs.push_back(std::move(u.tokens));
    }
  } else {
    refs = train::load_text(ref_path);
  }
  train::TextCorpus hyps;
  if (looks_like_nbest(hyp_path)) {
    if (ids.empty()) throw DataError("eval: an n-best hypothesis file needs a dataset reference");
    const auto best = read_one_best(hyp_path);
    for (const auto& id : ids) {
      auto it = best.find(id);
      if (it == best.end()) throw DataError("eval: no hypothesis for utterance '" + id + "'");
      hyps.push_back(it->second);
    }
  } else if (looks_like_dataset(hyp_path)) {
    hyps = train::transcripts(train::load_dataset(hyp_path));
  } else {
    hyps = train::load_text(hyp_path);
  }
  if (refs.size() != hyps.size()) {
    throw DataError("eval: " + std::to_string(refs.size()) + " references but " +
                    std::to_string(hyps.size()) + " hypotheses");
  }
  const train::ErrorRate er = train::token_error_rate(refs, hyps);
  std::printf("token_error_rate=%.6f errors=%ld ref_tokens=%ld\n", er.rate(), er.errors,
              er.ref_tokens);
  return 0;
}

int run_gradcheck(const Settings& s, int per_group, double tolerance) {
  const train::Lexicon lexicon(s.synth);
  Rng rng = make_stream(s.train.seed, "gradcheck.data");
  std::uniform_int_distribution<int> token(nn::Vocabulary::kFirstNormal, s.model.vocab_size - 1);
  std::vector<int> tokens;
  for (int i = 0; i < 5; ++i) {
    int y = token(rng);
    while (!tokens.empty() && y == tokens.back() && s.model.vocab().num_normal() > 1) y = token(rng);
    tokens.push_back(y);
  }
  const auto utt = train::render_utterance(lexicon, train::Domain::kSource, tokens, "gradcheck",
                                           s.train.seed);
  nn::LsTransducer model(s.model, s.train.seed);
  const auto report = train::check_lst_loss_gradients(model, utt, s.train, per_group, s.train.seed);
  std::printf("max_rel_error=%.3e checked=%zu max_rel_error_1e-8_floor=%.3e\n", report.max_rel_error,
              report.entries.size(), report.max_strict_rel_error);
  if (!(report.max_rel_error < tolerance)) {
    throw NumericError("gradcheck: max relative error " + std::to_string(report.max_rel_error) +
                       " exceeds tolerance");
  }
  return 0;
}

int run_oracle_ctc(std::uint64_t seed, int trials, int max_t, int max_v) {
  if (trials < 1 || max_t < 1 || max_v < 2) {
    throw ContractError("oracle-ctc: need --trials >= 1, --max-T >= 1, --max-V >= 2");
  }
  Rng rng = make_stream(seed, "oracle");
  std::normal_distribution<double> gauss(0.0, 1.5);
  double worst = 0.0;
  auto compare = [&worst](double lib, double oracle_prob) {
    if (oracle_prob <= 0.0) {
      if (lib > kLogSentinel && std::isfinite(lib)) worst = std::numeric_limits<double>::infinity();
      return;
    }
    worst = std::max(worst, std::fabs(lib - std::log(oracle_prob)));
  };
  for (int trial = 0; trial < trials; ++trial) {
    const int T = std::uniform_int_distribution<int>(1, max_t)(rng);
    const int V = std::uniform_int_distribution<int>(2, max_v)(rng);
    ad::Matrix logp(static_cast<std::size_t>(T), static_cast<std::size_t>(V));
    ad::Matrix probs(static_cast<std::size_t>(T), static_cast<std::size_t>(V));
    for (std::size_t t = 0; t < logp.rows(); ++t) {
      for (auto& x : logp.row_span(t)) x = gauss(rng);
      const double lse = ad::log_sum_exp(logp.row_span(t));
      for (std::size_t v = 0; v < logp.cols(); ++v) {
        logp(t, v) -= lse;
        probs(t, v) = std::exp(logp(t, v));
      }
    }
    const int n = std::uniform_int_distribution<int>(0, T)(rng);
    std::vector<int> seq;
    std::uniform_int_distribution<int> label(1, V - 1);
    for (int i = 0; i < n; ++i) seq.push_back(label(rng));

    // Full-sequence likelihood.
    const double oracle_label = ctc::brute_force_ctc_oracle(probs, ctc::OracleMode::kLabel, seq);
    compare(ctc::ctc_log_likelihood(logp, seq), oracle_label);
    const auto loss = ctc::ctc_loss(ad::Value::constant(logp), seq);
    compare(loss.feasible ? -loss.loss.item() : -std::numeric_limits<double>::infinity(), oracle_label);

    // Prefix scores of every h = g.q along the sequence, plus [eos] on the full one.
    ctc::PrefixOptions opts;
    opts.eos = V;  // keep every sampled label a normal token
    ctc::PrefixStatePtr state = ctc::initial_prefix_state();
    std::vector<int> g;
    for (int q : seq) {
      std::vector<int> h = g;
      h.push_back(q);
      const double oracle_prefix = ctc::brute_force_ctc_oracle(probs, ctc::OracleMode::kPrefix, h);
      const auto off = ctc::prefix_score_offline(g, q, state, logp, opts);
      const auto on = ctc::prefix_score_online(g, q, state, logp, T, T, opts);
      compare(off.score, oracle_prefix);
      compare(on.score, oracle_prefix);
      state = off.state;
      g = std::move(h);
    }
    const auto eos = ctc::prefix_score_online(g, opts.eos, state, logp, T, T, opts);
    compare(eos.score, ctc::brute_force_ctc_oracle(probs, ctc::OracleMode::kLabel, g));
  }
  std::printf("max_abs_delta=%.3e trials=%d\n", worst, trials);
  if (!(worst < 1e-9)) throw NumericError("oracle-ctc: deviation above 1e-9");
  return 0;
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '\t', ' ');
  return s;
}

int fail(const char* kind, const std::string& message, int code) {
  std::fprintf(stderr, "error\t%s\t%s\n", kind, one_line(message).c_str());
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Label-synchronous transducer toolkit"};
  app.require_subcommand(1);
  CommonArgs args;

  auto add_common = [&args](CLI::App* sub, FlagHandles& flags, bool needs_out) {
    sub->add_option("--config", args.config, "key=value configuration file")->check(CLI::ExistingFile);
    sub->add_option("--set", args.overrides, "configuration override key=value (repeatable)");
    flags.seed = sub->add_option("--seed", args.seed, "seed for every random stream");
    auto* out = sub->add_option("--out", args.out, "output path");
    if (needs_out) out->required();
  };

  std::map<std::string, FlagHandles> handles;

  // synth
  std::string domain = "source";
  int count = 2000;
  bool text_only = false;
  auto* synth = app.add_subcommand("synth", "write a synthetic dataset or text corpus");
  add_common(synth, handles["synth"], true);
  synth->add_option("--domain", domain, "source | target");
  synth->add_option("--count", count, "number of utterances or sequences");
  synth->add_flag("--text-only", text_only, "write a text corpus instead of a dataset");

  // train
  std::string data_path, metrics_path, init_lm;
  bool trail = false;
  auto* train_cmd = app.add_subcommand("train", "train a model on a dataset");
  add_common(train_cmd, handles["train"], true);
  train_cmd->add_option("--data", data_path, "training dataset")->required();
  train_cmd->add_option("--metrics", metrics_path, "per-epoch metrics CSV (default <out>.csv)");
  train_cmd->add_option("--init-lm", init_lm, "pre-trained prediction-network checkpoint");
  train_cmd->add_flag("--trail", trail, "also write <out>.epochNNN after every epoch");
  handles["train"].gamma = train_cmd->add_option("--gamma", args.gamma, "CTC loss weight");
  handles["train"].mu = train_cmd->add_option("--mu", args.mu, "quantity loss weight");

  // pretrain-lm
  std::string text_path;
  auto* pre = app.add_subcommand("pretrain-lm", "train the prediction network on text");
  add_common(pre, handles["pretrain-lm"], true);
  pre->add_option("--text", text_path, "text corpus")->required();
  pre->add_option("--metrics", metrics_path, "per-epoch perplexity CSV (default <out>.csv)");

  // adapt
  std::string model_path;
  auto* adapt = app.add_subcommand("adapt", "text-only adaptation of the prediction network");
  add_common(adapt, handles["adapt"], true);
  adapt->add_option("--model", model_path, "model checkpoint")->required();
  adapt->add_option("--text", text_path, "target-domain text corpus")->required();
  adapt->add_option("--metrics", metrics_path, "per-epoch perplexity CSV (default <out>.csv)");
  handles["adapt"].freeze_below =
      adapt->add_option("--freeze-below", args.freeze_below, "first adapted prediction layer");

  // decode
  std::string lm_path;
  bool no_eos_mod = false;
  int chunk = 0;
  auto* dec = app.add_subcommand("decode", "beam-search decode a dataset to an n-best file");
  add_common(dec, handles["decode"], true);
  dec->add_option("--model", model_path, "model checkpoint")->required();
  dec->add_option("--data", data_path, "dataset to decode")->required();
  dec->add_option("--lm", lm_path, "external language model checkpoint for shallow fusion");
  dec->add_flag("--no-eos-modification", no_eos_mod, "score [eos] at every horizon");
  dec->add_option("--chunk", chunk, "feed frames in chunks of this size (0: all at once)");
  handles["decode"].beta = dec->add_option("--beta", args.beta, "CTC weight in the beam score");
  handles["decode"].beam = dec->add_option("--beam", args.beam, "beam width");
  handles["decode"].lm_weight = dec->add_option("--lm-weight", args.lm_weight, "shallow fusion weight");

  // eval
  std::string ref_path, hyp_path;
  auto* eval = app.add_subcommand("eval", "token error rate of 1-best hypotheses");
  eval->add_option("--ref", ref_path, "reference dataset or text corpus")->required();
  eval->add_option("--hyp", hyp_path, "n-best file, dataset or text corpus")->required();

  // gradcheck
  int per_group = 4;
  double tolerance = 1e-4;
  auto* grad = app.add_subcommand("gradcheck", "finite-difference check of the training loss");
  add_common(grad, handles["gradcheck"], false);
  grad->add_option("--per-group", per_group, "entries checked in each parameter group");
  grad->add_option("--tol", tolerance, "maximum accepted relative error");

  // oracle-ctc
  int trials = 200, max_t = 8, max_v = 4;
  auto* oracle = app.add_subcommand("oracle-ctc", "compare CTC scores with path enumeration");
  oracle->add_option("--seed", args.seed, "seed");
  oracle->add_option("--trials", trials, "random instances");
  oracle->add_option("--max-T", max_t, "maximum frames");
  oracle->add_option("--max-V", max_v, "maximum vocabulary size (blank included)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), kExitUsage);
  }

  try {
    auto* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "eval") return run_eval(ref_path, hyp_path);
    if (name == "oracle-ctc") return run_oracle_ctc(args.seed, trials, max_t, max_v);
    const Settings s = load_settings(args, handles[name]);
    if (name == "synth") return run_synth(s, args, domain, count, text_only);
    if (name == "train") return run_train(s, args, data_path, metrics_path, init_lm, trail);
    if (name == "pretrain-lm") return run_pretrain_lm(s, args, text_path, metrics_path);
    if (name == "adapt") return run_adapt(s, args, model_path, text_path, metrics_path);
    if (name == "decode") return run_decode(s, args, model_path, data_path, lm_path, no_eos_mod, chunk);
    if (name == "gradcheck") return run_gradcheck(s, per_group, tolerance);
    return fail("usage", "unknown subcommand '" + name + "'", kExitUsage);
  } catch (const DataError& e) {
    return fail("data", e.what(), kExitData);
  } catch (const NumericError& e) {
    return fail("numeric", e.what(), kExitNumeric);
  } catch (const ContractError& e) {
    return fail("usage", e.what(), kExitUsage);
  } catch (const DimensionError& e) {
    return fail("usage", e.what(), kExitUsage);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 1);
  }
}
