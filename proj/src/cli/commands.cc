// Copyright (c) 2026 DTCF Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dtcf/cli/commands.h"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <vector>

#include "dtcf/audio/synth.h"
#include "dtcf/autodiff/ops.h"
#include "dtcf/base/error.h"
#include "dtcf/base/key_values.h"
#include "dtcf/data/manifest.h"
#include "dtcf/eval/embeddings.h"
#include "dtcf/eval/metrics.h"
#include "dtcf/model/checkpoint.h"
#include "dtcf/train/config.h"
#include "dtcf/train/trainer.h"

namespace dtcf::cli {

namespace fs = std::filesystem;

namespace {

void RequireFile(const std::string& path, const std::string& what) {
  if (!fs::is_regular_file(path)) throw IoError(what + " '" + path + "' does not exist");
}

void RequireDir(const std::string& path) {
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec || !fs::is_directory(path)) throw IoError("cannot create directory '" + path + "'");
}

// Identity forward, gradient scaled by 1.01 on the way back.
ad::Tensor<double> MutatedIdentity(const ad::Tensor<double>& x) {
  return ad::Tensor<double>::MakeResult(
      x.shape(), x.ToVector(), {x}, "mutated_identity", [](ad::Node<double>& self) {
        auto& in = *self.inputs[0];
        if (!in.requires_grad) return;
        auto& g = in.GradBuffer();
        for (size_t i = 0; i < g.size(); ++i) g[i] += 1.01 * self.grad[i];
      });
}

// sum(y * r) accumulated in extended precision, so that the objective adds
// little rounding noise to the central differences.
ad::Tensor<double> WeightedSum(const ad::Tensor<double>& y, const ad::Tensor<double>& r) {
  long double acc = 0.0L;
  for (int64_t i = 0; i < y.size(); ++i) {
    acc += static_cast<long double>(y.data()[i]) * r.data()[i];
  }
  return ad::Tensor<double>::MakeResult(
      {}, {static_cast<double>(acc)}, {y}, "weighted_sum",
      [weights = r.ToVector()](ad::Node<double>& self) {
        auto& in = *self.inputs[0];
        if (!in.requires_grad) return;
        auto& g = in.GradBuffer();
        for (size_t i = 0; i < g.size(); ++i) g[i] += self.grad[0] * weights[i];
      });
}

struct SynthArgs {
  int speakers = 10;
  int utts = 20;
  std::optional<uint64_t> seed;
  double duration = 2.0;
  double heldout = 0.2;
  std::string out;
};

int CmdSynth(const SynthArgs& a, std::ostream& out) {
  if (a.speakers < 2) throw ConfigError("--speakers must be at least 2, got " + std::to_string(a.speakers));
  if (a.utts < 1) throw ConfigError("--utts must be at least 1");
  audio::CorpusOptions opt;
  opt.speakers = a.speakers;
  opt.utts_per_speaker = a.utts;
  opt.seed = a.seed.value_or(EnvSeed());
  opt.duration = a.duration;
  opt.heldout_fraction = a.heldout;
  RequireDir(a.out);
  const auto s = audio::SynthCorpus(opt, a.out);
  out << "speakers=" << s.speakers << " utts=" << s.utterances << " trials=" << s.trials << "\n";
  return kExitOk;
}

struct TrainArgs {
  std::string config;
  std::vector<std::string> sets;
  std::string attention;
  std::string manifest;
  std::optional<uint64_t> seed;
  std::string out;
  std::string resume;
};

int CmdTrain(const TrainArgs& a, std::ostream& out) {
  KeyValues kv;
  if (!a.config.empty()) {
    RequireFile(a.config, "config file");
    kv = ReadKeyValueFile(a.config);
  }
  for (const auto& s : a.sets) {
    auto [key, value] = SplitAssignment(s);
    kv[key] = value;
  }
  if (!a.attention.empty()) kv["attention"] = a.attention;
  if (!a.manifest.empty()) kv["train_manifest"] = a.manifest;
  if (a.seed) {
    kv["seed"] = std::to_string(*a.seed);
  } else if (!kv.count("seed")) {
    kv["seed"] = std::to_string(EnvSeed());
  }
  const auto config = train::TrainConfig::FromKeyValues(kv);
  if (config.train_manifest.empty()) throw ConfigError("config key 'train_manifest' is not set");
  RequireFile(config.train_manifest, "training manifest");
  if (!a.resume.empty()) RequireFile(a.resume, "checkpoint");
  RequireDir(a.out);

  auto data = train::LoadLabeledFeatures(data::ReadManifest(config.train_manifest));
  train::Trainer trainer(config, std::move(data));
  if (!a.resume.empty()) trainer.Restore(model::Checkpoint::Read(a.resume));
  const int64_t params = trainer.model().ParameterCount();
  const int64_t attention_params = model::AttentionParameterTotal(config.model);
  out << "parameters=" << params << " attention_parameters=" << attention_params
      << " speakers=" << trainer.data().num_classes()
      << " utterances=" << trainer.data().size() << "\n";
  const auto report = train::RunTraining(&trainer, a.out);

  KeyValues info = {{"parameters", std::to_string(params)},
                    {"attention_parameters", std::to_string(attention_params)},
                    {"attention", attention::AttentionKindName(config.model.attention)},
                    {"steps", std::to_string(report.steps)},
                    {"final_loss", FormatDouble(report.last.loss)},
                    {"train_accuracy", FormatDouble(report.train_accuracy)}};
  std::ofstream info_file(fs::path(a.out) / "run_info.txt");
  info_file << FormatKeyValues(info);
  if (!info_file) throw IoError("cannot write run_info.txt in " + a.out);
  out << "steps=" << report.steps << " final_loss=" << FormatDouble(report.last.loss)
      << " train_accuracy=" << FormatDouble(report.train_accuracy) << "\n";
  return kExitOk;
}

int CmdExtract(const std::string& ckpt_path, const std::string& manifest,
               const std::string& out_path, std::ostream& out) {
  RequireFile(ckpt_path, "checkpoint");
  RequireFile(manifest, "manifest");
  auto net = eval::LoadSpeakerNet(model::Checkpoint::Read(ckpt_path));
  const auto store = eval::ExtractEmbeddings(&net, data::ReadManifest(manifest));
  eval::WriteEmbeddings(out_path, store);
  out << "embeddings=" << store.size() << " dim=" << net.config().embed_dim << "\n";
  return kExitOk;
}

int CmdEval(const std::string& emb, const std::string& trials_path, std::string scores_path,
            double p_target, std::ostream& out) {
  RequireFile(emb, "embedding file");
  RequireFile(trials_path, "trial list");
  const auto store = eval::ReadEmbeddings(emb);
  const auto trials = data::ReadTrials(trials_path);
  const auto set = eval::ScoreTrials(store, trials);
  eval::DcfParams params;
  params.p_target = p_target;
  const auto eer = eval::ComputeEer(set);
  const auto dcf = eval::ComputeMinDcf(set, params);
  if (scores_path.empty()) scores_path = (fs::path(emb).parent_path() / "scores.csv").string();
  eval::WriteScores(scores_path, trials, set);
  out << "eer=" << FormatDouble(eer.eer) << " minDcf=" << FormatDouble(dcf.min_dcf)
      << " threshold_eer=" << FormatDouble(eer.threshold)
      << " threshold_dcf=" << FormatDouble(dcf.threshold) << "\n";
  return kExitOk;
}

int CmdGradCheck(const std::string& kind_name, const std::string& shape_text,
                 std::optional<uint64_t> seed, bool mutate, std::ostream& out) {
  const auto kind = attention::ParseAttentionKind(kind_name);
  if (kind == attention::AttentionKind::kNone) {
    throw ConfigError("--attention must be se or dtcf for gradcheck");
  }
  const auto shape = ParseBlockShape(shape_text);
  const auto r = AttentionGradCheck(kind, shape, seed.value_or(EnvSeed()), mutate);
  const bool pass = r.Passed(kGradCheckTolerance);
  out << (pass ? "PASS" : "FAIL") << " attention=" << kind_name << " shape=" << shape_text
      << " max_rel_error=" << FormatDouble(r.max_rel_error)
      << " coords=" << r.coords_checked << "\n";
  if (!pass) out << "worst: " << r.Describe() << "\n";
  return pass ? kExitOk : kExitVerification;
}

}  // namespace

BlockShape ParseBlockShape(const std::string& text) {
  std::vector<int64_t> dims;
  size_t start = 0;
  while (true) {
    const size_t x = text.find('x', start);
    const std::string part = text.substr(start, x == std::string::npos ? x : x - start);
    int64_t v = 0;
    try {
      v = ParseInt("shape", part);
    } catch (const ConfigError&) {
      throw ConfigError("--shape must look like CxTxF, got '" + text + "'");
    }
    if (v < 1) throw ConfigError("--shape dimensions must be positive, got '" + text + "'");
    dims.push_back(v);
    if (x == std::string::npos) break;
    start = x + 1;
  }
  if (dims.size() != 3) throw ConfigError("--shape must look like CxTxF, got '" + text + "'");
  return {dims[0], dims[1], dims[2]};
}

ad::GradCheckResult AttentionGradCheck(attention::AttentionKind kind, const BlockShape& shape,
                                       uint64_t seed, bool mutate_backward) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  auto random = [&](const ad::Shape& s) {
    std::vector<double> v(ad::NumElements(s));
    for (auto& e : v) e = dist(rng);
    return ad::Tensor<double>::FromData(s, std::move(v));
  };
  const ad::Shape map_shape = {shape.channels, shape.frames, shape.bins};
  auto x = random(map_shape);
  auto weights = random(map_shape);
  ad::GradCheckOptions options;
  options.eps = kGradCheckStep;
  auto finish = [&](const ad::Tensor<double>& y) {
    return WeightedSum(mutate_backward ? MutatedIdentity(y) : y, weights);
  };
  if (kind == attention::AttentionKind::kSe) {
    attention::SeBlock<double> block(shape.channels, 8, false, rng);
    auto f = [&](const std::vector<ad::Tensor<double>>& in) {
      attention::SeBlock<double> b = block;
      b.w1() = in[1];
      b.w2() = in[2];
      return finish(attention::SeApply(in[0], b));
    };
    return ad::GradCheck(f, {x, block.w1(), block.w2()}, options);
  }
  if (kind == attention::AttentionKind::kDtcf) {
    attention::DtcfBlock<double> block(shape.channels, 8, false, rng);
    auto f = [&](const std::vector<ad::Tensor<double>>& in) {
      attention::DtcfBlock<double> b = block;
      b.w1() = in[1];
      b.w2() = in[2];
      b.w3() = in[3];
      return finish(attention::DtcfApply(in[0], b));
    };
    return ad::GradCheck(f, {x, block.w1(), block.w2(), block.w3()}, options);
  }
  throw ConfigError("gradcheck needs an attention block");
}

uint64_t EnvSeed(uint64_t fallback) {
  const char* env = std::getenv("DTCF_SEED");
  if (env == nullptr || *env == '\0') return fallback;
  const int64_t v = ParseInt("DTCF_SEED", env);
  if (v < 0) throw ConfigError("DTCF_SEED must be >= 0");
  return static_cast<uint64_t>(v);
}

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Speaker verification with duality temporal-channel-frequency attention"};
  app.name("dtcf");
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth-data", "Generate a synthetic speaker corpus");
  synth_cmd->add_option("--speakers", synth.speakers, "Number of speakers (>= 2)")
      ->capture_default_str();
  synth_cmd->add_option("--utts", synth.utts, "Utterances per speaker")->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed, "Random seed (default: $DTCF_SEED or 0)");
  synth_cmd->add_option("--duration", synth.duration, "Utterance length in seconds [1, 10]")
      ->capture_default_str();
  synth_cmd->add_option("--heldout", synth.heldout, "Held-out fraction per speaker")
      ->capture_default_str();
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train a speaker embedding network");
  train_cmd->add_option("--config", train_args.config, "key = value configuration file");
  train_cmd->add_option("--set", train_args.sets, "Override a configuration key (key=value)");
  train_cmd->add_option("--attention", train_args.attention, "Attention module")
      ->check(CLI::IsMember({"none", "se", "dtcf"}));
  train_cmd->add_option("--manifest", train_args.manifest, "Training manifest CSV");
  train_cmd->add_option("--seed", train_args.seed, "Random seed (default: config, $DTCF_SEED or 0)");
  train_cmd->add_option("--resume", train_args.resume, "Continue from this checkpoint");
  train_cmd->add_option("--out", train_args.out, "Output directory")->required();

  std::string ckpt, manifest, emb_out;
  auto* extract_cmd = app.add_subcommand("extract", "Extract embeddings for a manifest");
  extract_cmd->add_option("--ckpt", ckpt, "Checkpoint file")->required();
  extract_cmd->add_option("--manifest", manifest, "Manifest CSV")->required();
  extract_cmd->add_option("--out", emb_out, "Embedding CSV to write")->required();

  std::string emb_in, trials, scores;
  double p_target = 0.01;
  auto* eval_cmd = app.add_subcommand("eval", "Score trials and report EER and minDCF");
  eval_cmd->add_option("--emb", emb_in, "Embedding CSV")->required();
  eval_cmd->add_option("--trials", trials, "Trial list")->required();
  eval_cmd->add_option("--scores", scores, "Score CSV to write (default: next to --emb)");
  eval_cmd->add_option("--p-target", p_target, "Target prior for minDCF")->capture_default_str();

  std::string gc_kind, gc_shape;
  std::optional<uint64_t> gc_seed;
  bool gc_mutate = false;
  auto* gc_cmd = app.add_subcommand("gradcheck", "Finite-difference check of an attention block");
  gc_cmd->add_option("--attention", gc_kind, "Attention block")
      ->required()
      ->check(CLI::IsMember({"se", "dtcf"}));
  gc_cmd->add_option("--shape", gc_shape, "Feature map shape CxTxF")->required();
  gc_cmd->add_option("--seed", gc_seed, "Random seed (default: $DTCF_SEED or 0)");
  gc_cmd->add_flag("--mutate-backward", gc_mutate,
                   "Corrupt the backward rule (self-test of the checker)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*synth_cmd) return CmdSynth(synth, out);
    if (*train_cmd) return CmdTrain(train_args, out);
    if (*extract_cmd) return CmdExtract(ckpt, manifest, emb_out, out);
    if (*eval_cmd) return CmdEval(emb_in, trials, scores, p_target, out);
    if (*gc_cmd) return CmdGradCheck(gc_kind, gc_shape, gc_seed, gc_mutate, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const DivergenceError& e) {
    err << "error: training diverged: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const NumericError& e) {
    err << "error: training diverged: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataMismatch;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataMismatch;
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataMismatch;
  }
  return kExitUsage;
}

}  // namespace dtcf::cli
