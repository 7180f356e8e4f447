// Copyright 2026 The difftts Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "difftts/audio.hpp"
#include "difftts/inference.hpp"
#include "difftts/metrics.hpp"
#include "difftts/training.hpp"

namespace {

using difftts::hex64;
using json = nlohmann::json;

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag) {
  if (flag) return *flag;
  std::random_device rd;
  const std::uint64_t seed =
      (static_cast<std::uint64_t>(rd()) << 32) ^ static_cast<std::uint64_t>(rd());
  std::cout << "seed=" << seed << "\n";
  return seed;
}

void write_sidecar(const std::string& wav_path, const json& meta) {
  std::ofstream out(wav_path + ".json");
  if (!out) throw difftts::IoError("cannot write sidecar for " + wav_path);
  out << meta.dump(2) << "\n";
}

std::vector<double> load_audio_at(const std::string& path, int rate) {
  difftts::AudioBuffer buf = difftts::read_wav(path);
  if (buf.sample_rate == rate) return buf.samples;
  return difftts::resample(buf.samples, buf.sample_rate, rate);
}

// One wav path per line; '#' comments and anything after a tab ignored,
// so plain lists and training manifests both work.
std::vector<std::string> read_wav_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw difftts::IoError("cannot open wav list: " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    out.push_back(line.substr(0, line.find('\t')));
  }
  return out;
}

struct SynthArgs {
  std::string checkpoint;
  std::string text;
  std::string output;
  std::optional<std::uint64_t> seed;
  int steps = 1000;
  std::int64_t trim_chunk = 1024;
  double trim_cutoff = 0.02;
};

difftts::SamplerConfig make_sampler(const SynthArgs& args,
                                    const difftts::TrainConfig& cfg,
                                    std::uint64_t seed) {
  difftts::SamplerConfig sampler;
  sampler.n_steps = args.steps;
  sampler.seed = seed;
  sampler.length = cfg.length;
  sampler.trim_chunk = args.trim_chunk;
  sampler.trim_cutoff = args.trim_cutoff;
  sampler.validate();
  return sampler;
}

int cmd_synthesize(const SynthArgs& args) {
  if (args.text.empty()) throw difftts::InputError("no text to synthesize");
  auto bundle = difftts::load_model_bundle<float>(args.checkpoint);
  const std::uint64_t seed = resolve_seed(args.seed);
  const auto sampler = make_sampler(args, bundle.config, seed);
  const auto result =
      difftts::synthesize(args.text, *bundle.model, bundle.frontend, sampler);
  if (result.all_silent) {
    std::cout << "warning=all-silent\n";
  }
  difftts::write_wav(args.output, result.samples,
                     static_cast<int>(bundle.config.sample_rate));
  write_sidecar(args.output,
                json{{"command", "synthesize"},
                     {"text", args.text},
                     {"checkpoint", args.checkpoint},
                     {"config_hash", hex64(bundle.config.hash())},
                     {"seed", seed},
                     {"n_steps", sampler.n_steps},
                     {"sample_rate", bundle.config.sample_rate},
                     {"samples", result.samples.size()},
                     {"all_silent", result.all_silent}});
  std::cout << "wrote=" << args.output << "\n";
  return 0;
}

struct EditArgs {
  SynthArgs base;
  std::string input;
  double span_start = 0.0;
  double span_end = 0.0;
  std::vector<double> scales{1.0};
};

std::string scaled_name(const std::string& output, double scale, bool lone) {
  if (lone) return output;
  const std::size_t dot = output.rfind('.');
  char buf[32];
  std::snprintf(buf, sizeof buf, "_x%.2f", scale);
  if (dot == std::string::npos) return output + buf;
  return output.substr(0, dot) + buf + output.substr(dot);
}

int cmd_edit(const EditArgs& args) {
  if (args.base.text.empty()) throw difftts::InputError("no text for the edit");
  if (args.scales.empty()) throw difftts::InputError("no span scales given");
  auto bundle = difftts::load_model_bundle<float>(args.base.checkpoint);
  const std::uint64_t seed = resolve_seed(args.base.seed);
  const auto sampler = make_sampler(args.base, bundle.config, seed);
  const int rate = static_cast<int>(bundle.config.sample_rate);
  const auto audio = load_audio_at(args.input, rate);
  const double mid = 0.5 * (args.span_start + args.span_end);
  const double half = 0.5 * (args.span_end - args.span_start);
  for (const double scale : args.scales) {
    if (!(scale > 0.0)) throw difftts::InputError("span scales must be > 0");
    const double duration =
        static_cast<double>(audio.size()) / static_cast<double>(rate);
    const double lo = std::max(0.0, mid - half * scale);
    const double hi = std::min(duration, mid + half * scale);
    const auto mask =
        difftts::mask_from_span(audio, lo, hi, rate, bundle.config.length);
    auto wave =
        difftts::inpaint(args.base.text, mask, *bundle.model, bundle.frontend,
                         sampler);
    wave.resize(audio.size());
    const std::string path =
        scaled_name(args.base.output, scale, args.scales.size() == 1);
    difftts::write_wav(path, wave, rate);
    write_sidecar(path, json{{"command", "edit"},
                             {"text", args.base.text},
                             {"input", args.input},
                             {"checkpoint", args.base.checkpoint},
                             {"config_hash", hex64(bundle.config.hash())},
                             {"seed", seed},
                             {"n_steps", sampler.n_steps},
                             {"span_start_s", lo},
                             {"span_end_s", hi},
                             {"span_scale", scale},
                             {"sample_rate", rate}});
    std::cout << "wrote=" << path << "\n";
  }
  return 0;
}

struct ClassifyArgs {
  std::string checkpoint;
  std::string probe;
  std::vector<std::string> candidates;
  std::string transcript;
  int timesteps = 8;
  std::optional<std::uint64_t> seed;
  std::string report;
};

int cmd_classify(const ClassifyArgs& args) {
  auto bundle = difftts::load_model_bundle<float>(args.checkpoint);
  const std::uint64_t seed = resolve_seed(args.seed);
  const int rate = static_cast<int>(bundle.config.sample_rate);
  const auto probe = load_audio_at(args.probe, rate);
  std::vector<std::vector<double>> candidates;
  for (const auto& path : args.candidates) {
    candidates.push_back(load_audio_at(path, rate));
  }
  difftts::SamplerConfig sampler;
  sampler.seed = seed;
  sampler.length = bundle.config.length;
  difftts::Rng rng(seed);
  const auto result = difftts::speaker_classify(
      probe, candidates, *bundle.model, bundle.frontend, args.timesteps, rng,
      sampler, args.transcript);
  json report{{"command", "classify"},
              {"probe", args.probe},
              {"checkpoint", args.checkpoint},
              {"config_hash", hex64(bundle.config.hash())},
              {"seed", seed},
              {"n_timesteps", args.timesteps},
              {"index", result.index},
              {"match", args.candidates[result.index]}};
  json scores = json::array();
  for (std::size_t j = 0; j < result.scores.size(); ++j) {
    scores.push_back(json{{"candidate", args.candidates[j]},
                          {"score", result.scores[j]}});
  }
  report["scores"] = scores;
  std::cout << report.dump(2) << "\n";
  if (!args.report.empty()) {
    std::ofstream out(args.report);
    if (!out) throw difftts::IoError("cannot write report: " + args.report);
    out << report.dump(2) << "\n";
  }
  return 0;
}

struct FsdArgs {
  std::string list_a;
  std::string list_b;
  std::int64_t sample_rate = 24000;
  std::int64_t dim_a = 16;
  std::int64_t dim_b = 16;
  std::string report;
};

int cmd_fsd(const FsdArgs& args) {
  const auto paths_a = read_wav_list(args.list_a);
  const auto paths_b = read_wav_list(args.list_b);
  auto load_all = [&](const std::vector<std::string>& paths) {
    std::vector<std::vector<double>> waves;
    for (const auto& p : paths) {
      waves.push_back(load_audio_at(p, static_cast<int>(args.sample_rate)));
    }
    return waves;
  };
  difftts::SyntheticEmbedder emb_a(args.dim_a);
  difftts::SyntheticEmbedder emb_b(args.dim_b);
  const auto rows_a =
      difftts::embed_set(load_all(paths_a), emb_a, args.sample_rate, &paths_a);
  const auto rows_b =
      difftts::embed_set(load_all(paths_b), emb_b, args.sample_rate, &paths_b);
  const auto stats_a = difftts::gaussian_stats(rows_a);
  const auto stats_b = difftts::gaussian_stats(rows_b);
  const double value = difftts::fsd(stats_a, stats_b);
  const json report{{"command", "fsd"},
                    {"fsd", value},
                    {"count_a", stats_a.count},
                    {"count_b", stats_b.count},
                    {"embedder", emb_a.name()},
                    {"dim", emb_a.dim()},
                    {"sample_rate", args.sample_rate}};
  std::cout << report.dump(2) << "\n";
  if (!args.report.empty()) {
    std::ofstream out(args.report);
    if (!out) throw difftts::IoError("cannot write report: " + args.report);
    out << report.dump(2) << "\n";
  }
  return 0;
}

struct TrainArgs {
  std::string config;
  std::string manifest;
  std::string checkpoint_dir;
  bool resume = false;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> total_steps;
};

int cmd_train(const TrainArgs& args) {
  difftts::TrainConfig cfg = difftts::TrainConfig::load(args.config);
  if (args.seed) cfg.seed = *args.seed;
  if (args.total_steps) cfg.total_steps = *args.total_steps;
  const std::string ckpt = args.checkpoint_dir + "/checkpoint.dtts";
  if (!args.resume && std::filesystem::exists(ckpt)) {
    throw difftts::InputError(ckpt + " already exists; pass --resume to continue");
  }
  std::cout << "config_hash=" << hex64(cfg.hash()) << " seed=" << cfg.seed
            << "\n";
  difftts::Trainer<float> trainer(cfg);
  const std::uint64_t final_step = trainer.run_training(
      args.manifest, args.checkpoint_dir,
      [](std::uint64_t step, const difftts::LossBreakdown& lb, double lr) {
        std::printf("step=%llu total=%.6f residual=%.6f omega=%.6f lr=%.3e\n",
                    static_cast<unsigned long long>(step), lb.total,
                    lb.residual, lb.omega, lr);
        std::fflush(stdout);
      });
  std::cout << "done step=" << final_step << " checkpoint=" << ckpt << "\n";
  return 0;
}

void add_sampler_flags(CLI::App* cmd, SynthArgs& args) {
  cmd->add_option("--checkpoint", args.checkpoint, "Trained checkpoint")
      ->required();
  cmd->add_option("--text", args.text, "Transcript to voice")->required();
  cmd->add_option("--output", args.output, "Output wav path")->required();
  cmd->add_option("--seed", args.seed, "Sampling seed (drawn if absent)");
  cmd->add_option("--steps", args.steps, "Reverse diffusion steps");
  cmd->add_option("--trim-chunk", args.trim_chunk, "Silence trim chunk size");
  cmd->add_option("--trim-cutoff", args.trim_cutoff,
                  "Mean-magnitude silence cutoff");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diffusion text-to-speech over raw waveforms"};
  app.require_subcommand(1);

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "Train a model from a manifest");
  train->add_option("--config", train_args.config, "Train config JSON")
      ->required();
  train->add_option("--manifest", train_args.manifest, "TSV data manifest")
      ->required();
  train
      ->add_option("--checkpoint-dir", train_args.checkpoint_dir,
                   "Where checkpoints land")
      ->required();
  train->add_flag("--resume", train_args.resume, "Continue from a checkpoint");
  train->add_option("--seed", train_args.seed, "Overrides the config seed");
  train->add_option("--total-steps", train_args.total_steps,
                    "Overrides the configured step budget");

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synthesize", "Sample a waveform from text");
  add_sampler_flags(synth, synth_args);

  EditArgs edit_args;
  auto* edit = app.add_subcommand("edit", "Regenerate a span of a recording");
  add_sampler_flags(edit, edit_args.base);
  edit->add_option("--input", edit_args.input, "Recording to edit")->required();
  edit->add_option("--span-start", edit_args.span_start,
                   "Span start in seconds")
      ->required();
  edit->add_option("--span-end", edit_args.span_end, "Span end in seconds")
      ->required();
  edit->add_option("--scales", edit_args.scales,
                   "Span length scales, one output per scale");

  ClassifyArgs cls_args;
  auto* cls = app.add_subcommand(
      "classify", "Pick which candidate matches the probe speaker");
  cls->add_option("--checkpoint", cls_args.checkpoint, "Trained checkpoint")
      ->required();
  cls->add_option("--probe", cls_args.probe, "Probe wav")->required();
  cls->add_option("--candidate", cls_args.candidates, "Candidate wav (repeat)")
      ->required();
  cls->add_option("--transcript", cls_args.transcript,
                  "Optional conditioning transcript");
  cls->add_option("--timesteps", cls_args.timesteps,
                  "Noise-level draws per candidate");
  cls->add_option("--seed", cls_args.seed, "Draw seed (drawn if absent)");
  cls->add_option("--report", cls_args.report, "Also write the report here");

  FsdArgs fsd_args;
  auto* fsd = app.add_subcommand(
      "fsd", "Distribution distance between two sets of recordings");
  fsd->add_option("--list-a", fsd_args.list_a, "Wav list for set A")
      ->required();
  fsd->add_option("--list-b", fsd_args.list_b, "Wav list for set B")
      ->required();
  fsd->add_option("--sample-rate", fsd_args.sample_rate,
                  "Embedding sample rate");
  fsd->add_option("--dim-a", fsd_args.dim_a, "Embedder dimension for set A");
  fsd->add_option("--dim-b", fsd_args.dim_b, "Embedder dimension for set B");
  fsd->add_option("--report", fsd_args.report, "Also write the report here");

  try {
    app.parse(argc, argv);
    if (*train) return cmd_train(train_args);
    if (*synth) return cmd_synthesize(synth_args);
    if (*edit) return cmd_edit(edit_args);
    if (*cls) return cmd_classify(cls_args);
    if (*fsd) return cmd_fsd(fsd_args);
    return 2;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const difftts::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const difftts::Error& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
