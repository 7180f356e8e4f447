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
#include <string>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "difftts/audio.hpp"
#include "difftts/inference.hpp"
#include "difftts/metrics.hpp"
#include "difftts/schedule.hpp"
#include "difftts/training.hpp"

namespace py = pybind11;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const DoubleArray& arr) {
  if (arr.ndim() != 1) {
    throw difftts::ShapeError("expected a 1-D waveform, got " +
                              std::to_string(arr.ndim()) + " dimensions");
  }
  const double* p = arr.data();
  return std::vector<double>(p, p + arr.size());
}

py::array_t<double> to_array(const std::vector<double>& v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

difftts::SamplerConfig make_sampler(const difftts::TrainConfig& cfg,
                                    int n_steps, std::uint64_t seed,
                                    std::int64_t length,
                                    std::int64_t trim_chunk,
                                    double trim_cutoff) {
  difftts::SamplerConfig s;
  s.n_steps = n_steps;
  s.seed = seed;
  s.length = length > 0 ? length : cfg.length;
  s.trim_chunk = trim_chunk;
  s.trim_cutoff = trim_cutoff;
  s.validate();
  return s;
}

py::dict trim_dict(const difftts::TrimResult& r, std::int64_t rate) {
  py::dict d;
  d["samples"] = to_array(r.samples);
  d["all_silent"] = r.all_silent;
  d["sample_rate"] = rate;
  return d;
}

// Owns a frozen checkpoint; every method re-enters the C++ sampler with
// the GIL held because the model object is shared mutable state.
class Synthesizer {
 public:
  explicit Synthesizer(const std::string& checkpoint)
      : bundle_(difftts::load_model_bundle<float>(checkpoint)) {}

  std::int64_t sample_rate() const { return bundle_.config.sample_rate; }
  std::int64_t window() const { return bundle_.config.length; }
  std::uint64_t step() const { return bundle_.step; }
  std::string config_json() const { return bundle_.config.to_json(); }

  py::dict synthesize(const std::string& text, int n_steps,
                      std::uint64_t seed, std::int64_t length,
                      std::int64_t trim_chunk, double trim_cutoff) {
    const auto sampler = make_sampler(bundle_.config, n_steps, seed, length,
                                      trim_chunk, trim_cutoff);
    const auto r =
        difftts::synthesize(text, *bundle_.model, bundle_.frontend, sampler);
    return trim_dict(r, sample_rate());
  }

  py::dict prompt(const std::string& text, const DoubleArray& prompt_audio,
                  std::int64_t prompt_len, int n_steps, std::uint64_t seed,
                  std::int64_t length, std::int64_t trim_chunk,
                  double trim_cutoff) {
    const auto sampler = make_sampler(bundle_.config, n_steps, seed, length,
                                      trim_chunk, trim_cutoff);
    const auto p = to_vector(prompt_audio);
    const std::int64_t n =
        prompt_len >= 0 ? prompt_len : static_cast<std::int64_t>(p.size());
    const auto r = difftts::prompt_synthesize(text, p, n, *bundle_.model,
                                              bundle_.frontend, sampler);
    return trim_dict(r, sample_rate());
  }

  py::array_t<double> inpaint(const std::string& text,
                              const DoubleArray& audio, double start_s,
                              double end_s, int n_steps, std::uint64_t seed,
                              std::int64_t length) {
    const auto sampler = make_sampler(bundle_.config, n_steps, seed, length,
                                      1024, 0.02);
    const auto wav = to_vector(audio);
    const auto mask = difftts::mask_from_span(wav, start_s, end_s,
                                              sample_rate(), sampler.length);
    return to_array(difftts::inpaint(text, mask, *bundle_.model,
                                     bundle_.frontend, sampler));
  }

  py::dict classify(const DoubleArray& probe, const py::list& candidates,
                    int n_timesteps, std::uint64_t seed,
                    const std::string& transcript, std::int64_t length) {
    std::vector<std::vector<double>> cands;
    cands.reserve(candidates.size());
    for (const auto& c : candidates) {
      cands.push_back(to_vector(c.cast<DoubleArray>()));
    }
    difftts::SamplerConfig sampler;
    sampler.length = length > 0 ? length : bundle_.config.length;
    difftts::Rng rng(seed);
    const auto probe_vec = to_vector(probe);
    const auto r = difftts::speaker_classify(
        probe_vec, cands, *bundle_.model, bundle_.frontend, n_timesteps, rng,
        sampler, transcript);
    py::dict d;
    d["index"] = r.index;
    d["scores"] = to_array(r.scores);
    return d;
  }

 private:
  difftts::ModelBundle<float> bundle_;
};

std::uint64_t train(const std::string& config_json,
                    const std::string& manifest_path,
                    const std::string& checkpoint_dir) {
  const auto cfg = difftts::TrainConfig::from_json(config_json);
  difftts::Trainer<float> trainer(cfg);
  py::gil_scoped_release release;
  return trainer.run_training(manifest_path, checkpoint_dir);
}

double fsd_between_sets(const py::list& set_a, const py::list& set_b,
                        std::int64_t sample_rate, std::int64_t dim) {
  auto embed = [&](const py::list& wavs) {
    std::vector<std::vector<double>> rows;
    rows.reserve(wavs.size());
    for (const auto& w : wavs) rows.push_back(to_vector(w.cast<DoubleArray>()));
    difftts::SyntheticEmbedder emb(dim);
    return difftts::gaussian_stats(difftts::embed_set(rows, emb, sample_rate));
  };
  const auto stats_a = embed(set_a);
  const auto stats_b = embed(set_b);
  return difftts::fsd(stats_a, stats_b);
}

}  // namespace

PYBIND11_MODULE(_difftts, m) {
  m.doc() = "Diffusion text-to-speech core";

  py::register_exception<difftts::Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<difftts::UsageError>(m, "UsageError", PyExc_ValueError);

  py::class_<Synthesizer>(m, "Synthesizer")
      .def(py::init<const std::string&>(), py::arg("checkpoint"))
      .def_property_readonly("sample_rate", &Synthesizer::sample_rate)
      .def_property_readonly("window", &Synthesizer::window)
      .def_property_readonly("step", &Synthesizer::step)
      .def_property_readonly("config_json", &Synthesizer::config_json)
      .def("synthesize", &Synthesizer::synthesize, py::arg("text"),
           py::arg("n_steps") = 1000, py::arg("seed") = 0,
           py::arg("length") = -1, py::arg("trim_chunk") = 1024,
           py::arg("trim_cutoff") = 0.02)
      .def("prompt", &Synthesizer::prompt, py::arg("text"),
           py::arg("prompt_audio"), py::arg("prompt_len") = -1,
           py::arg("n_steps") = 1000, py::arg("seed") = 0,
           py::arg("length") = -1, py::arg("trim_chunk") = 1024,
           py::arg("trim_cutoff") = 0.02)
      .def("inpaint", &Synthesizer::inpaint, py::arg("text"), py::arg("audio"),
           py::arg("start_s"), py::arg("end_s"), py::arg("n_steps") = 1000,
           py::arg("seed") = 0, py::arg("length") = -1)
      .def("classify", &Synthesizer::classify, py::arg("probe"),
           py::arg("candidates"), py::arg("n_timesteps") = 4,
           py::arg("seed") = 0, py::arg("transcript") = std::string(),
           py::arg("length") = -1);

  m.def("train", &train, py::arg("config_json"), py::arg("manifest_path"),
        py::arg("checkpoint_dir"));

  m.def("default_train_config",
        []() { return difftts::TrainConfig().to_json(); });
  m.def("toy_train_config", []() {
    difftts::TrainConfig cfg;
    cfg.model = difftts::UNetConfig::toy();
    cfg.frontend.toy_d_model = 12;
    cfg.frontend.toy_heads = 2;
    cfg.frontend.toy_ff = 24;
    cfg.sample_rate = 8000;
    cfg.length = 4096;
    return cfg.to_json();
  });

  m.def("inference_alpha_bars", [](int n_steps) {
    return to_array(difftts::build_inference_schedule(n_steps).alpha_bar);
  });

  m.def("normalize_text",
        [](const std::string& s) { return difftts::normalize_text(s); });

  m.def("fsd_between_sets", &fsd_between_sets, py::arg("set_a"),
        py::arg("set_b"), py::arg("sample_rate"), py::arg("dim") = 16);

  m.def("read_wav", [](const std::string& path) {
    const auto buf = difftts::read_wav(path);
    py::dict d;
    d["samples"] = to_array(buf.samples);
    d["sample_rate"] = buf.sample_rate;
    return d;
  });
  m.def("write_wav",
        [](const std::string& path, const DoubleArray& samples, int rate) {
          difftts::write_wav(path, to_vector(samples), rate);
        });
  m.def("resample",
        [](const DoubleArray& x, int rate_in, int rate_out) {
          return to_array(difftts::resample(to_vector(x), rate_in, rate_out));
        });
}
