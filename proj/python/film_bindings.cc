// Copyright 2026 The FILM Simulator Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "film/attack.h"
#include "film/cli.h"
#include "film/corpus.h"
#include "film/error.h"
#include "film/fedsim.h"
#include "film/metrics.h"
#include "film/model.h"
#include "film/transcript.h"

namespace py = pybind11;
using namespace film;

namespace {

py::array_t<double> ToArray(const Tensor& t) {
  py::array_t<double> out(t.shape);
  std::copy(t.data.begin(), t.data.end(), out.mutable_data());
  return out;
}

py::dict ToDict(const NamedTensors& tensors) {
  py::dict d;
  for (const auto& t : tensors.tensors()) d[py::str(t.name)] = ToArray(t);
  return d;
}

// Copies `arrays` into a tensor collection shaped like `like`.
NamedTensors FromDict(const py::dict& arrays, const NamedTensors& like) {
  NamedTensors out = like.ZerosLike();
  for (auto& t : out.tensors()) {
    if (!arrays.contains(t.name)) {
      throw Error(ErrorCode::kShapeError, "missing tensor " + t.name);
    }
    auto a = py::array_t<double, py::array::c_style | py::array::forcecast>::ensure(
        arrays[py::str(t.name)]);
    if (!a || static_cast<std::size_t>(a.size()) != t.size()) {
      throw Error(ErrorCode::kShapeError, "tensor " + t.name + " has the wrong size");
    }
    std::copy(a.data(), a.data() + a.size(), t.data.begin());
  }
  return out;
}

Tensor TensorFromArray(const py::array_t<double, py::array::c_style |
                                                     py::array::forcecast>& a) {
  if (a.ndim() != 2) throw Error(ErrorCode::kShapeError, "expected a 2-d array");
  Tensor t = Tensor::Zeros("grad", {static_cast<std::size_t>(a.shape(0)),
                                    static_cast<std::size_t>(a.shape(1))});
  std::copy(a.data(), a.data() + a.size(), t.data.begin());
  return t;
}

corpus::Batch MakeBatch(const std::vector<std::vector<corpus::TokenId>>& rows) {
  std::vector<corpus::Sentence> members;
  for (const auto& r : rows) members.push_back({r, "", {}});
  return corpus::Batch(std::move(members));
}

}  // namespace

PYBIND11_MODULE(_film, m) {
  m.doc() = "Federated LM training simulator and gradient-leakage attack";

  py::register_exception<Error>(m, "FilmError", PyExc_RuntimeError);

  m.attr("PAD_ID") = corpus::kPadId;
  m.attr("UNK_ID") = corpus::kUnkId;
  m.attr("BOS_ID") = corpus::kBosId;

  // corpus
  py::class_<corpus::Vocab>(m, "Vocab")
      .def_static("from_tokens", &corpus::Vocab::FromTokens)
      .def_static("load", &corpus::Vocab::Load)
      .def("save", &corpus::Vocab::Save)
      .def("__len__", &corpus::Vocab::size)
      .def("id", &corpus::Vocab::id)
      .def("token", &corpus::Vocab::token)
      .def_property_readonly("tokens", &corpus::Vocab::tokens);

  py::class_<corpus::Sentence>(m, "Sentence")
      .def_readonly("token_ids", &corpus::Sentence::token_ids)
      .def_readonly("raw_text", &corpus::Sentence::raw_text)
      .def_property_readonly("entity_spans", [](const corpus::Sentence& s) {
        std::vector<std::pair<std::size_t, std::size_t>> out;
        for (const auto& e : s.entity_spans) out.emplace_back(e.start, e.end);
        return out;
      });

  py::class_<corpus::Corpus>(m, "Corpus")
      .def_readonly("sentences", &corpus::Corpus::sentences)
      .def("__len__", &corpus::Corpus::size);

  m.def("build_vocab",
        [](const std::vector<std::string>& lines, std::size_t max_size) {
          return corpus::BuildVocab(lines, max_size);
        },
        py::arg("lines"),
        py::arg("max_size") = corpus::kDefaultVocabSize);
  m.def("tokenize", [](const std::string& text, const corpus::Vocab& v) {
    return corpus::Tokenize(text, v).token_ids;
  });
  m.def("detokenize", [](const std::vector<corpus::TokenId>& ids,
                         const corpus::Vocab& v) {
    return corpus::Detokenize(ids, v);
  });
  m.def("read_lines", &corpus::ReadLines);
  m.def("load_corpus", [](const std::filesystem::path& p, const corpus::Vocab& v) {
    return corpus::LoadCorpus(p, v);
  });

  // model
  py::class_<model::Hyperparams>(m, "Hyperparams")
      .def(py::init<>())
      .def_readwrite("vocab_size", &model::Hyperparams::vocab_size)
      .def_readwrite("hidden_dim", &model::Hyperparams::hidden_dim)
      .def_readwrite("n_layers", &model::Hyperparams::n_layers)
      .def_readwrite("n_heads", &model::Hyperparams::n_heads)
      .def_readwrite("max_positions", &model::Hyperparams::max_positions)
      .def_readwrite("tie_embeddings", &model::Hyperparams::tie_embeddings);

  py::class_<model::ModelParams>(m, "ModelParams")
      .def_readonly("hyper", &model::ModelParams::hyper)
      .def("tensors", [](const model::ModelParams& p) { return ToDict(p.tensors); })
      .def("with_tensors", [](const model::ModelParams& p, const py::dict& d) {
        return model::ModelParams{p.hyper, FromDict(d, p.tensors)};
      })
      .def("save", [](const model::ModelParams& p, const std::filesystem::path& path) {
        model::SaveParams(p, path);
      });

  m.def("parameter_count", &model::ParameterCount);
  m.def("init_params", [](const model::Hyperparams& h, std::uint64_t seed) {
    Rng rng(seed);
    return model::InitParams(h, rng);
  }, py::arg("hyper"), py::arg("seed") = 0);
  m.def("load_params", &model::LoadParams);
  m.def("next_token_dist", [](const model::ModelParams& p,
                              const std::vector<corpus::TokenId>& ctx) {
    return model::NextTokenDist(p, ctx);
  });
  m.def("sentence_log_prob", [](const model::ModelParams& p,
                                const std::vector<corpus::TokenId>& s) {
    return model::SentenceLogProb(p, s);
  });
  m.def("perplexity", [](const model::ModelParams& p,
                         const std::vector<corpus::TokenId>& s) {
    return model::Perplexity(p, s);
  });
  m.def("loss_and_gradients",
        [](const model::ModelParams& p,
           const std::vector<std::vector<corpus::TokenId>>& rows) {
          auto r = model::ComputeLossAndGradients(p, MakeBatch(rows));
          return py::make_tuple(r.loss, ToDict(r.grads.tensors));
        },
        "Mean cross-entropy of a batch of token-id rows and its gradients.");

  py::enum_<model::OptimizerKind>(m, "OptimizerKind")
      .value("SGD", model::OptimizerKind::kSgd)
      .value("ADAM", model::OptimizerKind::kAdam);

  py::class_<model::TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("learning_rate", &model::TrainConfig::learning_rate)
      .def_readwrite("optimizer", &model::TrainConfig::optimizer)
      .def_readwrite("iterations", &model::TrainConfig::iterations)
      .def_readwrite("batch_size", &model::TrainConfig::batch_size)
      .def_readwrite("freeze_embeddings", &model::TrainConfig::freeze_embeddings)
      .def_readwrite("seed", &model::TrainConfig::seed);

  // fedsim
  py::class_<fedsim::DefenseConfig>(m, "DefenseConfig")
      .def_static("none", &fedsim::DefenseConfig::None)
      .def_static("prune", &fedsim::DefenseConfig::Prune, py::arg("ratio"))
      .def_static("dpsgd", &fedsim::DefenseConfig::Dpsgd, py::arg("clip"),
                  py::arg("sigma"))
      .def_static("freeze_embeddings", &fedsim::DefenseConfig::FreezeEmbeddings)
      .def_property_readonly("kind", [](const fedsim::DefenseConfig& d) {
        return fedsim::DefenseKindName(d.kind);
      });

  py::class_<fedsim::TranscriptEntry>(m, "TranscriptEntry")
      .def_readonly("iteration", &fedsim::TranscriptEntry::iteration)
      .def_readonly("params", &fedsim::TranscriptEntry::params)
      .def("gradients", [](const fedsim::TranscriptEntry& e) {
        return ToDict(e.transmitted.tensors);
      })
      .def("batch_rows", [](const fedsim::TranscriptEntry& e) {
        std::vector<std::vector<corpus::TokenId>> rows;
        if (e.eval_only_batch) {
          for (const auto& s : e.eval_only_batch->members()) rows.push_back(s.token_ids);
        }
        return rows;
      });

  py::class_<fedsim::TrainingRun>(m, "TrainingRun")
      .def_readonly("final_params", &fedsim::TrainingRun::final_params)
      .def_readonly("loss_curve", &fedsim::TrainingRun::loss_curve)
      .def_property_readonly("entries", [](const fedsim::TrainingRun& r) {
        return r.transcript.entries;
      });

  m.def("run_training",
        [](const corpus::Corpus& c, const model::Hyperparams& h,
           const model::TrainConfig& tc, const fedsim::DefenseConfig& d,
           std::size_t capture_every) {
          return fedsim::RunTraining(c, h, tc, d, capture_every);
        },
        py::arg("corpus"), py::arg("hyper"), py::arg("train_config"),
        py::arg("defense") = fedsim::DefenseConfig::None(),
        py::arg("capture_every") = 1000);
  m.def("observe",
        [](const model::ModelParams& p,
           const std::vector<std::vector<corpus::TokenId>>& rows,
           const fedsim::DefenseConfig& d, std::uint64_t seed) {
          Rng rng(seed);
          return fedsim::Observe(p, MakeBatch(rows), 0, d, rng);
        },
        py::arg("params"), py::arg("rows"),
        py::arg("defense") = fedsim::DefenseConfig::None(), py::arg("seed") = 0,
        "Client update an eavesdropper would record for these rows.");

  // attack
  m.def("extract_bag_of_words",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& g,
           std::optional<double> threshold) {
          auto mode = threshold ? attack::ExtractionMode::Threshold(*threshold)
                                : attack::ExtractionMode::Exact();
          return attack::ExtractBagOfWords(TensorFromArray(g), mode).token_ids;
        },
        py::arg("grad_word_embeddings"), py::arg("threshold") = py::none());
  m.def("extract_max_length",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& g) {
          return attack::ExtractMaxLength(TensorFromArray(g));
        });
  m.def("dpsgd_threshold", &attack::DpsgdThreshold, py::arg("sigma"),
        py::arg("hidden_dim"));
  m.def("ngram_repeat_count",
        [](const std::vector<corpus::TokenId>& t, std::size_t n) {
          return attack::NgramRepeatCount(t, n);
        });
  m.def("prior_score",
        [](const std::vector<corpus::TokenId>& t, const model::ModelParams& p,
           double beta) { return attack::PriorScore(t, p, beta); },
        py::arg("tokens"), py::arg("params"), py::arg("beta") = 1.0);

  py::class_<attack::RecoveredSentence>(m, "RecoveredSentence")
      .def_readonly("rank", &attack::RecoveredSentence::rank)
      .def_readonly("tokens", &attack::RecoveredSentence::tokens)
      .def_readonly("prior_score", &attack::RecoveredSentence::prior_score)
      .def_readonly("beam_score", &attack::RecoveredSentence::beam_score);

  py::class_<attack::AttackResult>(m, "AttackResult")
      .def_readonly("iteration", &attack::AttackResult::iteration)
      .def_property_readonly("bag", [](const attack::AttackResult& r) {
        return r.bag.token_ids;
      })
      .def_readonly("recovered_max_length", &attack::AttackResult::recovered_max_length)
      .def_readonly("recovered", &attack::AttackResult::recovered);

  m.def("recover",
        [](const fedsim::TranscriptEntry& e, const corpus::Vocab& v,
           std::size_t beam_size, std::size_t ngram, double penalty, double beta,
           std::size_t steps, std::size_t candidates, std::uint64_t seed,
           std::size_t repetitions) {
          attack::AttackOptions o;
          o.beam.beam_size = beam_size;
          o.beam.ngram = ngram;
          o.beam.penalty = penalty;
          o.reorder.beta = beta;
          o.reorder.steps_per_stage = steps;
          o.reorder.candidates_per_step = candidates;
          o.reorder.seed = seed;
          py::gil_scoped_release release;
          return attack::RecoverMultiple(e.observed(), v, o, repetitions);
        },
        py::arg("entry"), py::arg("vocab"), py::arg("beam_size") = 32,
        py::arg("ngram") = 2, py::arg("penalty") = 1.0, py::arg("beta") = 1.0,
        py::arg("steps") = 200, py::arg("candidates") = 32, py::arg("seed") = 0,
        py::arg("repetitions") = 1,
        "Recovers sentences from one observed update; raises FilmError "
        "(EmptyBag) when the update reveals no tokens.");

  // metrics
  m.def("rouge_n", [](const std::vector<corpus::TokenId>& c,
                      const std::vector<corpus::TokenId>& r,
                      std::size_t n) { return metrics::RougeN(c, r, n); });
  m.def("rouge_l", [](const std::vector<corpus::TokenId>& c,
                      const std::vector<corpus::TokenId>& r) {
    return metrics::RougeL(c, r);
  });
  m.def("token_set_scores", [](const std::vector<corpus::TokenId>& rec,
                               const std::vector<corpus::TokenId>& orig) {
    auto s = metrics::ComputeTokenSetScores(rec, orig);
    return py::make_tuple(s.precision, s.recall);
  });
  m.def("multi_sentence_scores",
        [](const std::vector<std::vector<corpus::TokenId>>& rec,
           const std::vector<std::vector<corpus::TokenId>>& batch,
           double threshold) {
          auto s = metrics::ComputeMultiSentenceScores(rec, batch, threshold);
          return py::make_tuple(s.recall, s.precision);
        },
        py::arg("recovered"), py::arg("batch"), py::arg("threshold") = 0.25);

  // command line
  m.def("run_cli", [](std::vector<std::string> args) {
    args.insert(args.begin(), "film");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    py::gil_scoped_release release;
    return cli::RunCli(static_cast<int>(argv.size()), argv.data());
  }, "Runs the command-line tool with `args` and returns its exit code.");
}
