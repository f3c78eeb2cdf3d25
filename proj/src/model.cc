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

#include "film/model.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

#include "film/error.h"

namespace film::model {
namespace {

constexpr double kInitStddev = 0.02;
constexpr double kLayerNormEps = 1e-5;
constexpr std::size_t kTensorsPerLayer = 12;

using Eigen::Index;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;

// Offsets inside one transformer block.
enum BlockTensor : std::size_t {
  kLn1Gain = 0,
  kLn1Bias,
  kQkvWeight,
  kQkvBias,
  kAttnProjWeight,
  kAttnProjBias,
  kLn2Gain,
  kLn2Bias,
  kFcWeight,
  kFcBias,
  kMlpProjWeight,
  kMlpProjBias,
};

std::size_t BlockIndex(std::size_t layer, BlockTensor which) {
  return 2 + layer * kTensorsPerLayer + which;
}

std::size_t FinalGainIndex(const Hyperparams& h) {
  return 2 + h.n_layers * kTensorsPerLayer;
}

std::size_t HeadIndex(const Hyperparams& h) { return FinalGainIndex(h) + 2; }

bool IsGain(const std::string& name) {
  return name.ends_with(".g");
}

double Gelu(double x) {
  constexpr double kC = 0.7978845608028654;  // sqrt(2 / pi)
  return 0.5 * x * (1.0 + std::tanh(kC * (x + 0.044715 * x * x * x)));
}

double GeluGrad(double x) {
  constexpr double kC = 0.7978845608028654;
  double u = kC * (x + 0.044715 * x * x * x);
  double t = std::tanh(u);
  return 0.5 * (1.0 + t) +
         0.5 * x * (1.0 - t * t) * kC * (1.0 + 3.0 * 0.044715 * x * x);
}

// Column sums accumulated row by row. Eigen's colwise().sum() picks scalar or
// packet evaluation per column from the destination's alignment, which makes
// the rounding depend on where the heap put the buffer.
RowVector ColumnSums(const RowMatrix& m) {
  RowVector out = RowVector::Zero(m.cols());
  for (Index r = 0; r < m.rows(); ++r) out += m.row(r);
  return out;
}

struct LayerNormCache {
  RowMatrix xhat;
  Eigen::VectorXd rstd;
};

RowMatrix LayerNormForward(const RowMatrix& x, const Tensor& gain,
                           const Tensor& bias, LayerNormCache& cache) {
  const Index rows = x.rows();
  const Index d = x.cols();
  cache.xhat.resize(rows, d);
  cache.rstd.resize(rows);
  for (Index r = 0; r < rows; ++r) {
    double mean = x.row(r).mean();
    double var = (x.row(r).array() - mean).square().mean();
    double rstd = 1.0 / std::sqrt(var + kLayerNormEps);
    cache.rstd(r) = rstd;
    cache.xhat.row(r) = (x.row(r).array() - mean) * rstd;
  }
  RowMatrix y = cache.xhat;
  y.array().rowwise() *= gain.matrix().row(0).array();
  y.rowwise() += bias.matrix().row(0);
  return y;
}

// Accumulates gain/bias gradients and returns d(input).
RowMatrix LayerNormBackward(const RowMatrix& dy, const LayerNormCache& cache,
                            const Tensor& gain, Tensor& dgain, Tensor& dbias) {
  dgain.matrix().row(0) += ColumnSums(dy.cwiseProduct(cache.xhat));
  dbias.matrix().row(0) += ColumnSums(dy);
  RowMatrix dxhat = dy;
  dxhat.array().rowwise() *= gain.matrix().row(0).array();
  const double inv_d = 1.0 / static_cast<double>(dy.cols());
  RowMatrix dx(dy.rows(), dy.cols());
  for (Index r = 0; r < dy.rows(); ++r) {
    double mean_dxhat = dxhat.row(r).sum() * inv_d;
    double mean_dot = dxhat.row(r).dot(cache.xhat.row(r)) * inv_d;
    dx.row(r) = cache.rstd(r) * (dxhat.row(r).array() - mean_dxhat -
                                 cache.xhat.row(r).array() * mean_dot)
                                    .matrix();
  }
  return dx;
}

struct BlockCache {
  RowMatrix input;
  LayerNormCache ln1;
  RowMatrix ln1_out;
  RowMatrix qkv;
  std::vector<RowMatrix> probs;  // one T x T matrix per head
  RowMatrix attn;                // concatenated head outputs
  RowMatrix mid;                 // input + attention branch
  LayerNormCache ln2;
  RowMatrix ln2_out;
  RowMatrix pre_act;
  RowMatrix act;
};

struct Trace {
  std::vector<TokenId> inputs;
  std::vector<BlockCache> blocks;
  LayerNormCache final_ln;
  RowMatrix final_out;  // T x d, feeds the output head
};

void CheckTokens(const Hyperparams& h, std::span<const TokenId> tokens) {
  for (TokenId t : tokens) {
    if (t < 0 || static_cast<std::size_t>(t) >= h.vocab_size) {
      throw Error(ErrorCode::kInvalidInput,
                  "token id " + std::to_string(t) + " outside vocabulary");
    }
  }
}

Trace Forward(const ModelParams& params, std::span<const TokenId> inputs) {
  const Hyperparams& h = params.hyper;
  const auto& tensors = params.tensors;
  const Index seq = static_cast<Index>(inputs.size());
  const Index d = static_cast<Index>(h.hidden_dim);
  const Index dh = d / static_cast<Index>(h.n_heads);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  Trace trace;
  trace.inputs.assign(inputs.begin(), inputs.end());
  RowMatrix x(seq, d);
  auto wte = params.word_embeddings().matrix();
  auto wpe = params.position_embeddings().matrix();
  for (Index i = 0; i < seq; ++i) {
    x.row(i) = wte.row(inputs[static_cast<std::size_t>(i)]) + wpe.row(i);
  }

  trace.blocks.resize(h.n_layers);
  for (std::size_t l = 0; l < h.n_layers; ++l) {
    BlockCache& c = trace.blocks[l];
    auto at = [&](BlockTensor which) -> const Tensor& {
      return tensors.at(BlockIndex(l, which));
    };
    c.input = x;
    c.ln1_out = LayerNormForward(x, at(kLn1Gain), at(kLn1Bias), c.ln1);
    c.qkv = c.ln1_out * at(kQkvWeight).matrix();
    c.qkv.rowwise() += at(kQkvBias).matrix().row(0);
    c.attn.resize(seq, d);
    c.probs.resize(h.n_heads);
    for (std::size_t head = 0; head < h.n_heads; ++head) {
      const Index off = static_cast<Index>(head) * dh;
      auto q = c.qkv.middleCols(off, dh);
      auto k = c.qkv.middleCols(d + off, dh);
      auto v = c.qkv.middleCols(2 * d + off, dh);
      RowMatrix scores = (q * k.transpose()) * scale;
      RowMatrix& p = c.probs[head];
      p.setZero(seq, seq);
      for (Index i = 0; i < seq; ++i) {
        double mx = scores.row(i).head(i + 1).maxCoeff();
        double z = 0.0;
        for (Index j = 0; j <= i; ++j) {
          p(i, j) = std::exp(scores(i, j) - mx);
          z += p(i, j);
        }
        p.row(i).head(i + 1) /= z;
      }
      c.attn.middleCols(off, dh) = p * v;
    }
    c.mid = x + c.attn * at(kAttnProjWeight).matrix();
    c.mid.rowwise() += at(kAttnProjBias).matrix().row(0);
    c.ln2_out = LayerNormForward(c.mid, at(kLn2Gain), at(kLn2Bias), c.ln2);
    c.pre_act = c.ln2_out * at(kFcWeight).matrix();
    c.pre_act.rowwise() += at(kFcBias).matrix().row(0);
    c.act = c.pre_act.unaryExpr(&Gelu);
    x = c.mid + c.act * at(kMlpProjWeight).matrix();
    x.rowwise() += at(kMlpProjBias).matrix().row(0);
  }
  const std::size_t fg = FinalGainIndex(h);
  trace.final_out = LayerNormForward(x, tensors.at(fg), tensors.at(fg + 1),
                                     trace.final_ln);
  return trace;
}

// logits = final_out * head, where head is U (d x V) or W^T when tied.
RowMatrix Logits(const ModelParams& params, const RowMatrix& hidden) {
  if (params.hyper.tie_embeddings) {
    return hidden * params.word_embeddings().matrix().transpose();
  }
  return hidden * params.tensors.at(HeadIndex(params.hyper)).matrix();
}

void LogSoftmaxRows(RowMatrix& logits) {
  for (Index r = 0; r < logits.rows(); ++r) {
    double mx = logits.row(r).maxCoeff();
    double lse = mx + std::log((logits.row(r).array() - mx).exp().sum());
    logits.row(r).array() -= lse;
  }
}

void Backward(const ModelParams& params, const Trace& trace,
              const RowMatrix& dlogits, Gradients& grads) {
  const Hyperparams& h = params.hyper;
  const auto& tensors = params.tensors;
  auto& g = grads.tensors;
  const Index seq = static_cast<Index>(trace.inputs.size());
  const Index d = static_cast<Index>(h.hidden_dim);
  const Index dh = d / static_cast<Index>(h.n_heads);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  RowMatrix dhidden;
  if (h.tie_embeddings) {
    auto wte = params.word_embeddings().matrix();
    g.at(0).matrix() += dlogits.transpose() * trace.final_out;
    dhidden = dlogits * wte;
  } else {
    const std::size_t hi = HeadIndex(h);
    g.at(hi).matrix() += trace.final_out.transpose() * dlogits;
    dhidden = dlogits * tensors.at(hi).matrix().transpose();
  }
  const std::size_t fg = FinalGainIndex(h);
  RowMatrix dx = LayerNormBackward(dhidden, trace.final_ln, tensors.at(fg),
                                   g.at(fg), g.at(fg + 1));

  for (std::size_t l = h.n_layers; l-- > 0;) {
    const BlockCache& c = trace.blocks[l];
    auto at = [&](BlockTensor which) -> const Tensor& {
      return tensors.at(BlockIndex(l, which));
    };
    auto grad = [&](BlockTensor which) -> Tensor& {
      return g.at(BlockIndex(l, which));
    };

    // MLP branch: x = mid + gelu(ln2(mid) Wfc + bfc) Wproj + bproj.
    grad(kMlpProjWeight).matrix() += c.act.transpose() * dx;
    grad(kMlpProjBias).matrix().row(0) += ColumnSums(dx);
    RowMatrix dact = dx * at(kMlpProjWeight).matrix().transpose();
    RowMatrix dpre = dact.cwiseProduct(c.pre_act.unaryExpr(&GeluGrad));
    grad(kFcWeight).matrix() += c.ln2_out.transpose() * dpre;
    grad(kFcBias).matrix().row(0) += ColumnSums(dpre);
    RowMatrix dln2 = dpre * at(kFcWeight).matrix().transpose();
    RowMatrix dmid = dx + LayerNormBackward(dln2, c.ln2, at(kLn2Gain),
                                            grad(kLn2Gain), grad(kLn2Bias));

    // Attention branch: mid = input + attn Wo + bo.
    grad(kAttnProjWeight).matrix() += c.attn.transpose() * dmid;
    grad(kAttnProjBias).matrix().row(0) += ColumnSums(dmid);
    RowMatrix dattn = dmid * at(kAttnProjWeight).matrix().transpose();
    RowMatrix dqkv(seq, 3 * d);
    for (std::size_t head = 0; head < h.n_heads; ++head) {
      const Index off = static_cast<Index>(head) * dh;
      auto q = c.qkv.middleCols(off, dh);
      auto k = c.qkv.middleCols(d + off, dh);
      auto v = c.qkv.middleCols(2 * d + off, dh);
      const RowMatrix& p = c.probs[head];
      auto dout = dattn.middleCols(off, dh);
      RowMatrix dp = dout * v.transpose();
      dqkv.middleCols(2 * d + off, dh) = p.transpose() * dout;
      RowMatrix ds(seq, seq);
      for (Index i = 0; i < seq; ++i) {
        double dot = p.row(i).dot(dp.row(i));
        ds.row(i) = p.row(i).array() * (dp.row(i).array() - dot);
      }
      dqkv.middleCols(off, dh) = (ds * k) * scale;
      dqkv.middleCols(d + off, dh) = (ds.transpose() * q) * scale;
    }
    grad(kQkvWeight).matrix() += c.ln1_out.transpose() * dqkv;
    grad(kQkvBias).matrix().row(0) += ColumnSums(dqkv);
    RowMatrix dln1 = dqkv * at(kQkvWeight).matrix().transpose();
    dx = dmid + LayerNormBackward(dln1, c.ln1, at(kLn1Gain), grad(kLn1Gain),
                                  grad(kLn1Bias));
  }

  auto dwte = g.at(0).matrix();
  auto dwpe = g.at(1).matrix();
  for (Index i = 0; i < seq; ++i) {
    dwte.row(trace.inputs[static_cast<std::size_t>(i)]) += dx.row(i);
    dwpe.row(i) += dx.row(i);
  }
}

std::vector<TokenId> WithBos(std::span<const TokenId> sentence) {
  std::vector<TokenId> inputs;
  inputs.reserve(sentence.size() + 1);
  inputs.push_back(corpus::kBosId);
  inputs.insert(inputs.end(), sentence.begin(), sentence.end());
  return inputs;
}

void CheckSentence(const Hyperparams& h, std::span<const TokenId> sentence) {
  if (sentence.empty()) {
    throw Error(ErrorCode::kInvalidInput, "empty sentence");
  }
  if (sentence.size() + 1 > h.max_positions) {
    throw Error(ErrorCode::kSequenceTooLong,
                std::to_string(sentence.size()) + " tokens plus <bos> exceed " +
                    std::to_string(h.max_positions) + " positions");
  }
  CheckTokens(h, sentence);
}

struct SentencePass {
  double cross_entropy = 0.0;  // summed over all positions, end included
  double log_prob = 0.0;       // sentence tokens only
};

// One forward pass over <bos> + sentence; when `grads` is set, adds
// weight * d(cross_entropy)/d(theta) into it.
SentencePass RunSentence(const ModelParams& params,
                         std::span<const TokenId> sentence, double weight,
                         Gradients* grads) {
  CheckSentence(params.hyper, sentence);
  auto inputs = WithBos(sentence);
  Trace trace = Forward(params, inputs);
  RowMatrix logp = Logits(params, trace.final_out);
  LogSoftmaxRows(logp);
  const Index seq = static_cast<Index>(inputs.size());
  auto target = [&](Index i) {
    return i + 1 < seq ? inputs[static_cast<std::size_t>(i + 1)]
                       : corpus::kBosId;
  };
  SentencePass pass;
  for (Index i = 0; i + 1 < seq; ++i) pass.log_prob += logp(i, target(i));
  pass.cross_entropy = -(pass.log_prob + logp(seq - 1, corpus::kBosId));
  if (grads != nullptr) {
    RowMatrix dlogits = logp.array().exp().matrix() * weight;
    for (Index i = 0; i < seq; ++i) dlogits(i, target(i)) -= weight;
    Backward(params, trace, dlogits, *grads);
  }
  return pass;
}

std::size_t PositionCount(const corpus::Batch& batch) {
  std::size_t n = 0;
  for (std::size_t r = 0; r < batch.size(); ++r) n += batch.length(r) + 1;
  return n;
}

}  // namespace

void Hyperparams::Validate() const {
  if (vocab_size < corpus::kNumSpecials + 1) {
    throw Error(ErrorCode::kInvalidInput, "vocab_size must be >= 4");
  }
  if (hidden_dim == 0 || n_heads == 0 || hidden_dim % n_heads != 0) {
    throw Error(ErrorCode::kInvalidInput,
                "hidden_dim must be a positive multiple of n_heads");
  }
  if (max_positions < 2) {
    throw Error(ErrorCode::kInvalidInput, "max_positions must be >= 2");
  }
}

std::vector<Tensor> ParameterLayout(const Hyperparams& h) {
  const std::size_t v = h.vocab_size;
  const std::size_t d = h.hidden_dim;
  std::vector<Tensor> out;
  out.push_back(Tensor::Zeros(kWordEmbeddings, {v, d}));
  out.push_back(Tensor::Zeros(kPositionEmbeddings, {h.max_positions, d}));
  for (std::size_t l = 0; l < h.n_layers; ++l) {
    std::string p = "h" + std::to_string(l) + ".";
    out.push_back(Tensor::Zeros(p + "ln1.g", {d}));
    out.push_back(Tensor::Zeros(p + "ln1.b", {d}));
    out.push_back(Tensor::Zeros(p + "attn.qkv.w", {d, 3 * d}));
    out.push_back(Tensor::Zeros(p + "attn.qkv.b", {3 * d}));
    out.push_back(Tensor::Zeros(p + "attn.proj.w", {d, d}));
    out.push_back(Tensor::Zeros(p + "attn.proj.b", {d}));
    out.push_back(Tensor::Zeros(p + "ln2.g", {d}));
    out.push_back(Tensor::Zeros(p + "ln2.b", {d}));
    out.push_back(Tensor::Zeros(p + "mlp.fc.w", {d, 4 * d}));
    out.push_back(Tensor::Zeros(p + "mlp.fc.b", {4 * d}));
    out.push_back(Tensor::Zeros(p + "mlp.proj.w", {4 * d, d}));
    out.push_back(Tensor::Zeros(p + "mlp.proj.b", {d}));
  }
  out.push_back(Tensor::Zeros("lnf.g", {d}));
  out.push_back(Tensor::Zeros("lnf.b", {d}));
  if (!h.tie_embeddings) out.push_back(Tensor::Zeros(kOutputHead, {d, v}));
  return out;
}

std::size_t ParameterCount(const Hyperparams& hyper) {
  std::size_t n = 0;
  for (const auto& t : ParameterLayout(hyper)) n += t.size();
  return n;
}

ModelParams InitParams(const Hyperparams& hyper, Rng& rng) {
  hyper.Validate();
  std::normal_distribution<double> normal(0.0, kInitStddev);
  ModelParams params{hyper, NamedTensors(ParameterLayout(hyper))};
  for (auto& t : params.tensors.tensors()) {
    if (t.shape.size() == 2) {
      for (double& v : t.data) v = normal(rng);
    } else if (IsGain(t.name)) {
      std::fill(t.data.begin(), t.data.end(), 1.0);
    }
  }
  return params;
}

ModelParams ParamsFromTensors(const Hyperparams& hyper, NamedTensors tensors) {
  hyper.Validate();
  NamedTensors expected(ParameterLayout(hyper));
  if (!expected.SameShapes(tensors)) {
    throw Error(ErrorCode::kCheckpointMismatch,
                "checkpoint tensors do not match the model hyperparameters");
  }
  return ModelParams{hyper, std::move(tensors)};
}

ModelParams LoadParams(const Hyperparams& hyper,
                       const std::filesystem::path& path) {
  return ParamsFromTensors(hyper, LoadTensors(path));
}

void SaveParams(const ModelParams& params, const std::filesystem::path& path) {
  SaveTensors(params.tensors, path);
}

std::vector<double> NextTokenLogProbs(const ModelParams& params,
                                      std::span<const TokenId> context) {
  if (context.empty()) {
    throw Error(ErrorCode::kInvalidInput, "context must be non-empty");
  }
  if (context.size() >= params.hyper.max_positions) {
    throw Error(ErrorCode::kSequenceTooLong,
                "context of " + std::to_string(context.size()) +
                    " tokens needs fewer than " +
                    std::to_string(params.hyper.max_positions));
  }
  CheckTokens(params.hyper, context);
  Trace trace = Forward(params, context);
  RowMatrix last = trace.final_out.bottomRows(1);
  RowMatrix logp = Logits(params, last);
  LogSoftmaxRows(logp);
  return std::vector<double>(logp.data(), logp.data() + logp.size());
}

std::vector<double> NextTokenDist(const ModelParams& params,
                                  std::span<const TokenId> context) {
  auto probs = NextTokenLogProbs(params, context);
  for (double& p : probs) p = std::exp(p);
  return probs;
}

double SentenceLogProb(const ModelParams& params,
                       std::span<const TokenId> sentence) {
  return RunSentence(params, sentence, 0.0, nullptr).log_prob;
}

double Perplexity(const ModelParams& params,
                  std::span<const TokenId> sentence) {
  double logprob = SentenceLogProb(params, sentence);
  return std::exp(-logprob / static_cast<double>(sentence.size()));
}

LossAndGradients ComputeLossAndGradients(const ModelParams& params,
                                         const corpus::Batch& batch) {
  const double weight = 1.0 / static_cast<double>(PositionCount(batch));
  LossAndGradients out;
  out.grads.tensors = params.tensors.ZerosLike();
  double total = 0.0;
  for (std::size_t r = 0; r < batch.size(); ++r) {
    total += RunSentence(params, batch.tokens(r), weight, &out.grads).cross_entropy;
  }
  out.loss = total * weight;
  if (!std::isfinite(out.loss) || !out.grads.tensors.AllFinite()) {
    throw Error(ErrorCode::kNumericalFailure, "non-finite loss or gradient");
  }
  return out;
}

LossAndGradients ComputeLossAndGradients(const ModelParams& params,
                                         std::span<const TokenId> sentence) {
  const double weight = 1.0 / static_cast<double>(sentence.size() + 1);
  LossAndGradients out;
  out.grads.tensors = params.tensors.ZerosLike();
  out.loss = RunSentence(params, sentence, weight, &out.grads).cross_entropy * weight;
  if (!std::isfinite(out.loss) || !out.grads.tensors.AllFinite()) {
    throw Error(ErrorCode::kNumericalFailure, "non-finite loss or gradient");
  }
  return out;
}

SentenceScore ScoreSentence(const ModelParams& params,
                            std::span<const TokenId> sentence) {
  const double weight = 1.0 / static_cast<double>(sentence.size() + 1);
  Gradients grads{params.tensors.ZerosLike()};
  SentencePass pass = RunSentence(params, sentence, weight, &grads);
  return SentenceScore{pass.log_prob, grads.tensors.GlobalL2Norm()};
}

std::vector<LossAndGradients> PerExampleGradients(const ModelParams& params,
                                                  const corpus::Batch& batch) {
  std::vector<LossAndGradients> out;
  out.reserve(batch.size());
  for (std::size_t r = 0; r < batch.size(); ++r) {
    out.push_back(ComputeLossAndGradients(params, batch.tokens(r)));
  }
  return out;
}

double ComputeLoss(const ModelParams& params, const corpus::Batch& batch) {
  double total = 0.0;
  for (std::size_t r = 0; r < batch.size(); ++r) {
    total += RunSentence(params, batch.tokens(r), 1.0, nullptr).cross_entropy;
  }
  return total / static_cast<double>(PositionCount(batch));
}

void TrainConfig::Validate() const {
  if (!(learning_rate > 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "learning rate must be positive");
  }
  if (batch_size == 0) {
    throw Error(ErrorCode::kInvalidInput, "batch size must be >= 1");
  }
}

ModelParams ApplyUpdate(const ModelParams& params, const Gradients& grads,
                        const TrainConfig& config, OptimizerState& state) {
  if (!params.tensors.SameShapes(grads.tensors)) {
    throw Error(ErrorCode::kShapeError,
                "gradients are not shape-congruent with parameters");
  }
  ModelParams next = params;
  const std::size_t first = config.freeze_embeddings ? 2 : 0;
  const double lr = config.learning_rate;
  if (config.optimizer == OptimizerKind::kSgd) {
    for (std::size_t i = first; i < next.tensors.count(); ++i) {
      auto& theta = next.tensors.at(i).data;
      const auto& g = grads.tensors.at(i).data;
      for (std::size_t j = 0; j < theta.size(); ++j) theta[j] -= lr * g[j];
    }
    return next;
  }
  if (state.first_moment.count() == 0) {
    state.first_moment = params.tensors.ZerosLike();
    state.second_moment = params.tensors.ZerosLike();
    state.step = 0;
  }
  ++state.step;
  const double b1 = config.adam_beta1;
  const double b2 = config.adam_beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (std::size_t i = first; i < next.tensors.count(); ++i) {
    auto& theta = next.tensors.at(i).data;
    auto& m = state.first_moment.at(i).data;
    auto& v = state.second_moment.at(i).data;
    const auto& g = grads.tensors.at(i).data;
    for (std::size_t j = 0; j < theta.size(); ++j) {
      m[j] = b1 * m[j] + (1.0 - b1) * g[j];
      v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
      theta[j] -= lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + config.adam_epsilon);
    }
  }
  return next;
}

}  // namespace film::model
