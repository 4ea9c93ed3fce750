/*
 * Copyright 2026 The hedgepred Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "hedgepred/neural.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hedgepred/error.h"

namespace hedgepred {
namespace {

using ConstMap = Eigen::Map<const Matrix>;
using MutMap = Eigen::Map<Matrix>;
using ConstVecMap = Eigen::Map<const Eigen::RowVectorXd>;
using MutVecMap = Eigen::Map<Eigen::RowVectorXd>;

constexpr Eigen::Index kPredictChunk = 512;

double Sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double LogisticLoss(double z, int y) {
  const double softplus = std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
  return softplus - (y != 0 ? z : 0.0);
}

void FillUniform(std::vector<double>& params, std::size_t offset, std::size_t count,
                 std::size_t fan_in, Rng* init) {
  if (init == nullptr) return;
  const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(fan_in, 1)));
  for (std::size_t i = 0; i < count; ++i) params[offset + i] = init->Uniform(-bound, bound);
}

// Output-layer error dL/dz for the weighted mean loss; also returns the loss.
double OutputError(const Eigen::VectorXd& z, std::span<const int> y,
                   std::span<const double> weights, Eigen::VectorXd& dz) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) Fail(ErrorKind::kTraining, "loss weights sum to zero");
  double loss = 0.0;
  dz.resize(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    loss += weights[k] * LogisticLoss(z(i), y[k]);
    dz(i) = weights[k] * (Sigmoid(z(i)) - (y[k] != 0 ? 1.0 : 0.0)) / total;
  }
  return loss / total;
}

}  // namespace

void Network::Forward(const Matrix& x, std::span<double> proba) const {
  for (Eigen::Index start = 0; start < x.rows(); start += kPredictChunk) {
    const Eigen::Index len = std::min(kPredictChunk, x.rows() - start);
    const Eigen::VectorXd z = Logits(x.middleRows(start, len));
    for (Eigen::Index i = 0; i < len; ++i) {
      proba[static_cast<std::size_t>(start + i)] = Sigmoid(z(i));
    }
  }
}

double Network::Loss(const Matrix& x, std::span<const int> y,
                     std::span<const double> weights) const {
  const Eigen::VectorXd z = Logits(x);
  double total = 0.0;
  double loss = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    loss += weights[i] * LogisticLoss(z(static_cast<Eigen::Index>(i)), y[i]);
    total += weights[i];
  }
  return loss / total;
}

// ---------------------------------------------------------------------------
// MLP

MlpNetwork::MlpNetwork(std::size_t input_dim, std::vector<int> hidden, Rng* init)
    : input_dim_(input_dim), hidden_(std::move(hidden)) {
  if (input_dim_ == 0) Fail(ErrorKind::kConfig, "mlp: input dimension is zero");
  std::size_t prev = input_dim_;
  std::size_t total = 0;
  for (int h : hidden_) {
    if (h < 1) Fail(ErrorKind::kConfig, "mlp: hidden sizes must be positive");
    total += static_cast<std::size_t>(h) * prev + static_cast<std::size_t>(h);
    prev = static_cast<std::size_t>(h);
  }
  total += prev + 1;
  params_.assign(total, 0.0);
  std::size_t offset = 0;
  prev = input_dim_;
  for (int h : hidden_) {
    const auto hs = static_cast<std::size_t>(h);
    FillUniform(params_, offset, hs * prev, prev, init);
    offset += hs * prev + hs;
    prev = hs;
  }
  FillUniform(params_, offset, prev, prev, init);
}

Eigen::VectorXd MlpNetwork::Logits(const Matrix& x) const {
  Matrix a = x;
  std::size_t offset = 0;
  std::size_t prev = input_dim_;
  for (int h : hidden_) {
    const auto hs = static_cast<Eigen::Index>(h);
    ConstMap w(params_.data() + offset, hs, static_cast<Eigen::Index>(prev));
    ConstVecMap b(params_.data() + offset + static_cast<std::size_t>(h) * prev, hs);
    Matrix z = a * w.transpose();
    z.rowwise() += b;
    a = z.cwiseMax(0.0);
    offset += static_cast<std::size_t>(h) * prev + static_cast<std::size_t>(h);
    prev = static_cast<std::size_t>(h);
  }
  Eigen::Map<const Eigen::VectorXd> wo(params_.data() + offset,
                                       static_cast<Eigen::Index>(prev));
  Eigen::VectorXd z = a * wo;
  z.array() += params_[offset + prev];
  return z;
}

double MlpNetwork::LossAndGradient(const Matrix& x, std::span<const int> y,
                                   std::span<const double> weights,
                                   std::span<double> grad) const {
  std::fill(grad.begin(), grad.end(), 0.0);
  const std::size_t layers = hidden_.size();
  std::vector<Matrix> acts;  // acts[0] = input, acts[l] = output of layer l
  std::vector<Matrix> pre;
  std::vector<std::size_t> offsets;
  acts.push_back(x);
  std::size_t offset = 0;
  std::size_t prev = input_dim_;
  for (int h : hidden_) {
    const auto hs = static_cast<Eigen::Index>(h);
    ConstMap w(params_.data() + offset, hs, static_cast<Eigen::Index>(prev));
    ConstVecMap b(params_.data() + offset + static_cast<std::size_t>(h) * prev, hs);
    Matrix z = acts.back() * w.transpose();
    z.rowwise() += b;
    acts.push_back(z.cwiseMax(0.0));
    pre.push_back(std::move(z));
    offsets.push_back(offset);
    offset += static_cast<std::size_t>(h) * prev + static_cast<std::size_t>(h);
    prev = static_cast<std::size_t>(h);
  }
  const std::size_t out_offset = offset;
  Eigen::Map<const Eigen::VectorXd> wo(params_.data() + out_offset,
                                       static_cast<Eigen::Index>(prev));
  Eigen::VectorXd z = acts.back() * wo;
  z.array() += params_[out_offset + prev];

  Eigen::VectorXd dz;
  const double loss = OutputError(z, y, weights, dz);

  Eigen::Map<Eigen::VectorXd>(grad.data() + out_offset, static_cast<Eigen::Index>(prev)) =
      acts.back().transpose() * dz;
  grad[out_offset + prev] = dz.sum();
  Matrix da = dz * wo.transpose();

  for (std::size_t l = layers; l-- > 0;) {
    const auto hs = static_cast<Eigen::Index>(hidden_[l]);
    const auto in = acts[l].cols();
    Matrix dzl = da.cwiseProduct((pre[l].array() > 0.0).cast<double>().matrix());
    MutMap(grad.data() + offsets[l], hs, in) = dzl.transpose() * acts[l];
    MutVecMap(grad.data() + offsets[l] + static_cast<std::size_t>(hs * in), hs) =
        dzl.colwise().sum();
    if (l > 0) {
      ConstMap w(params_.data() + offsets[l], hs, in);
      da = dzl * w;
    }
  }
  return loss;
}

nlohmann::json MlpNetwork::Architecture() const {
  return {{"type", "mlp"}, {"input_dim", input_dim_}, {"hidden", hidden_}};
}

std::unique_ptr<Network> MlpNetwork::Clone() const {
  return std::make_unique<MlpNetwork>(*this);
}

// ---------------------------------------------------------------------------
// LSTM (gate order: input, forget, cell, output)

struct LstmNetwork::Cache {
  std::vector<Matrix> gi, gf, gg, go;  // activated gates per step
  std::vector<Matrix> c, tanh_c, h;    // per step; h[t] is output of step t
  std::vector<Matrix> u;               // attention projections
  Matrix alpha;                        // n x window
  Matrix feat;                         // pooled representation
  Eigen::VectorXd z;
};

LstmNetwork::LstmNetwork(std::size_t window, std::size_t row_width, int hidden,
                         int attention_dim, Rng* init)
    : window_(window), row_width_(row_width), hidden_(hidden), attention_dim_(attention_dim) {
  if (window_ == 0 || row_width_ == 0) {
    Fail(ErrorKind::kConfig, "lstm: window and row width must be positive");
  }
  if (hidden_ < 1 || attention_dim_ < 0) {
    Fail(ErrorKind::kConfig, "lstm: hidden size must be positive");
  }
  const auto h = static_cast<std::size_t>(hidden_);
  const auto a = static_cast<std::size_t>(attention_dim_);
  const std::size_t d = row_width_;
  std::size_t total = 4 * h * d + 4 * h * h + 4 * h;
  if (a > 0) total += a * h + a + a;
  total += h + 1;
  params_.assign(total, 0.0);
  std::size_t o = 0;
  FillUniform(params_, o, 4 * h * d, d, init);
  o += 4 * h * d;
  FillUniform(params_, o, 4 * h * h, h, init);
  o += 4 * h * h + 4 * h;
  if (a > 0) {
    FillUniform(params_, o, a * h, h, init);
    o += a * h + a;
    FillUniform(params_, o, a, a, init);
    o += a;
  }
  FillUniform(params_, o, h, h, init);
}

void LstmNetwork::Run(const Matrix& x, Cache& cache) const {
  if (static_cast<std::size_t>(x.cols()) != window_ * row_width_) {
    Fail(ErrorKind::kShape, "lstm: input width mismatch");
  }
  const Eigen::Index n = x.rows();
  const auto h = static_cast<Eigen::Index>(hidden_);
  const auto a = static_cast<Eigen::Index>(attention_dim_);
  const auto d = static_cast<Eigen::Index>(row_width_);
  const auto T = static_cast<std::size_t>(window_);
  std::size_t o = 0;
  ConstMap wx(params_.data() + o, 4 * h, d);
  o += static_cast<std::size_t>(4 * h * d);
  ConstMap wh(params_.data() + o, 4 * h, h);
  o += static_cast<std::size_t>(4 * h * h);
  ConstVecMap b(params_.data() + o, 4 * h);
  o += static_cast<std::size_t>(4 * h);

  for (auto* v : {&cache.gi, &cache.gf, &cache.gg, &cache.go, &cache.c,
                  &cache.tanh_c, &cache.h, &cache.u}) {
    v->assign(T, Matrix());
  }
  Matrix h_prev = Matrix::Zero(n, h);
  Matrix c_prev = Matrix::Zero(n, h);
  for (std::size_t t = 0; t < T; ++t) {
    Matrix z = x.middleCols(static_cast<Eigen::Index>(t) * d, d) * wx.transpose();
    z.noalias() += h_prev * wh.transpose();
    z.rowwise() += b;
    auto sig = [](const auto& m) {
      return Matrix((1.0 + (-m.array()).exp()).inverse());
    };
    cache.gi[t] = sig(z.middleCols(0, h));
    cache.gf[t] = sig(z.middleCols(h, h));
    cache.gg[t] = z.middleCols(2 * h, h).array().tanh();
    cache.go[t] = sig(z.middleCols(3 * h, h));
    cache.c[t] = cache.gf[t].cwiseProduct(c_prev) + cache.gi[t].cwiseProduct(cache.gg[t]);
    cache.tanh_c[t] = cache.c[t].array().tanh();
    cache.h[t] = cache.go[t].cwiseProduct(cache.tanh_c[t]);
    h_prev = cache.h[t];
    c_prev = cache.c[t];
  }

  if (a > 0) {
    ConstMap wa(params_.data() + o, a, h);
    o += static_cast<std::size_t>(a * h);
    ConstVecMap ba(params_.data() + o, a);
    o += static_cast<std::size_t>(a);
    Eigen::Map<const Eigen::VectorXd> v(params_.data() + o, a);
    o += static_cast<std::size_t>(a);
    Matrix scores(n, static_cast<Eigen::Index>(T));
    for (std::size_t t = 0; t < T; ++t) {
      Matrix p = cache.h[t] * wa.transpose();
      p.rowwise() += ba;
      cache.u[t] = p.array().tanh();
      scores.col(static_cast<Eigen::Index>(t)) = cache.u[t] * v;
    }
    cache.alpha.resize(n, static_cast<Eigen::Index>(T));
    for (Eigen::Index i = 0; i < n; ++i) {
      const double m = scores.row(i).maxCoeff();
      auto e = (scores.row(i).array() - m).exp();
      cache.alpha.row(i) = e / e.sum();
    }
    cache.feat = Matrix::Zero(n, h);
    for (std::size_t t = 0; t < T; ++t) {
      cache.feat += cache.alpha.col(static_cast<Eigen::Index>(t)).asDiagonal() * cache.h[t];
    }
  } else {
    cache.alpha = Matrix::Constant(n, static_cast<Eigen::Index>(T), 1.0 / static_cast<double>(T));
    cache.feat = cache.h[T - 1];
  }
  Eigen::Map<const Eigen::VectorXd> wo(params_.data() + o, h);
  cache.z = cache.feat * wo;
  cache.z.array() += params_[o + static_cast<std::size_t>(h)];
}

Eigen::VectorXd LstmNetwork::Logits(const Matrix& x) const {
  Cache cache;
  Run(x, cache);
  return cache.z;
}

Matrix LstmNetwork::AttentionWeights(const Matrix& x) const {
  Cache cache;
  Run(x, cache);
  return cache.alpha;
}

double LstmNetwork::LossAndGradient(const Matrix& x, std::span<const int> y,
                                    std::span<const double> weights,
                                    std::span<double> grad) const {
  std::fill(grad.begin(), grad.end(), 0.0);
  Cache cache;
  Run(x, cache);
  const Eigen::Index n = x.rows();
  const auto h = static_cast<Eigen::Index>(hidden_);
  const auto a = static_cast<Eigen::Index>(attention_dim_);
  const auto d = static_cast<Eigen::Index>(row_width_);
  const auto T = static_cast<std::size_t>(window_);

  const std::size_t o_wx = 0;
  const std::size_t o_wh = o_wx + static_cast<std::size_t>(4 * h * d);
  const std::size_t o_b = o_wh + static_cast<std::size_t>(4 * h * h);
  std::size_t o = o_b + static_cast<std::size_t>(4 * h);
  const std::size_t o_wa = o;
  const std::size_t o_ba = o_wa + static_cast<std::size_t>(a * h);
  const std::size_t o_v = o_ba + static_cast<std::size_t>(a);
  if (a > 0) o = o_v + static_cast<std::size_t>(a);
  const std::size_t o_wo = o;
  const std::size_t o_bo = o_wo + static_cast<std::size_t>(h);

  Eigen::VectorXd dz;
  const double loss = OutputError(cache.z, y, weights, dz);
  Eigen::Map<const Eigen::VectorXd> wo(params_.data() + o_wo, h);
  Eigen::Map<Eigen::VectorXd>(grad.data() + o_wo, h) = cache.feat.transpose() * dz;
  grad[o_bo] = dz.sum();
  const Matrix dfeat = dz * wo.transpose();

  // Gradient flowing into each hidden state from the output side.
  std::vector<Matrix> dh_ext(T, Matrix::Zero(n, h));
  if (a > 0) {
    ConstMap wa(params_.data() + o_wa, a, h);
    Eigen::Map<const Eigen::VectorXd> v(params_.data() + o_v, a);
    MutMap dwa(grad.data() + o_wa, a, h);
    MutVecMap dba(grad.data() + o_ba, a);
    Eigen::Map<Eigen::VectorXd> dv(grad.data() + o_v, a);
    Matrix dalpha(n, static_cast<Eigen::Index>(T));
    for (std::size_t t = 0; t < T; ++t) {
      const auto tt = static_cast<Eigen::Index>(t);
      dalpha.col(tt) = dfeat.cwiseProduct(cache.h[t]).rowwise().sum();
      dh_ext[t] = cache.alpha.col(tt).asDiagonal() * dfeat;
    }
    const Eigen::VectorXd weighted =
        cache.alpha.cwiseProduct(dalpha).rowwise().sum();
    for (std::size_t t = 0; t < T; ++t) {
      const auto tt = static_cast<Eigen::Index>(t);
      const Eigen::VectorXd de =
          cache.alpha.col(tt).cwiseProduct(dalpha.col(tt) - weighted);
      dv += cache.u[t].transpose() * de;
      const Matrix dpre =
          (de * v.transpose()).cwiseProduct(
              (1.0 - cache.u[t].array().square()).matrix());
      dwa += dpre.transpose() * cache.h[t];
      dba += dpre.colwise().sum();
      dh_ext[t] += dpre * wa;
    }
  } else {
    dh_ext[T - 1] = dfeat;
  }

  ConstMap wh(params_.data() + o_wh, 4 * h, h);
  MutMap dwx(grad.data() + o_wx, 4 * h, d);
  MutMap dwh(grad.data() + o_wh, 4 * h, h);
  MutVecMap db(grad.data() + o_b, 4 * h);
  Matrix dh_next = Matrix::Zero(n, h);
  Matrix dc_next = Matrix::Zero(n, h);
  Matrix dgates(n, 4 * h);
  const Matrix zeros = Matrix::Zero(n, h);
  for (std::size_t t = T; t-- > 0;) {
    const Matrix dh = dh_ext[t] + dh_next;
    const Matrix& c_prev = t > 0 ? cache.c[t - 1] : zeros;
    const Matrix& h_prev = t > 0 ? cache.h[t - 1] : zeros;
    const Matrix dc =
        dc_next + dh.cwiseProduct(cache.go[t])
                      .cwiseProduct((1.0 - cache.tanh_c[t].array().square()).matrix());
    const auto& gi = cache.gi[t];
    const auto& gf = cache.gf[t];
    const auto& gg = cache.gg[t];
    const auto& go = cache.go[t];
    dgates.middleCols(0, h) =
        (dc.array() * gg.array() * gi.array() * (1.0 - gi.array())).matrix();
    dgates.middleCols(h, h) =
        (dc.array() * c_prev.array() * gf.array() * (1.0 - gf.array())).matrix();
    dgates.middleCols(2 * h, h) =
        (dc.array() * gi.array() * (1.0 - gg.array().square())).matrix();
    dgates.middleCols(3 * h, h) =
        (dh.array() * cache.tanh_c[t].array() * go.array() * (1.0 - go.array())).matrix();
    dwx.noalias() += dgates.transpose() * x.middleCols(static_cast<Eigen::Index>(t) * d, d);
    dwh.noalias() += dgates.transpose() * h_prev;
    db += dgates.colwise().sum();
    dh_next = dgates * wh;
    dc_next = dc.cwiseProduct(gf);
  }
  return loss;
}

nlohmann::json LstmNetwork::Architecture() const {
  return {{"type", attention_dim_ > 0 ? "attn_lstm" : "lstm"},
          {"window", window_},
          {"row_width", row_width_},
          {"hidden", hidden_},
          {"attention_dim", attention_dim_}};
}

std::unique_ptr<Network> LstmNetwork::Clone() const {
  return std::make_unique<LstmNetwork>(*this);
}

// ---------------------------------------------------------------------------

std::unique_ptr<Network> MakeNetwork(ModelKind kind, const NeuralParams& params,
                                     std::size_t window, std::size_t row_width,
                                     Rng* init) {
  switch (kind) {
    case ModelKind::kMlp:
      return std::make_unique<MlpNetwork>(window * row_width, params.mlp_hidden, init);
    case ModelKind::kLstm:
      return std::make_unique<LstmNetwork>(window, row_width, params.lstm_hidden, 0, init);
    case ModelKind::kAttnLstm:
      if (params.attention_dim < 1) {
        Fail(ErrorKind::kConfig, "attn_lstm: attention_dim must be positive");
      }
      return std::make_unique<LstmNetwork>(window, row_width, params.lstm_hidden,
                                           params.attention_dim, init);
    default:
      Fail(ErrorKind::kInternal, "MakeNetwork: not a neural model kind");
  }
}

void NeuralClassifier::PredictProba(const Matrix& x, std::span<double> out) const {
  network_->Forward(x, out);
}

nlohmann::json NeuralClassifier::SaveParameters() const {
  return {{"architecture", network_->Architecture()},
          {"values", network_->parameters()}};
}

std::shared_ptr<NeuralClassifier> NeuralClassifier::FromJson(ModelKind kind,
                                                             const nlohmann::json& j) {
  const auto& arch = j.at("architecture");
  NeuralParams p;
  std::unique_ptr<Network> net;
  if (kind == ModelKind::kMlp) {
    p.mlp_hidden = arch.at("hidden").get<std::vector<int>>();
    net = MakeNetwork(kind, p, 1, arch.at("input_dim").get<std::size_t>(), nullptr);
  } else {
    p.lstm_hidden = arch.at("hidden").get<int>();
    p.attention_dim = arch.at("attention_dim").get<int>();
    net = MakeNetwork(kind, p, arch.at("window").get<std::size_t>(),
                      arch.at("row_width").get<std::size_t>(), nullptr);
  }
  auto values = j.at("values").get<std::vector<double>>();
  if (values.size() != net->parameters().size()) {
    Fail(ErrorKind::kConfig, "model file: parameter count mismatch");
  }
  net->parameters() = std::move(values);
  return std::make_shared<NeuralClassifier>(kind, std::move(net));
}

std::shared_ptr<NeuralClassifier> FitNeural(const TrainConfig& config,
                                            const TrainingData& data,
                                            double pos_weight) {
  const auto& np = config.neural;
  Rng init(DeriveSeed(config.seed, "init"));
  auto net = MakeNetwork(config.kind, np, data.window, data.row_width, &init);
  const auto n = static_cast<std::size_t>(data.x.rows());
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = data.y[i] != 0 ? pos_weight : 1.0;

  Rng order(DeriveSeed(config.seed, "order"));
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<double> grad(net->parameters().size());
  const auto batch = static_cast<std::size_t>(np.batch_size);
  Matrix bx;
  std::vector<int> by;
  std::vector<double> bw;
  for (int epoch = 0; epoch < np.epochs; ++epoch) {
    order.Shuffle(idx.begin(), idx.end());
    std::size_t batch_no = 0;
    for (std::size_t start = 0; start < n; start += batch, ++batch_no) {
      const std::size_t len = std::min(batch, n - start);
      bx.resize(static_cast<Eigen::Index>(len), data.x.cols());
      by.resize(len);
      bw.resize(len);
      for (std::size_t k = 0; k < len; ++k) {
        const std::size_t r = idx[start + k];
        bx.row(static_cast<Eigen::Index>(k)) = data.x.row(static_cast<Eigen::Index>(r));
        by[k] = data.y[r];
        bw[k] = w[r];
      }
      const double loss = net->LossAndGradient(bx, by, bw, grad);
      if (!std::isfinite(loss)) {
        Fail(ErrorKind::kTraining, "NaN loss at epoch " + std::to_string(epoch) +
                                       " batch " + std::to_string(batch_no));
      }
      auto& params = net->parameters();
      for (std::size_t i = 0; i < params.size(); ++i) {
        params[i] -= np.learning_rate * grad[i];
      }
    }
  }
  return std::make_shared<NeuralClassifier>(config.kind, std::move(net));
}

}  // namespace hedgepred
