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

#include "hedgepred/eval.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "hedgepred/error.h"
#include "hedgepred/parallel.h"
#include "hedgepred/text_io.h"

namespace hedgepred {
namespace {

double Ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double Mean(std::span<const double> v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Percentile of a sorted sample, linear interpolation between order statistics.
double Percentile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::string Hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Interval around the fold means; half-width from the bootstrap percentiles
// of metrics recomputed on resampled pooled test predictions.
void BootstrapIntervals(CVReport& report, std::span<const int> labels,
                        const PipelineConfig& config) {
  std::vector<int> pred;
  std::vector<int> truth;
  for (std::size_t f = 0; f < report.folds.size(); ++f) {
    const auto& fr = report.folds[f];
    pred.insert(pred.end(), fr.predictions.begin(), fr.predictions.end());
  }
  truth.assign(labels.begin(), labels.end());
  const std::size_t n = pred.size();
  Rng rng(DeriveSeed(config.seed, "bootstrap"));
  std::vector<double> ps, rs, fs;
  for (int b = 0; b < config.bootstrap_resamples; ++b) {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = rng.UniformIndex(n);
      const bool p = pred[j] != 0;
      const bool t = truth[j] != 0;
      tp += p && t;
      fp += p && !t;
      fn += !p && t;
      tn += !p && !t;
    }
    const Metrics m = Metrics::FromCounts(tp, fp, fn, tn);
    ps.push_back(m.precision);
    rs.push_back(m.recall);
    fs.push_back(m.f1);
  }
  auto half = [](std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    return (Percentile(v, 0.975) - Percentile(v, 0.025)) / 2.0;
  };
  report.precision.half_width = half(ps);
  report.recall.half_width = half(rs);
  report.f1.half_width = half(fs);
}

}  // namespace

Metrics Metrics::FromCounts(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
  Metrics m;
  m.tp = tp;
  m.fp = fp;
  m.fn = fn;
  m.tn = tn;
  m.precision = Ratio(tp, tp + fp);
  m.recall = Ratio(tp, tp + fn);
  m.f1 = F1Score(m.precision, m.recall);
  return m;
}

double F1Score(double precision, double recall) {
  const double s = precision + recall;
  return s > 0.0 ? 2.0 * precision * recall / s : 0.0;
}

Metrics ComputeMetrics(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) {
    Fail(ErrorKind::kShape, "predictions and labels differ in length");
  }
  if (labels.empty()) Fail(ErrorKind::kShape, "no predictions to score");
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool p = predictions[i] != 0;
    const bool t = labels[i] != 0;
    tp += p && t;
    fp += p && !t;
    fn += !p && t;
    tn += !p && !t;
  }
  return Metrics::FromCounts(tp, fp, fn, tn);
}

double StratifiedBaselineF1(double base_rate, double q) {
  // E[TP] = n*pi*q, E[pred+] = n*q, E[pos] = n*pi, so P = pi and R = q.
  return F1Score(base_rate, q);
}

std::vector<Fold> StratifiedKFold(std::span<const int> labels, int k, std::uint64_t seed) {
  if (k < 2) Fail(ErrorKind::kConfig, "folds must be at least 2");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] != 0 ? pos : neg).push_back(i);
  const auto ku = static_cast<std::size_t>(k);
  if (pos.size() < ku || neg.size() < ku) {
    Fail(ErrorKind::kConfig, "each class needs at least " + std::to_string(k) +
                                 " members for " + std::to_string(k) + "-fold cross-validation");
  }
  Rng rng(seed);
  rng.Shuffle(pos.begin(), pos.end());
  rng.Shuffle(neg.begin(), neg.end());
  std::vector<Fold> folds(ku);
  for (std::size_t i = 0; i < pos.size(); ++i) folds[i % ku].test.push_back(pos[i]);
  // Negatives continue the rotation so fold sizes also stay within one.
  for (std::size_t i = 0; i < neg.size(); ++i) {
    folds[(pos.size() + i) % ku].test.push_back(neg[i]);
  }
  for (auto& f : folds) {
    std::sort(f.test.begin(), f.test.end());
    std::vector<char> in_test(labels.size(), 0);
    for (std::size_t i : f.test) in_test[i] = 1;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (!in_test[i]) f.train.push_back(i);
    }
  }
  return folds;
}

double StudentTQuantile(double p, double dof) {
  boost::math::students_t dist(dof);
  return boost::math::quantile(dist, p);
}

Interval TInterval(std::span<const double> values) {
  Interval out;
  out.mean = Mean(values);
  if (values.size() < 2) return out;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  const double n = static_cast<double>(values.size());
  const double sd = std::sqrt(ss / (n - 1.0));
  out.half_width = StudentTQuantile(0.975, n - 1.0) * sd / std::sqrt(n);
  return out;
}

std::string_view CiMethodName(CiMethod method) {
  return method == CiMethod::kBootstrap ? "bootstrap" : "t";
}

std::optional<CiMethod> ParseCiMethod(std::string_view name) {
  if (name == "t" || name == "t-interval") return CiMethod::kTInterval;
  if (name == "bootstrap") return CiMethod::kBootstrap;
  return std::nullopt;
}

void PipelineConfig::Validate() const {
  if (window < 1) Fail(ErrorKind::kConfig, "window must be positive");
  if (folds < 2) Fail(ErrorKind::kConfig, "folds must be at least 2");
  if (jobs < 1) Fail(ErrorKind::kConfig, "jobs must be positive");
  if (ci == CiMethod::kBootstrap && bootstrap_resamples < 1) {
    Fail(ErrorKind::kConfig, "bootstrap_resamples must be positive");
  }
  if (smote) {
    if (smote_config.k_neighbors < 1) Fail(ErrorKind::kConfig, "smote.k must be positive");
    if (!(smote_config.target_ratio > 0.0 && smote_config.target_ratio <= 1.0)) {
      Fail(ErrorKind::kConfig, "smote.ratio must lie in (0,1]");
    }
  }
}

// ---------------------------------------------------------------------------

EncodedCorpus::EncodedCorpus(const TurnEncoder& encoder, const Corpus& corpus, int window)
    : schema_(encoder.schema()),
      window_(static_cast<std::size_t>(window)),
      problem_coord_(schema_.Find(FeatureGroup::kConInfo, "problem_id").offset),
      instances_(ExtractInstances(corpus, window)) {
  const std::size_t d = schema_.total_dim();
  const std::size_t n = instances_.size();
  tensors_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(window_ * d));
  problem_ids_.assign(n * window_, -1);
  labels_.resize(n);
  const auto all = FeatureMask::All();
  const ProblemRange placeholder;
  for (std::size_t i = 0; i < n; ++i) {
    const Instance& inst = instances_[i];
    const auto tensor = encoder.EncodeInstance(inst, corpus, all, placeholder);
    std::copy(tensor.values.begin(), tensor.values.end(),
              tensors_.row(static_cast<Eigen::Index>(i)).data());
    const auto turns = HistoryTurns(corpus, inst);
    for (std::size_t r = 0; r < window_; ++r) {
      if (turns[r] != nullptr) problem_ids_[i * window_ + r] = turns[r]->ctx.problem_id;
    }
    labels_[i] = inst.label ? 1 : 0;
  }
}

ProblemRange EncodedCorpus::FitRange(std::span<const std::size_t> subset) const {
  bool any = false;
  ProblemRange r;
  for (std::size_t i : subset) {
    for (std::size_t t = 0; t < window_; ++t) {
      const int id = problem_ids_[i * window_ + t];
      if (id < 0) continue;
      if (!any) {
        r.min = r.max = id;
        any = true;
      } else {
        r.min = std::min(r.min, id);
        r.max = std::max(r.max, id);
      }
    }
  }
  return r;
}

EncodedDataset EncodedCorpus::Select(std::span<const std::size_t> subset,
                                     const FeatureMask& mask,
                                     const ProblemRange& range) const {
  const auto coords = IncludedCoordinates(schema_, mask);
  const std::size_t d = schema_.total_dim();
  EncodedDataset out;
  out.window = window_;
  out.row_width = coords.size();
  out.fingerprint = InputFingerprint(schema_, mask, static_cast<int>(window_));
  out.x.resize(static_cast<Eigen::Index>(subset.size()),
               static_cast<Eigen::Index>(window_ * coords.size()));
  out.y.reserve(subset.size());
  for (std::size_t r = 0; r < subset.size(); ++r) {
    const std::size_t i = subset[r];
    const double* src = tensors_.row(static_cast<Eigen::Index>(i)).data();
    double* dst = out.x.row(static_cast<Eigen::Index>(r)).data();
    for (std::size_t t = 0; t < window_; ++t) {
      const int id = problem_ids_[i * window_ + t];
      for (std::size_t c : coords) {
        if (c == problem_coord_) {
          *dst++ = id < 0 ? 0.0 : range.Normalize(id);
        } else {
          *dst++ = src[t * d + c];
        }
      }
    }
    out.y.push_back(labels_[i]);
  }
  return out;
}

FoldData PrepareFold(const EncodedCorpus& data, const Fold& fold, std::size_t index,
                     const FeatureMask& mask) {
  FoldData fd;
  fd.index = index;
  fd.fold = fold;
  fd.range = data.FitRange(fold.train);
  fd.train = data.Select(fold.train, mask, fd.range);
  fd.test = data.Select(fold.test, mask, fd.range);
  return fd;
}

std::string HashDataset(const Matrix& x, std::span<const int> y) {
  std::uint64_t h = Fnv1a(std::string_view(reinterpret_cast<const char*>(x.data()),
                                           static_cast<std::size_t>(x.size()) * sizeof(double)));
  h = Fnv1a(std::string_view(reinterpret_cast<const char*>(y.data()), y.size() * sizeof(int)), h);
  return Hex(h);
}

PipelineFit FitWithPipeline(const EncodedDataset& train_set, const ModelSpec& spec,
                            const PipelineConfig& config, std::uint64_t index) {
  TrainConfig train = spec.train;
  train.seed = DeriveSeed(config.seed, "fit", index);
  // Class weighting works alongside SMOTE, so "auto" refers to the original
  // class balance rather than the resampled one.
  if (!train.pos_weight) train.pos_weight = ResolvePosWeight(std::nullopt, train_set.y);

  const Matrix* x = &train_set.x;
  std::span<const int> y = train_set.y;
  Resampled resampled;
  std::string smote_hash;
  if (config.smote && spec.train.kind != ModelKind::kDummy) {
    ResampleConfig rc = config.smote_config;
    rc.seed = DeriveSeed(config.seed, "smote", index);
    resampled = Smote(train_set.x, train_set.y, rc);
    smote_hash = HashDataset(resampled.x, resampled.y);
    x = &resampled.x;
    y = resampled.y;
  }
  const TrainingData td{*x, y, train_set.window, train_set.row_width, train_set.fingerprint};
  return PipelineFit{Fit(train, td), resampled.synthetic_count, std::move(smote_hash)};
}

FoldResult RunFold(const FoldData& fold, const ModelSpec& spec, const PipelineConfig& config) {
  const auto fi = static_cast<std::uint64_t>(fold.index);
  PipelineFit fit = FitWithPipeline(fold.train, spec, config, fi);
  const TrainedModel& model = fit.model;
  const TrainConfig& train = model.config();

  FoldResult result;
  result.synthetic_count = fit.synthetic_count;
  result.smote_hash = std::move(fit.smote_hash);
  result.model_hash = model.ParameterHash();

  model.CheckFingerprint(fold.test.fingerprint);
  result.proba = model.PredictProba(fold.test.x);
  result.predictions =
      model.PredictLabels(fold.test.x, train.threshold, DeriveSeed(config.seed, "labels", fi));
  result.metrics = ComputeMetrics(result.predictions, fold.test.y);
  return result;
}

std::vector<Fold> PipelineFolds(const EncodedCorpus& data, const PipelineConfig& config) {
  return StratifiedKFold(data.labels(), config.folds, DeriveSeed(config.seed, "folds"));
}

CVReport CrossValidate(const EncodedCorpus& data, const ModelSpec& spec,
                       const PipelineConfig& config) {
  config.Validate();
  spec.train.Validate();
  if (data.window() != static_cast<std::size_t>(config.window)) {
    Fail(ErrorKind::kConfig, "encoded corpus window differs from the pipeline window");
  }
  const auto folds = PipelineFolds(data, config);
  CVReport report;
  report.model_name = spec.name;
  report.kind = spec.train.kind;
  report.mask_name = spec.mask.Name();
  report.folds.resize(folds.size());
  ParallelFor(folds.size(), config.jobs, [&](std::size_t f) {
    const FoldData fd = PrepareFold(data, folds[f], f, spec.mask);
    report.folds[f] = RunFold(fd, spec, config);
  });

  std::vector<double> p, r, f1;
  for (const auto& fr : report.folds) {
    p.push_back(fr.metrics.precision);
    r.push_back(fr.metrics.recall);
    f1.push_back(fr.metrics.f1);
  }
  report.precision = TInterval(p);
  report.recall = TInterval(r);
  report.f1 = TInterval(f1);
  if (config.ci == CiMethod::kBootstrap) {
    std::vector<int> truth;
    for (const auto& fold : folds) {
      for (std::size_t i : fold.test) truth.push_back(data.labels()[i]);
    }
    BootstrapIntervals(report, truth, config);
  }
  // The headline F1 is the harmonic mean of the mean precision and recall, so
  // a table row is internally consistent; its spread comes from the folds.
  report.f1.mean = F1Score(report.precision.mean, report.recall.mean);
  return report;
}

std::string ReportCsv(std::span<const CVReport> reports) {
  std::ostringstream out;
  out << "model,kind,mask,f1,f1_ci,precision,precision_ci,recall,recall_ci\n";
  for (const auto& r : reports) {
    out << r.model_name << ',' << ModelKindName(r.kind) << ',' << r.mask_name;
    for (const Interval* iv : {&r.f1, &r.precision, &r.recall}) {
      out << ',' << FormatFixed(iv->mean, 4) << ',' << FormatFixed(iv->half_width, 4);
    }
    out << '\n';
  }
  return out.str();
}

std::string ReportText(std::span<const CVReport> reports) {
  std::size_t name_w = 5, mask_w = 4;
  for (const auto& r : reports) {
    name_w = std::max(name_w, r.model_name.size());
    mask_w = std::max(mask_w, r.mask_name.size());
  }
  auto pad = [](std::string s, std::size_t w) {
    s.resize(std::max(w, s.size()), ' ');
    return s;
  };
  auto cell = [](const Interval& iv) {
    return FormatFixed(iv.mean, 3) + " +/- " + FormatFixed(iv.half_width, 3);
  };
  std::ostringstream out;
  out << pad("Model", name_w) << "  " << pad("Mask", mask_w) << "  " << pad("F1", 15) << "  "
      << pad("Precision", 15) << "  Recall\n";
  for (const auto& r : reports) {
    out << pad(r.model_name, name_w) << "  " << pad(r.mask_name, mask_w) << "  "
        << pad(cell(r.f1), 15) << "  " << pad(cell(r.precision), 15) << "  " << cell(r.recall)
        << '\n';
  }
  return out.str();
}

}  // namespace hedgepred
