// Copyright 2026 The tsmi Authors
// SPDX-License-Identifier: Apache-2.0

#include "tsmi/trainer/analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <charconv>
#include <fstream>
#include <stdexcept>

#include "tsmi/autodiff/ops.hpp"
#include "tsmi/data/dataset.hpp"
#include "tsmi/reweight/weighting.hpp"

namespace tsmi::trainer {
namespace {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Matrix centered(const ad::Tensor& t, const char* which) {
  if (t.rank() != 2) throw ad::ShapeError("cka_linear", t.shape(), "expected [N, d]");
  Matrix m = Eigen::Map<const Matrix>(t.values().data(), t.dim(0), t.dim(1));
  const double scale = m.norm();
  m.rowwise() -= m.colwise().mean();
  if (!(m.norm() > 1e-12 * scale)) {
    throw std::invalid_argument(std::string("cka_linear: ") + which + " has zero variance");
  }
  return m;
}

std::string number(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return {buf, r.ptr};
}

}  // namespace

double cka_linear(const ad::Tensor& a, const ad::Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(0) != b.dim(0)) {
    throw ad::ShapeError("cka_linear", a.shape(), b.shape());
  }
  if (a.dim(0) < 2) throw std::invalid_argument("cka_linear: need at least 2 samples");
  const Matrix x = centered(a, "first input");
  const Matrix y = centered(b, "second input");
  const double cross = (y.transpose() * x).squaredNorm();
  return std::min(1.0, cross / ((x.transpose() * x).norm() * (y.transpose() * y).norm()));
}

std::vector<WeightPoint> weight_curve(const ad::ParameterSet& alpha, std::span<const double> losses) {
  if (losses.size() < 2) throw std::invalid_argument("weight_curve: need at least two grid points");
  const auto w = reweight::weighting_forward(
      alpha, ad::Tensor::constant({losses.size()}, std::vector<double>(losses.begin(), losses.end())));
  std::vector<WeightPoint> out;
  for (std::size_t i = 0; i < losses.size(); ++i) out.push_back({losses[i], w.omega_o[i], w.omega_i[i]});
  return out;
}

void write_weight_curve_csv(const std::vector<WeightPoint>& curve, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data::IoError("cannot write " + path.string());
  out << "loss,omega_o,omega_i\n";
  for (const auto& p : curve) out << number(p.loss) << ',' << number(p.omega_o) << ',' << number(p.omega_i) << '\n';
  if (!out) throw data::IoError("write failed for " + path.string());
}

double layer_cka(const ad::ParameterSet& theta, const backbone::BackboneConfig& config,
                 const data::TimeSeriesDataset& dataset, std::size_t stride, std::size_t batch_size) {
  if (stride == 0 || batch_size == 0) throw std::invalid_argument("layer_cka: stride and batch size must be positive");
  const std::size_t horizon = config.task == data::Task::kForecast ? config.horizon : 0;
  if (dataset.length() < config.input_length + horizon) throw data::DataError("layer_cka: no complete window");
  const auto starts = data::window_starts(dataset.length(), config.input_length, horizon, stride);
  ad::NoGradGuard no_grad;
  std::vector<double> first, last;
  std::size_t d_first = 0, d_last = 0;
  for (std::size_t i = 0; i < starts.size(); i += batch_size) {
    const std::size_t n = std::min(batch_size, starts.size() - i);
    const auto batch = data::make_batch(dataset, std::span(starts).subspan(i, n), config.input_length,
                                        config.horizon, config.task);
    const auto out = backbone::forward(theta, config, batch);
    d_first = out.h_first.dim(1);
    d_last = out.h_last.dim(1);
    first.insert(first.end(), out.h_first.values().begin(), out.h_first.values().end());
    last.insert(last.end(), out.h_last.values().begin(), out.h_last.values().end());
  }
  return cka_linear(ad::Tensor::constant({starts.size(), d_first}, std::move(first)),
                    ad::Tensor::constant({starts.size(), d_last}, std::move(last)));
}

}  // namespace tsmi::trainer
