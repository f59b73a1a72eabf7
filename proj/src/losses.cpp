// Copyright 2026 The roadloc Authors. All Rights Reserved.
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

#include "roadloc/losses.hpp"

#include <algorithm>
#include <cmath>

#include "roadloc/error.hpp"

namespace roadloc {

void LossWeights::validate() const {
  for (double v : {lambda_c, lambda_co, lambda_v, lambda_s, lambda_proj, lambda_iou}) {
    if (!(v >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "loss weights must be non-negative");
  }
}

namespace {

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

void require_same_shape(const Grid& a, const Grid& b, const char* what) {
  if (!a.same_shape(b)) throw Error(ErrorCode::kShapeMismatch, std::string(what) + ": shape mismatch");
}

void prepare_grad(Grid* grad, const Grid& like) {
  if (grad != nullptr) *grad = Grid(like.height(), like.width(), like.channels());
}

}  // namespace

double focal_loss(const Grid& pred, const Grid& gt, const FocalParams& params, Grid* grad) {
  require_same_shape(pred, gt, "focal_loss");
  prepare_grad(grad, pred);
  const double a = params.alpha, b = params.beta;
  const auto& p = pred.data();
  const auto& y = gt.data();

  std::size_t positives = 0;
  for (double yi : y) positives += (yi == 1.0);
  const double n = static_cast<double>(std::max<std::size_t>(positives, 1));

  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const bool clamped = !(p[i] > kProbabilityClamp && p[i] < 1.0 - kProbabilityClamp);
    const double q = std::clamp(p[i], kProbabilityClamp, 1.0 - kProbabilityClamp);
    double d = 0.0;
    if (y[i] == 1.0) {
      const double lq = std::log(q);
      sum += std::pow(1.0 - q, a) * lq;
      d = -a * std::pow(1.0 - q, a - 1.0) * lq + std::pow(1.0 - q, a) / q;
    } else {
      const double neg_w = std::pow(1.0 - y[i], b);
      const double l1q = std::log(1.0 - q);
      sum += std::pow(q, a) * neg_w * l1q;
      d = neg_w * (a * std::pow(q, a - 1.0) * l1q - std::pow(q, a) / (1.0 - q));
    }
    if (grad != nullptr) grad->data()[i] = clamped ? 0.0 : -d / n;
  }
  return -sum / n;
}

double peak_l1_loss(const Grid& pred, const Grid& gt, std::span<const PeakTarget> peaks, Grid* grad) {
  require_same_shape(pred, gt, "peak_l1_loss");
  prepare_grad(grad, pred);
  if (peaks.empty()) return 0.0;
  const double n = static_cast<double>(peaks.size());
  double sum = 0.0;
  for (const auto& pk : peaks) {
    for (int ch = 0; ch < pred.channels(); ++ch) {
      const double diff = pred.at(pk.row, pk.col, ch) - gt.at(pk.row, pk.col, ch);
      sum += std::abs(diff);
      if (grad != nullptr) grad->at(pk.row, pk.col, ch) += sign(diff) / n;
    }
  }
  return sum / n;
}

double offset_loss(const Grid& pred_mco, const Grid& gt_mco, std::span<const PeakTarget> peaks, Grid* grad) {
  return peak_l1_loss(pred_mco, gt_mco, peaks, grad);
}

double vertex_loss(const Grid& pred_mv, const Grid& gt_mv, std::span<const PeakTarget> peaks, Grid* grad) {
  return peak_l1_loss(pred_mv, gt_mv, peaks, grad);
}

double dim_loss(const Grid& pred_ms, const Grid& gt_ms, std::span<const PeakTarget> peaks, Grid* grad) {
  return peak_l1_loss(pred_ms, gt_ms, peaks, grad);
}

namespace {

// Which of (w, l, h) offsets each corner from P2, matching proj_vertices.
constexpr int kCornerW[8] = {1, 0, 0, 1, 1, 0, 0, 1};
constexpr int kCornerL[8] = {0, 0, 1, 1, 0, 0, 1, 1};
constexpr int kCornerH[8] = {0, 0, 0, 0, 1, 1, 1, 1};

}  // namespace

double reprojection_loss(const ProjectionMatrix& proj, std::span<const ReprojectionSample> samples,
                         std::vector<ReprojectionGradient>* grads) {
  if (grads != nullptr) grads->assign(samples.size(), {});
  if (samples.empty()) return 0.0;
  const double n = static_cast<double>(samples.size());
  const auto& hm = proj.m;
  double sum = 0.0;
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const auto& smp = samples[s];
    const VertexSet corners = proj_vertices(smp.anchor_p2, smp.pred_dim);
    ImageOctet projected;
    try {
      projected = project_box(proj, corners);
    } catch (const Error& e) {
      throw Error(e.code(), "object " + std::to_string(s) + ": " + e.what(), s);
    }
    for (int i = 0; i < 8; ++i) {
      const double du = projected[i].u - smp.pred_vertices[i].u;
      const double dv = projected[i].v - smp.pred_vertices[i].v;
      sum += std::abs(du) + std::abs(dv);
      if (grads == nullptr) continue;
      auto& g = (*grads)[s];
      const double su = sign(du) / n, sv = sign(dv) / n;
      g.d_vertices[2 * i] = -su;
      g.d_vertices[2 * i + 1] = -sv;
      const auto& p = corners[i];
      const double den = hm(2, 0) * p.x + hm(2, 1) * p.y + hm(2, 2) * p.z + hm(2, 3);
      const double u = projected[i].u, v = projected[i].v;
      auto du_d = [&](int j) { return (hm(0, j) - u * hm(2, j)) / den; };
      auto dv_d = [&](int j) { return (hm(1, j) - v * hm(2, j)) / den; };
      g.d_dim[0] += kCornerL[i] * (su * du_d(1) + sv * dv_d(1));
      g.d_dim[1] += kCornerW[i] * (su * du_d(0) + sv * dv_d(0));
      g.d_dim[2] += kCornerH[i] * (su * du_d(2) + sv * dv_d(2));
    }
  }
  return sum / n;
}

double reprojection_loss(const ProjectionMatrix& proj, const Grid& pred_ms, const Grid& pred_mv,
                         int stride, std::span<const PeakTarget> peaks, Grid* grad_ms, Grid* grad_mv) {
  if (pred_ms.channels() != 3 || pred_mv.channels() != 16 || pred_ms.height() != pred_mv.height() ||
      pred_ms.width() != pred_mv.width()) {
    throw Error(ErrorCode::kShapeMismatch, "reprojection_loss: shape mismatch");
  }
  prepare_grad(grad_ms, pred_ms);
  prepare_grad(grad_mv, pred_mv);
  std::vector<ReprojectionSample> samples;
  std::vector<const PeakTarget*> used;
  for (const auto& pk : peaks) {
    if (!pk.anchor_p2) continue;
    ReprojectionSample smp;
    smp.anchor_p2 = *pk.anchor_p2;
    smp.pred_dim = {pred_ms.at(pk.row, pk.col, 0), pred_ms.at(pk.row, pk.col, 1),
                    pred_ms.at(pk.row, pk.col, 2)};
    for (int k = 0; k < 8; ++k) {
      smp.pred_vertices[k] = {pred_mv.at(pk.row, pk.col, 2 * k) * stride,
                              pred_mv.at(pk.row, pk.col, 2 * k + 1) * stride};
    }
    samples.push_back(smp);
    used.push_back(&pk);
  }
  std::vector<ReprojectionGradient> grads;
  const bool want = grad_ms != nullptr || grad_mv != nullptr;
  const double loss = reprojection_loss(proj, samples, want ? &grads : nullptr);
  if (want) {
    for (std::size_t s = 0; s < used.size(); ++s) {
      const auto& pk = *used[s];
      if (grad_ms != nullptr) {
        for (int c = 0; c < 3; ++c) grad_ms->at(pk.row, pk.col, c) += grads[s].d_dim[c];
      }
      if (grad_mv != nullptr) {
        for (int c = 0; c < 16; ++c) grad_mv->at(pk.row, pk.col, c) += grads[s].d_vertices[c] * stride;
      }
    }
  }
  return loss;
}

namespace {

// Index of the vertex that defines each rect side: min_u, min_v, max_u, max_v.
std::array<int, 4> rect_support(const ImageOctet& oct) {
  std::array<int, 4> idx{0, 0, 0, 0};
  for (int i = 1; i < 8; ++i) {
    if (oct[i].u < oct[idx[0]].u) idx[0] = i;
    if (oct[i].v < oct[idx[1]].v) idx[1] = i;
    if (oct[i].u > oct[idx[2]].u) idx[2] = i;
    if (oct[i].v > oct[idx[3]].v) idx[3] = i;
  }
  return idx;
}

}  // namespace

double iou_constraint_loss(std::span<const ImageOctet> pred, std::span<const ImageOctet> gt,
                           std::vector<std::array<double, 16>>* grads) {
  if (pred.size() != gt.size()) throw Error(ErrorCode::kShapeMismatch, "iou_constraint_loss: object count mismatch");
  if (grads != nullptr) grads->assign(pred.size(), {});
  if (pred.empty()) return 0.0;
  const double n = static_cast<double>(pred.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const Rect2D pr = min_external_rect(pred[i]);
    const Rect2D gr = min_external_rect(gt[i]);
    RectGradient rg{};
    try {
      sum += ciou_loss(pr, gr, grads != nullptr ? &rg : nullptr);
    } catch (const Error& e) {
      throw Error(e.code(), "object " + std::to_string(i) + ": " + e.what(), i);
    }
    if (grads == nullptr) continue;
    const auto support = rect_support(pred[i]);
    auto& g = (*grads)[i];
    g[2 * support[0]] += rg[0] / n;
    g[2 * support[1] + 1] += rg[1] / n;
    g[2 * support[2]] += rg[2] / n;
    g[2 * support[3] + 1] += rg[3] / n;
  }
  return sum / n;
}

namespace {

ImageOctet octet_at(const Grid& mv, const PeakTarget& pk, int stride) {
  ImageOctet oct;
  for (int k = 0; k < 8; ++k) {
    oct[k] = {mv.at(pk.row, pk.col, 2 * k) * stride, mv.at(pk.row, pk.col, 2 * k + 1) * stride};
  }
  return oct;
}

}  // namespace

double iou_constraint_loss(const Grid& pred_mv, const Grid& gt_mv, int stride,
                           std::span<const PeakTarget> peaks, Grid* grad) {
  require_same_shape(pred_mv, gt_mv, "iou_constraint_loss");
  prepare_grad(grad, pred_mv);
  std::vector<ImageOctet> pred, gt;
  for (const auto& pk : peaks) {
    pred.push_back(octet_at(pred_mv, pk, stride));
    gt.push_back(octet_at(gt_mv, pk, stride));
  }
  std::vector<std::array<double, 16>> grads;
  const double loss = iou_constraint_loss(pred, gt, grad != nullptr ? &grads : nullptr);
  if (grad != nullptr) {
    for (std::size_t i = 0; i < peaks.size(); ++i) {
      for (int c = 0; c < 16; ++c) grad->at(peaks[i].row, peaks[i].col, c) += grads[i][c] * stride;
    }
  }
  return loss;
}

double total_loss(const LossComponents& c, const LossWeights& w) {
  return w.lambda_c * c.focal + w.lambda_co * c.offset + w.lambda_v * c.vertex + w.lambda_s * c.dim +
         w.lambda_proj * c.reprojection + w.lambda_iou * c.iou;
}

LossComponents evaluate_losses(const TargetMaps& pred, const TargetMaps& gt, const ProjectionMatrix& proj,
                               const FocalParams& focal) {
  pred.check_shapes();
  gt.check_shapes();
  if (!pred.mc.same_shape(gt.mc)) throw Error(ErrorCode::kShapeMismatch, "prediction and target grids differ");
  LossComponents c;
  c.focal = focal_loss(pred.mc, gt.mc, focal);
  c.offset = offset_loss(pred.mco, gt.mco, gt.peaks);
  c.vertex = vertex_loss(pred.mv, gt.mv, gt.peaks);
  c.dim = dim_loss(pred.ms, gt.ms, gt.peaks);
  c.reprojection = reprojection_loss(proj, pred.ms, pred.mv, gt.stride, gt.peaks);
  c.iou = iou_constraint_loss(pred.mv, gt.mv, gt.stride, gt.peaks);
  return c;
}

std::vector<double> finite_difference_gradient(const std::function<double(std::span<const double>)>& loss,
                                               std::span<const double> x, double epsilon) {
  if (!(epsilon > 0.0)) throw Error(ErrorCode::kInvalidArgument, "epsilon must be positive");
  std::vector<double> work(x.begin(), x.end());
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = work[i];
    work[i] = orig + epsilon;
    const double plus = loss(work);
    work[i] = orig - epsilon;
    const double minus = loss(work);
    work[i] = orig;
    grad[i] = (plus - minus) / (2.0 * epsilon);
  }
  return grad;
}

Grid finite_difference_gradient(const std::function<double(const Grid&)>& loss, const Grid& x, double epsilon) {
  Grid work = x;
  auto flat = [&](std::span<const double> v) {
    std::copy(v.begin(), v.end(), work.data().begin());
    return loss(work);
  };
  const auto g = finite_difference_gradient(flat, x.data(), epsilon);
  Grid out(x.height(), x.width(), x.channels());
  out.data() = g;
  return out;
}

}  // namespace roadloc
