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

#include "roadloc/box3d.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "roadloc/error.hpp"

namespace roadloc {

void validate_dimension(const Dimension3D& dim) {
  const bool ok = std::isfinite(dim.l) && std::isfinite(dim.w) && std::isfinite(dim.h) &&
                  dim.l >= 0.0 && dim.w >= 0.0 && dim.h >= 0.0;
  if (!ok) throw Error(ErrorCode::kInvalidArgument, "dimension must be finite and non-negative");
}

VertexSet gt_vertices(const Box3D& box) {
  const auto& c = box.centroid;
  const double hw = box.dim.w / 2.0, hl = box.dim.l / 2.0, hh = box.dim.h / 2.0;
  return {{
      {c.x + hw, c.y - hl, c.z - hh},
      {c.x - hw, c.y - hl, c.z - hh},
      {c.x - hw, c.y + hl, c.z - hh},
      {c.x + hw, c.y + hl, c.z - hh},
      {c.x + hw, c.y - hl, c.z + hh},
      {c.x - hw, c.y - hl, c.z + hh},
      {c.x - hw, c.y + hl, c.z + hh},
      {c.x + hw, c.y + hl, c.z + hh},
  }};
}

VertexSet proj_vertices(const WorldPoint& p2, const Dimension3D& dim) {
  const double x = p2.x, y = p2.y, z = p2.z;
  return {{
      {x + dim.w, y, z},
      {x, y, z},
      {x, y + dim.l, z},
      {x + dim.w, y + dim.l, z},
      {x + dim.w, y, z + dim.h},
      {x, y, z + dim.h},
      {x, y + dim.l, z + dim.h},
      {x + dim.w, y + dim.l, z + dim.h},
  }};
}

ImageOctet project_box(const ProjectionMatrix& proj, const VertexSet& vertices) {
  ImageOctet out;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    try {
      out[i] = world_to_image(proj, vertices[i]);
    } catch (const Error& e) {
      throw Error(e.code(), "vertex P" + std::to_string(i + 1) + ": " + e.what(), i);
    }
  }
  return out;
}

Rect2D min_external_rect(std::span<const ImagePoint> points) {
  if (points.empty()) throw Error(ErrorCode::kEmptyInput, "min_external_rect needs at least one point");
  Rect2D r{points[0].u, points[0].v, points[0].u, points[0].v};
  for (const auto& p : points.subspan(1)) {
    r.min_u = std::min(r.min_u, p.u);
    r.min_v = std::min(r.min_v, p.v);
    r.max_u = std::max(r.max_u, p.u);
    r.max_v = std::max(r.max_v, p.v);
  }
  return r;
}

namespace {

double overlap_1d(double a_lo, double a_hi, double b_lo, double b_hi) {
  return std::max(0.0, std::min(a_hi, b_hi) - std::max(a_lo, b_lo));
}

}  // namespace

double iou3d(const Box3D& a, const Box3D& b) {
  const auto& ca = a.centroid;
  const auto& cb = b.centroid;
  const double ix = overlap_1d(ca.x - a.dim.w / 2, ca.x + a.dim.w / 2, cb.x - b.dim.w / 2, cb.x + b.dim.w / 2);
  const double iy = overlap_1d(ca.y - a.dim.l / 2, ca.y + a.dim.l / 2, cb.y - b.dim.l / 2, cb.y + b.dim.l / 2);
  const double iz = overlap_1d(ca.z - a.dim.h / 2, ca.z + a.dim.h / 2, cb.z - b.dim.h / 2, cb.z + b.dim.h / 2);
  const double inter = ix * iy * iz;
  const double uni = a.dim.l * a.dim.w * a.dim.h + b.dim.l * b.dim.w * b.dim.h - inter;
  if (!(uni > 0.0)) return 0.0;
  return inter / uni;
}

double iou2d(const Rect2D& a, const Rect2D& b) {
  const double inter = overlap_1d(a.min_u, a.max_u, b.min_u, b.max_u) *
                       overlap_1d(a.min_v, a.max_v, b.min_v, b.max_v);
  const double uni = a.area() + b.area() - inter;
  if (!(uni > 0.0)) return 0.0;
  return inter / uni;
}

double ciou_loss(const Rect2D& pred, const Rect2D& gt, RectGradient* grad) {
  constexpr double kAspect = 4.0 / (std::numbers::pi * std::numbers::pi);

  const double w = pred.width(), h = pred.height();
  const double wg = gt.width(), hg = gt.height();

  // Intersection and union.
  const double iw_raw = std::min(pred.max_u, gt.max_u) - std::max(pred.min_u, gt.min_u);
  const double ih_raw = std::min(pred.max_v, gt.max_v) - std::max(pred.min_v, gt.min_v);
  const bool overlapping = iw_raw > 0.0 && ih_raw > 0.0;
  const double iw = overlapping ? iw_raw : 0.0;
  const double ih = overlapping ? ih_raw : 0.0;
  const double inter = iw * ih;
  const double uni = w * h + wg * hg - inter;
  const double iou = uni > 0.0 ? inter / uni : 0.0;

  // Center distance over the enclosing diagonal.
  const double cw = std::max(pred.max_u, gt.max_u) - std::min(pred.min_u, gt.min_u);
  const double ch = std::max(pred.max_v, gt.max_v) - std::min(pred.min_v, gt.min_v);
  const double c2 = cw * cw + ch * ch;
  if (!(c2 > 0.0)) throw Error(ErrorCode::kDegenerateRect, "enclosing rectangle has zero diagonal");
  const double dx = (pred.min_u + pred.max_u - gt.min_u - gt.max_u) / 2.0;
  const double dy = (pred.min_v + pred.max_v - gt.min_v - gt.max_v) / 2.0;
  const double rho2 = dx * dx + dy * dy;

  // Aspect-ratio consistency.
  const double t = std::atan2(w, h);
  const double tg = std::atan2(wg, hg);
  const double v = kAspect * (tg - t) * (tg - t);
  const double denom = 1.0 - iou + v;
  const double alpha_v = denom > 0.0 ? v * v / denom : 0.0;

  const double loss = 1.0 - iou + rho2 / c2 + alpha_v;
  if (grad == nullptr) return loss;

  // Coordinates: 0 min_u, 1 min_v, 2 max_u, 3 max_v.
  std::array<double, 4> d_inter{}, d_area{}, d_rho2{}, d_c2{}, d_t{};
  if (overlapping) {
    d_inter[0] = pred.min_u > gt.min_u ? -ih : 0.0;
    d_inter[2] = pred.max_u < gt.max_u ? ih : 0.0;
    d_inter[1] = pred.min_v > gt.min_v ? -iw : 0.0;
    d_inter[3] = pred.max_v < gt.max_v ? iw : 0.0;
  }
  d_area = {-h, -w, h, w};
  d_rho2 = {dx, dy, dx, dy};
  d_c2[0] = pred.min_u < gt.min_u ? -2.0 * cw : 0.0;
  d_c2[2] = pred.max_u > gt.max_u ? 2.0 * cw : 0.0;
  d_c2[1] = pred.min_v < gt.min_v ? -2.0 * ch : 0.0;
  d_c2[3] = pred.max_v > gt.max_v ? 2.0 * ch : 0.0;
  const double r2 = w * w + h * h;
  if (r2 > 0.0) {
    const double dt_dw = h / r2, dt_dh = -w / r2;
    d_t = {-dt_dw, -dt_dh, dt_dw, dt_dh};
  }

  for (int k = 0; k < 4; ++k) {
    double d_iou = 0.0;
    if (uni > 0.0) {
      const double d_uni = d_area[k] - d_inter[k];
      d_iou = (d_inter[k] * uni - inter * d_uni) / (uni * uni);
    }
    const double d_dist = (d_rho2[k] * c2 - rho2 * d_c2[k]) / (c2 * c2);
    const double d_v = -2.0 * kAspect * (tg - t) * d_t[k];
    double d_av = 0.0;
    if (denom > 0.0) {
      d_av = (2.0 * v * d_v * denom - v * v * (d_v - d_iou)) / (denom * denom);
    }
    (*grad)[k] = -d_iou + d_dist + d_av;
  }
  return loss;
}

}  // namespace roadloc
