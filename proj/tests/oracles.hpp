// Copyright 2026 The panofuse Authors
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

// Brute-force reference implementations. They share no code with the
// library beyond plain data types.

#ifndef PANOFUSE_TESTS_ORACLES_HPP_
#define PANOFUSE_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <utility>
#include <vector>

#include "panofuse/geometry.hpp"
#include "panofuse/metrics.hpp"
#include "panofuse/query_gen.hpp"
#include "panofuse/token_fusion.hpp"

namespace oracle
{
using namespace panofuse;

// ---- panoptic quality -----------------------------------------------------

struct ClassTally
{
  std::size_t tp = 0, fp = 0, fn = 0;
  double iou_sum = 0.0;
  double sq = 0.0, rq = 0.0, pq = 0.0;
};

struct PqResult
{
  std::map<std::uint16_t, ClassTally> classes;
  double pq = 0.0, sq = 0.0, rq = 0.0;
};

// All-pairs IoU over explicit point-index sets.
inline PqResult panoptic(const SegLabeling & pred, const SegLabeling & gt, const ClassTable & table)
{
  using Key = std::pair<std::uint16_t, std::uint16_t>;
  std::map<Key, std::set<std::size_t>> pseg;
  std::map<Key, std::set<std::size_t>> gseg;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const auto gk = table.kind(gt.semantic[i]);
    if (gk == ClassKind::kIgnore) {
      continue;
    }
    gseg[{gt.semantic[i], gk == ClassKind::kStuff ? std::uint16_t{0} : gt.instance[i]}].insert(i);
    const auto pk = table.kind(pred.semantic[i]);
    if (pk != ClassKind::kIgnore) {
      pseg[{pred.semantic[i], pk == ClassKind::kStuff ? std::uint16_t{0} : pred.instance[i]}]
        .insert(i);
    }
  }
  PqResult r;
  std::set<Key> pmatched;
  std::set<Key> gmatched;
  // Outer loop over gt keys in ascending order fixes the IoU summation order.
  for (const auto & [gk, gs] : gseg) {
    for (const auto & [pk, ps] : pseg) {
      if (pk.first != gk.first) {
        continue;
      }
      std::size_t inter = 0;
      for (auto i : ps) {
        inter += gs.count(i);
      }
      const std::size_t uni = ps.size() + gs.size() - inter;
      const double iou = static_cast<double>(inter) / static_cast<double>(uni);
      if (iou > 0.5) {
        auto & t = r.classes[gk.first];
        ++t.tp;
        t.iou_sum += iou;
        pmatched.insert(pk);
        gmatched.insert(gk);
      }
    }
  }
  for (const auto & [gk, gs] : gseg) {
    if (!gmatched.count(gk)) {
      ++r.classes[gk.first].fn;
    }
  }
  for (const auto & [pk, ps] : pseg) {
    if (!pmatched.count(pk)) {
      ++r.classes[pk.first].fp;
    }
  }
  double spq = 0, ssq = 0, srq = 0;
  for (auto & [c, t] : r.classes) {
    t.sq = t.tp ? t.iou_sum / static_cast<double>(t.tp) : 0.0;
    t.rq = static_cast<double>(t.tp) / (static_cast<double>(t.tp) + 0.5 * static_cast<double>(t.fp) +
                                        0.5 * static_cast<double>(t.fn));
    t.pq = t.sq * t.rq;
    spq += t.pq;
    ssq += t.sq;
    srq += t.rq;
  }
  const double n = static_cast<double>(r.classes.size());
  if (n > 0) {
    r.pq = spq / n;
    r.sq = ssq / n;
    r.rq = srq / n;
  }
  return r;
}

// Semantic IoU from a dense confusion matrix.
inline std::map<std::uint16_t, double> class_iou(const SegLabeling & pred, const SegLabeling & gt,
                                                 const ClassTable & table)
{
  std::uint16_t max_id = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    max_id = std::max({max_id, gt.semantic[i], pred.semantic[i]});
  }
  const std::size_t n = max_id + 1u;
  std::vector<std::vector<std::uint64_t>> conf(n, std::vector<std::uint64_t>(n, 0));
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (table.kind(gt.semantic[i]) != ClassKind::kIgnore) {
      ++conf[gt.semantic[i]][pred.semantic[i]];
    }
  }
  std::map<std::uint16_t, double> out;
  for (std::size_t c = 0; c < n; ++c) {
    if (table.kind(static_cast<std::uint16_t>(c)) == ClassKind::kIgnore) {
      continue;
    }
    std::uint64_t tp = conf[c][c], fp = 0, fn = 0;
    for (std::size_t k = 0; k < n; ++k) {
      if (k != c) {
        fn += conf[c][k];
        fp += conf[k][c];
      }
    }
    if (tp + fp + fn > 0) {
      out[static_cast<std::uint16_t>(c)] =
        static_cast<double>(tp) / static_cast<double>(tp + fp + fn);
    }
  }
  return out;
}

// ---- NMS ------------------------------------------------------------------

// Repeatedly extracts the best remaining cell (highest value, then lowest
// (r, theta)) and keeps it if no kept cell lies within the radius.
inline std::vector<BevPeak> nms(const BevHeatmap & h, double thresh, double radius,
                                std::size_t max_peaks)
{
  std::vector<bool> used(h.values.size(), false);
  std::vector<BevPeak> kept;
  while (kept.size() < max_peaks) {
    int br = -1, bt = -1;
    for (int r = 0; r < h.r_bins; ++r) {
      for (int t = 0; t < h.theta_bins; ++t) {
        const auto idx = static_cast<std::size_t>(r) * h.theta_bins + t;
        if (used[idx] || !(h.at(r, t) >= thresh)) {
          continue;
        }
        if (br < 0 || h.at(r, t) > h.at(br, bt)) {
          br = r;
          bt = t;
        }
      }
    }
    if (br < 0) {
      break;
    }
    used[static_cast<std::size_t>(br) * h.theta_bins + bt] = true;
    bool ok = true;
    for (const auto & k : kept) {
      const double dr = br - k.r;
      const double dt_raw = std::abs(bt - k.theta);
      const double dt = std::min(dt_raw, h.theta_bins - dt_raw);
      if (std::sqrt(dr * dr + dt * dt) <= radius) {
        ok = false;
      }
    }
    if (ok) {
      kept.push_back({br, bt, h.at(br, bt)});
    }
  }
  return kept;
}

// ---- DBSCAN ---------------------------------------------------------------

// Core points joined by union-find over all core-core pairs within eps;
// clusters numbered by smallest core index; a border point joins the
// adjacent cluster with the smallest number.
inline std::vector<int> dbscan(const std::vector<Point3> & pts, double eps, std::size_t min_pts)
{
  const std::size_t n = pts.size();
  auto near = [&](std::size_t i, std::size_t j) {
    const double dx = pts[i].x - pts[j].x, dy = pts[i].y - pts[j].y, dz = pts[i].z - pts[j].z;
    return dx * dx + dy * dy + dz * dz <= eps * eps;
  };
  std::vector<bool> core(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t cnt = 0;
    for (std::size_t j = 0; j < n; ++j) {
      cnt += near(i, j) ? 1 : 0;
    }
    core[i] = cnt >= min_pts;
  }
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      x = parent[x] = parent[parent[x]];
    }
    return x;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (core[i] && core[j] && near(i, j)) {
        const auto a = find(i), b = find(j);
        parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }
  std::map<std::size_t, int> number;  // root -> cluster id, by smallest core index
  std::vector<int> label(n, kNoise);
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) {
      const auto root = find(i);
      if (!number.count(root)) {
        const int id = static_cast<int>(number.size());
        number[root] = id;
      }
      label[i] = number[root];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) {
      continue;
    }
    int best = kNoise;
    for (std::size_t j = 0; j < n; ++j) {
      if (core[j] && near(i, j) && (best == kNoise || label[j] < best)) {
        best = label[j];
      }
    }
    label[i] = best;
  }
  return label;
}

// Renumbers cluster ids by first appearance so that partitions compare
// independently of labelling.
inline std::vector<int> canonical(const std::vector<int> & labels)
{
  std::map<int, int> remap;
  std::vector<int> out;
  for (int l : labels) {
    if (l == kNoise) {
      out.push_back(kNoise);
      continue;
    }
    if (!remap.count(l)) {
      const int id = static_cast<int>(remap.size());
      remap[l] = id;
    }
    out.push_back(remap[l]);
  }
  return out;
}

// ---- projection and aggregation -------------------------------------------

// Pinhole projection written out by components.
inline bool project(const Point3 & p, const CameraModel & cam, double & u, double & v)
{
  const auto & t = cam.extrinsic;
  const auto & k = cam.intrinsic;
  double c[3];
  for (int i = 0; i < 3; ++i) {
    c[i] = t(i, 0) * p.x + t(i, 1) * p.y + t(i, 2) * p.z + t(i, 3);
  }
  if (!(c[2] > 0.0)) {
    return false;
  }
  double h[3];
  for (int i = 0; i < 3; ++i) {
    h[i] = k(i, 0) * c[0] + k(i, 1) * c[1] + k(i, 2) * c[2];
  }
  u = h[0] / h[2];
  v = h[1] / h[2];
  return u >= 0.0 && v >= 0.0 && u < cam.width && v < cam.height;
}

// Mean nearest-cell feature over all points with a valid projection;
// returns the number of contributing points.
inline std::size_t mean_feature(const std::vector<Point3> & pts, const FeatureMap & f,
                                const CameraModel & cam, std::vector<double> & mean)
{
  mean.assign(static_cast<std::size_t>(f.dim), 0.0);
  std::size_t n = 0;
  for (const auto & p : pts) {
    double u = 0, v = 0;
    if (!project(p, cam, u, v)) {
      continue;
    }
    const long col = static_cast<long>(std::floor(u * f.scale));
    const long row = static_cast<long>(std::floor(v * f.scale));
    if (col < 0 || row < 0 || col >= f.width || row >= f.height) {
      continue;
    }
    for (int d = 0; d < f.dim; ++d) {
      mean[static_cast<std::size_t>(d)] +=
        f.data[(static_cast<std::size_t>(row) * f.width + static_cast<std::size_t>(col)) * f.dim +
               static_cast<std::size_t>(d)];
    }
    ++n;
  }
  if (n > 0) {
    for (auto & m : mean) {
      m /= static_cast<double>(n);
    }
  }
  return n;
}

// ---- angles ---------------------------------------------------------------

inline double azimuth(double x, double y)
{
  if (x == 0.0 && y == 0.0) {
    return 0.0;
  }
  double a = std::atan2(y, x);
  if (a < 0.0) {
    a += 2.0 * M_PI;
  }
  return a >= 2.0 * M_PI ? 0.0 : a;
}

}  // namespace oracle

#endif  // PANOFUSE_TESTS_ORACLES_HPP_
