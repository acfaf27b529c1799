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

#ifndef PANOFUSE_METRICS_HPP_
#define PANOFUSE_METRICS_HPP_

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "panofuse/error.hpp"
#include "panofuse/point_cloud.hpp"

namespace panofuse
{

enum class ClassKind { kThing, kStuff, kIgnore };

inline const char * class_kind_name(ClassKind k)
{
  switch (k) {
    case ClassKind::kThing: return "thing";
    case ClassKind::kStuff: return "stuff";
    case ClassKind::kIgnore: return "ignore";
  }
  return "ignore";
}

struct ClassInfo
{
  std::uint16_t id{0};
  std::string name;
  ClassKind kind{ClassKind::kIgnore};
};

/// Semantic class table. Ids missing from the table are treated as ignore.
struct ClassTable
{
  std::vector<ClassInfo> classes;

  ClassKind kind(std::uint16_t id) const
  {
    for (const auto & c : classes) {
      if (c.id == id) {
        return c.kind;
      }
    }
    return ClassKind::kIgnore;
  }

  std::string name(std::uint16_t id) const
  {
    for (const auto & c : classes) {
      if (c.id == id) {
        return c.name;
      }
    }
    return "class_" + std::to_string(id);
  }

  std::size_t count(ClassKind k) const
  {
    return static_cast<std::size_t>(
      std::count_if(classes.begin(), classes.end(), [k](const ClassInfo & c) { return c.kind == k; }));
  }

  static ClassTable nuscenes()
  {
    using K = ClassKind;
    return {{{0, "noise", K::kIgnore},
             {1, "barrier", K::kThing},
             {2, "bicycle", K::kThing},
             {3, "bus", K::kThing},
             {4, "car", K::kThing},
             {5, "construction_vehicle", K::kThing},
             {6, "motorcycle", K::kThing},
             {7, "pedestrian", K::kThing},
             {8, "traffic_cone", K::kThing},
             {9, "trailer", K::kThing},
             {10, "truck", K::kThing},
             {11, "driveable_surface", K::kStuff},
             {12, "other_flat", K::kStuff},
             {13, "sidewalk", K::kStuff},
             {14, "terrain", K::kStuff},
             {15, "manmade", K::kStuff},
             {16, "vegetation", K::kStuff}}};
  }

  static ClassTable semantic_kitti()
  {
    using K = ClassKind;
    return {{{0, "unlabeled", K::kIgnore},
             {1, "car", K::kThing},
             {2, "bicycle", K::kThing},
             {3, "motorcycle", K::kThing},
             {4, "truck", K::kThing},
             {5, "other-vehicle", K::kThing},
             {6, "person", K::kThing},
             {7, "bicyclist", K::kThing},
             {8, "motorcyclist", K::kThing},
             {9, "road", K::kStuff},
             {10, "parking", K::kStuff},
             {11, "sidewalk", K::kStuff},
             {12, "other-ground", K::kStuff},
             {13, "building", K::kStuff},
             {14, "fence", K::kStuff},
             {15, "vegetation", K::kStuff},
             {16, "trunk", K::kStuff},
             {17, "terrain", K::kStuff},
             {18, "pole", K::kStuff},
             {19, "traffic-sign", K::kStuff}}};
  }
};

struct SegLabeling
{
  std::vector<std::uint16_t> semantic;
  std::vector<std::uint16_t> instance;

  std::size_t size() const { return semantic.size(); }

  static SegLabeling from_cloud(const PointCloud & cloud)
  {
    SegLabeling l;
    l.semantic.reserve(cloud.size());
    l.instance.reserve(cloud.size());
    for (const auto & r : cloud.points) {
      l.semantic.push_back(r.semantic);
      l.instance.push_back(r.instance);
    }
    return l;
  }
};

struct SegmentKey
{
  std::uint16_t semantic{0};
  std::uint16_t instance{0};
  auto operator<=>(const SegmentKey &) const = default;
};

struct SegmentMatch
{
  SegmentKey pred;
  SegmentKey gt;
  std::uint64_t intersection{0};
  std::uint64_t uni{0};
  double iou{0.0};
};

struct ClassMatches
{
  std::vector<SegmentMatch> tp;  // ascending gt key
  std::vector<SegmentKey> fp;
  std::vector<SegmentKey> fn;
};

struct MatchOptions
{
  // Segments with fewer points are neither counted as FP nor FN; 0 disables.
  std::size_t min_segment_points{0};
};

using MatchResult = std::map<std::uint16_t, ClassMatches>;

namespace detail
{
inline void check_lengths(const SegLabeling & a, const SegLabeling & b)
{
  if (a.semantic.size() != b.semantic.size() || a.instance.size() != a.semantic.size() ||
      b.instance.size() != b.semantic.size()) {
    throw Error(Errc::kLengthMismatch, "prediction and ground truth differ in length");
  }
}
}  // namespace detail

/// Segments are maximal point sets sharing (semantic, instance); stuff classes
/// form one segment per class regardless of instance id. Points whose ground
/// truth is an ignore class are removed first; predicted ignore points join no
/// segment. A pred/gt pair of one class matches iff IoU > 0.5, which makes the
/// matching unique.
inline MatchResult match_segments(const SegLabeling & pred, const SegLabeling & gt,
                                  const ClassTable & table, const MatchOptions & opt = {})
{
  detail::check_lengths(pred, gt);
  std::map<SegmentKey, std::uint64_t> pred_size;
  std::map<SegmentKey, std::uint64_t> gt_size;
  std::map<std::pair<SegmentKey, SegmentKey>, std::uint64_t> overlap;
  auto key_of = [&table](std::uint16_t sem, std::uint16_t inst) {
    return SegmentKey{sem, table.kind(sem) == ClassKind::kStuff ? std::uint16_t{0} : inst};
  };
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (table.kind(gt.semantic[i]) == ClassKind::kIgnore) {
      continue;
    }
    const SegmentKey g = key_of(gt.semantic[i], gt.instance[i]);
    ++gt_size[g];
    if (table.kind(pred.semantic[i]) == ClassKind::kIgnore) {
      continue;
    }
    const SegmentKey p = key_of(pred.semantic[i], pred.instance[i]);
    ++pred_size[p];
    if (p.semantic == g.semantic) {
      ++overlap[{p, g}];
    }
  }

  MatchResult result;
  std::set<SegmentKey> pred_hit;
  std::set<SegmentKey> gt_hit;
  for (const auto & [pair, inter] : overlap) {
    const auto & [p, g] = pair;
    const std::uint64_t uni = pred_size[p] + gt_size[g] - inter;
    // IoU > 0.5  <=>  2 * inter > uni, evaluated exactly in integers.
    if (2 * inter > uni) {
      if (!pred_hit.insert(p).second || !gt_hit.insert(g).second) {
        throw Error(Errc::kInvalidArgument, "segment matched twice; matching must be unique");
      }
      result[g.semantic].tp.push_back(
        {p, g, inter, uni, static_cast<double>(inter) / static_cast<double>(uni)});
    }
  }
  for (const auto & [g, n] : gt_size) {
    if (!gt_hit.count(g) && n >= opt.min_segment_points) {
      result[g.semantic].fn.push_back(g);
    }
  }
  for (const auto & [p, n] : pred_size) {
    if (!pred_hit.count(p) && n >= opt.min_segment_points) {
      result[p.semantic].fp.push_back(p);
    }
  }
  for (auto & [cls, m] : result) {
    std::sort(m.tp.begin(), m.tp.end(),
              [](const SegmentMatch & a, const SegmentMatch & b) { return a.gt < b.gt; });
  }
  return result;
}

struct IouReport
{
  std::map<std::uint16_t, double> per_class;
  double mean{0.0};
};

/// Semantic IoU per non-ignore class over points with non-ignore ground
/// truth; the mean runs over classes present in either labeling.
inline IouReport miou(const SegLabeling & pred, const SegLabeling & gt, const ClassTable & table)
{
  detail::check_lengths(pred, gt);
  std::map<std::uint16_t, std::array<std::uint64_t, 3>> tally;  // tp, fp, fn
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const auto g = gt.semantic[i];
    if (table.kind(g) == ClassKind::kIgnore) {
      continue;
    }
    const auto p = pred.semantic[i];
    const bool pred_valid = table.kind(p) != ClassKind::kIgnore;
    if (p == g) {
      ++tally[g][0];
    } else {
      ++tally[g][2];
      if (pred_valid) {
        ++tally[p][1];
      }
    }
  }
  IouReport r;
  double sum = 0.0;
  for (const auto & [cls, t] : tally) {
    const double iou =
      static_cast<double>(t[0]) / static_cast<double>(t[0] + t[1] + t[2]);
    r.per_class[cls] = iou;
    sum += iou;
  }
  r.mean = r.per_class.empty() ? 0.0 : sum / static_cast<double>(r.per_class.size());
  return r;
}

struct ClassReport
{
  std::uint16_t id{0};
  std::string name;
  ClassKind kind{ClassKind::kThing};
  std::size_t tp{0};
  std::size_t fp{0};
  std::size_t fn{0};
  double iou_sum{0.0};
  double sq{0.0};
  double rq{0.0};
  double pq{0.0};
  double iou{0.0};  // semantic IoU
};

struct PanopticReport
{
  std::vector<ClassReport> classes;  // participating classes, ascending id
  double pq{0.0};
  double pq_dagger{0.0};
  double rq{0.0};
  double sq{0.0};
  double pq_th{0.0};
  double rq_th{0.0};
  double sq_th{0.0};
  double pq_st{0.0};
  double rq_st{0.0};
  double sq_st{0.0};
  double miou{0.0};
};

/// Per-class SQ = sum(TP IoU)/|TP|, RQ = |TP|/(|TP| + |FP|/2 + |FN|/2),
/// PQ = SQ * RQ. Aggregates are unweighted means over classes with any TP,
/// FP or FN. PQ-dagger uses semantic IoU in place of PQ for stuff classes.
inline PanopticReport panoptic_quality(const MatchResult & matches, const ClassTable & table,
                                       const IouReport & ious)
{
  PanopticReport rep;
  struct Acc
  {
    double pq = 0, rq = 0, sq = 0;
    std::size_t n = 0;
    void add(const ClassReport & c)
    {
      pq += c.pq;
      rq += c.rq;
      sq += c.sq;
      ++n;
    }
  } all, th, st;
  double dagger = 0.0;
  for (const auto & [cls, m] : matches) {
    ClassReport c;
    c.id = cls;
    c.name = table.name(cls);
    c.kind = table.kind(cls);
    c.tp = m.tp.size();
    c.fp = m.fp.size();
    c.fn = m.fn.size();
    if (c.tp + c.fp + c.fn == 0) {
      continue;
    }
    for (const auto & t : m.tp) {
      c.iou_sum += t.iou;
    }
    c.sq = c.tp > 0 ? c.iou_sum / static_cast<double>(c.tp) : 0.0;
    c.rq = static_cast<double>(c.tp) /
           (static_cast<double>(c.tp) + 0.5 * static_cast<double>(c.fp) +
            0.5 * static_cast<double>(c.fn));
    c.pq = c.sq * c.rq;
    auto it = ious.per_class.find(cls);
    c.iou = it != ious.per_class.end() ? it->second : 0.0;
    all.add(c);
    if (c.kind == ClassKind::kStuff) {
      st.add(c);
      dagger += c.iou;
    } else {
      th.add(c);
      dagger += c.pq;
    }
    rep.classes.push_back(c);
  }
  auto mean = [](double s, std::size_t n) { return n ? s / static_cast<double>(n) : 0.0; };
  rep.pq = mean(all.pq, all.n);
  rep.rq = mean(all.rq, all.n);
  rep.sq = mean(all.sq, all.n);
  rep.pq_th = mean(th.pq, th.n);
  rep.rq_th = mean(th.rq, th.n);
  rep.sq_th = mean(th.sq, th.n);
  rep.pq_st = mean(st.pq, st.n);
  rep.rq_st = mean(st.rq, st.n);
  rep.sq_st = mean(st.sq, st.n);
  rep.pq_dagger = mean(dagger, all.n);
  rep.miou = ious.mean;
  return rep;
}

inline PanopticReport evaluate_panoptic(const SegLabeling & pred, const SegLabeling & gt,
                                        const ClassTable & table, const MatchOptions & opt = {})
{
  return panoptic_quality(match_segments(pred, gt, table, opt), table, miou(pred, gt, table));
}

}  // namespace panofuse

#endif  // PANOFUSE_METRICS_HPP_
