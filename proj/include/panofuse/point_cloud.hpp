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

#ifndef PANOFUSE_POINT_CLOUD_HPP_
#define PANOFUSE_POINT_CLOUD_HPP_

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "panofuse/geometry.hpp"

namespace panofuse
{

/// One LiDAR return as stored on disk: float coordinates plus labels.
struct PointRecord
{
  float x{0.f};
  float y{0.f};
  float z{0.f};
  float intensity{0.f};
  std::uint16_t semantic{0};
  std::uint16_t instance{0};

  Point3 point() const { return {x, y, z, intensity}; }
  bool operator==(const PointRecord &) const = default;
};

inline PointRecord make_record(const Point3 & p, std::uint16_t semantic, std::uint16_t instance)
{
  return {static_cast<float>(p.x), static_cast<float>(p.y), static_cast<float>(p.z),
          static_cast<float>(p.intensity), semantic, instance};
}

struct PointCloud
{
  std::vector<PointRecord> points;
  // False for clouds whose label fields carry no ground truth.
  bool has_labels{true};

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool operator==(const PointCloud &) const = default;

  std::vector<Point3> positions() const
  {
    std::vector<Point3> out;
    out.reserve(points.size());
    for (const auto & r : points) {
      out.push_back(r.point());
    }
    return out;
  }

  std::uint16_t max_instance() const
  {
    std::uint16_t m = 0;
    for (const auto & r : points) {
      m = std::max(m, r.instance);
    }
    return m;
  }

  /// Sorted distinct non-zero instance ids.
  std::vector<std::uint16_t> instance_ids() const
  {
    std::vector<std::uint16_t> ids;
    for (const auto & r : points) {
      if (r.instance != 0) {
        ids.push_back(r.instance);
      }
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
  }
};

}  // namespace panofuse

#endif  // PANOFUSE_POINT_CLOUD_HPP_
