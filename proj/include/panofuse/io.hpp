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

#ifndef PANOFUSE_IO_HPP_
#define PANOFUSE_IO_HPP_

#include <array>
#include <bit>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "panofuse/cyl_grid.hpp"
#include "panofuse/error.hpp"
#include "panofuse/image.hpp"
#include "panofuse/metrics.hpp"
#include "panofuse/point_cloud.hpp"
#include "panofuse/query_gen.hpp"
#include "panofuse/token_fusion.hpp"

// Binary layouts are little-endian: a 4-byte magic followed by explicit
// shapes. Floating-point payloads are stored as IEEE-754 f32 unless noted.

namespace panofuse
{

using Bytes = std::vector<std::uint8_t>;

class ByteWriter
{
public:
  void magic(std::string_view m) { bytes_.insert(bytes_.end(), m.begin(), m.end()); }
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void i32(std::int32_t v) { put(static_cast<std::uint32_t>(v), 4); }
  void f32(float v) { put(std::bit_cast<std::uint32_t>(v), 4); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
  void raw(const std::uint8_t * p, std::size_t n) { bytes_.insert(bytes_.end(), p, p + n); }

  Bytes & bytes() { return bytes_; }

private:
  void put(std::uint64_t v, int n)
  {
    for (int i = 0; i < n; ++i) {
      bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
  }
  Bytes bytes_;
};

class ByteReader
{
public:
  explicit ByteReader(std::span<const std::uint8_t> b) : b_(b) {}

  void expect_magic(std::string_view m)
  {
    need(m.size());
    if (std::memcmp(b_.data() + pos_, m.data(), m.size()) != 0) {
      throw Error(Errc::kBadMagic, "expected magic '" + std::string(m) + "'");
    }
    pos_ += m.size();
  }
  std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  std::int32_t i32() { return static_cast<std::int32_t>(static_cast<std::uint32_t>(get(4))); }
  float f32() { return std::bit_cast<float>(static_cast<std::uint32_t>(get(4))); }
  double f64() { return std::bit_cast<double>(get(8)); }
  void raw(std::uint8_t * p, std::size_t n)
  {
    need(n);
    if (n == 0) {
      return;
    }
    std::memcpy(p, b_.data() + pos_, n);
    pos_ += n;
  }

  // Guards element counts read from a header before allocating.
  void need(std::size_t n) const
  {
    if (n > b_.size() - pos_) {
      throw Error(Errc::kTruncatedFile, "unexpected end of data");
    }
  }
  void need(std::uint64_t count, std::uint64_t elem_size) const
  {
    if (elem_size != 0 && count > (b_.size() - pos_) / elem_size) {
      throw Error(Errc::kTruncatedFile, "declared element count exceeds data size");
    }
  }
  bool done() const { return pos_ == b_.size(); }
  void expect_end() const
  {
    if (!done()) {
      throw Error(Errc::kShapeMismatch, "trailing bytes after payload");
    }
  }

private:
  std::uint64_t get(int n)
  {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      v |= static_cast<std::uint64_t>(b_[pos_ + i]) << (8 * i);
    }
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::span<const std::uint8_t> b_;
  std::size_t pos_{0};
};

// ---- files ---------------------------------------------------------------

inline Bytes read_file(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(Errc::kIoError, "cannot open " + path.string());
  }
  Bytes b((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) {
    throw Error(Errc::kIoError, "read failed for " + path.string());
  }
  return b;
}

inline void write_file(const std::filesystem::path & path, std::span<const std::uint8_t> b)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(Errc::kIoError, "cannot create " + path.string());
  }
  out.write(reinterpret_cast<const char *>(b.data()), static_cast<std::streamsize>(b.size()));
  if (!out) {
    throw Error(Errc::kIoError, "write failed for " + path.string());
  }
}

inline std::string read_text(const std::filesystem::path & path)
{
  const auto b = read_file(path);
  return {b.begin(), b.end()};
}

inline void write_text(const std::filesystem::path & path, std::string_view s)
{
  write_file(path, {reinterpret_cast<const std::uint8_t *>(s.data()), s.size()});
}

// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::span<const std::uint8_t> b)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto c : b) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v)
{
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = kDigits[v & 0xf];
    v >>= 4;
  }
  return s;
}

// ---- PLCD: point cloud with labels ----------------------------------------
// "PLCD" u32 version=1 u8 has_labels u64 n, then n x {f32 x y z intensity, u16 sem inst}.

inline Bytes encode_cloud(const PointCloud & c)
{
  ByteWriter w;
  w.magic("PLCD");
  w.u32(1);
  w.u8(c.has_labels ? 1 : 0);
  w.u64(c.points.size());
  for (const auto & r : c.points) {
    w.f32(r.x);
    w.f32(r.y);
    w.f32(r.z);
    w.f32(r.intensity);
    w.u16(r.semantic);
    w.u16(r.instance);
  }
  return std::move(w.bytes());
}

inline PointCloud read_cloud_from(ByteReader & r)
{
  r.expect_magic("PLCD");
  if (r.u32() != 1) {
    throw Error(Errc::kShapeMismatch, "unsupported PLCD version");
  }
  PointCloud c;
  c.has_labels = r.u8() != 0;
  const auto n = r.u64();
  r.need(n, 20);
  c.points.resize(n);
  for (auto & p : c.points) {
    p.x = r.f32();
    p.y = r.f32();
    p.z = r.f32();
    p.intensity = r.f32();
    p.semantic = r.u16();
    p.instance = r.u16();
  }
  return c;
}

inline PointCloud decode_cloud(std::span<const std::uint8_t> b)
{
  ByteReader r(b);
  auto c = read_cloud_from(r);
  r.expect_end();
  return c;
}

// ---- FMAP: image feature map ----------------------------------------------
// "FMAP" u32 H W D f64 scale, then H*W*D f32 (row-major, D innermost).

inline Bytes encode_feature_map(const FeatureMap & f)
{
  ByteWriter w;
  w.magic("FMAP");
  w.u32(static_cast<std::uint32_t>(f.height));
  w.u32(static_cast<std::uint32_t>(f.width));
  w.u32(static_cast<std::uint32_t>(f.dim));
  w.f64(f.scale);
  for (float x : f.data) {
    w.f32(x);
  }
  return std::move(w.bytes());
}

inline FeatureMap decode_feature_map(std::span<const std::uint8_t> b)
{
  ByteReader r(b);
  r.expect_magic("FMAP");
  const auto h = r.u32();
  const auto wd = r.u32();
  const auto d = r.u32();
  const double scale = r.f64();
  if (h > (1u << 20) || wd > (1u << 20) || d > (1u << 20)) {
    throw Error(Errc::kShapeMismatch, "implausible feature map shape");
  }
  const std::uint64_t n = static_cast<std::uint64_t>(h) * wd * d;
  r.need(n, 4);
  FeatureMap f(static_cast<int>(h), static_cast<int>(wd), static_cast<int>(d), scale);
  for (auto & x : f.data) {
    x = r.f32();
  }
  r.expect_end();
  return f;
}

// ---- TOKS: fused tokens ---------------------------------------------------
// "TOKS" u32 D u64 n, then n x {i32 r theta z, u8 image_valid, 2D f32 content, D f32 spe}.
// Values are narrowed to f32 on write.

inline Bytes encode_tokens(std::span<const FusedToken> toks, std::size_t dim)
{
  ByteWriter w;
  w.magic("TOKS");
  w.u32(static_cast<std::uint32_t>(dim));
  w.u64(toks.size());
  for (const auto & t : toks) {
    if (t.content.size() != 2 * dim || t.spe.size() != dim) {
      throw Error(Errc::kShapeMismatch, "token length disagrees with D");
    }
    w.i32(t.voxel.r);
    w.i32(t.voxel.theta);
    w.i32(t.voxel.z);
    w.u8(t.image_valid ? 1 : 0);
    for (double x : t.content) {
      w.f32(static_cast<float>(x));
    }
    for (double x : t.spe) {
      w.f32(static_cast<float>(x));
    }
  }
  return std::move(w.bytes());
}

struct TokenFile
{
  std::size_t dim{0};
  std::vector<FusedToken> tokens;
};

inline TokenFile decode_tokens(std::span<const std::uint8_t> b)
{
  ByteReader r(b);
  r.expect_magic("TOKS");
  TokenFile tf;
  tf.dim = r.u32();
  const auto n = r.u64();
  r.need(n, 13 + 12 * static_cast<std::uint64_t>(tf.dim));
  tf.tokens.resize(n);
  for (auto & t : tf.tokens) {
    t.voxel.r = r.i32();
    t.voxel.theta = r.i32();
    t.voxel.z = r.i32();
    t.image_valid = r.u8() != 0;
    t.content.resize(2 * tf.dim);
    t.spe.resize(tf.dim);
    for (auto & x : t.content) {
      x = r.f32();
    }
    for (auto & x : t.spe) {
      x = r.f32();
    }
  }
  r.expect_end();
  return tf;
}

// ---- MSK2: run-length binary masks ----------------------------------------
// One record per mask: "MSK2" u32 camera H W, u32 run count, runs (u32),
// alternating and starting with zeros. A file is a sequence of records.

inline void encode_mask_into(ByteWriter & w, const Mask2D & m)
{
  if (m.bits.size() != static_cast<std::size_t>(m.width) * m.height) {
    throw Error(Errc::kShapeMismatch, "mask bit count disagrees with its shape");
  }
  std::vector<std::uint32_t> runs;
  std::uint8_t cur = 0;
  std::uint32_t len = 0;
  for (auto bit : m.bits) {
    const std::uint8_t v = bit ? 1 : 0;
    if (v != cur) {
      runs.push_back(len);
      cur = v;
      len = 0;
    }
    ++len;
  }
  runs.push_back(len);
  w.magic("MSK2");
  w.u32(m.camera);
  w.u32(static_cast<std::uint32_t>(m.height));
  w.u32(static_cast<std::uint32_t>(m.width));
  w.u32(static_cast<std::uint32_t>(runs.size()));
  for (auto r : runs) {
    w.u32(r);
  }
}

inline Bytes encode_masks(std::span<const Mask2D> masks)
{
  ByteWriter w;
  for (const auto & m : masks) {
    encode_mask_into(w, m);
  }
  return std::move(w.bytes());
}

inline std::vector<Mask2D> decode_masks(std::span<const std::uint8_t> b)
{
  ByteReader r(b);
  std::vector<Mask2D> out;
  while (!r.done()) {
    r.expect_magic("MSK2");
    const auto cam = r.u32();
    const auto h = r.u32();
    const auto w = r.u32();
    if (h > (1u << 16) || w > (1u << 16)) {
      throw Error(Errc::kShapeMismatch, "implausible mask shape");
    }
    const auto nruns = r.u32();
    r.need(nruns, 4);
    Mask2D m(cam, static_cast<int>(w), static_cast<int>(h));
    std::size_t pos = 0;
    for (std::uint32_t k = 0; k < nruns; ++k) {
      const auto len = r.u32();
      if (len > m.bits.size() - pos) {
        throw Error(Errc::kShapeMismatch, "mask runs exceed H * W");
      }
      std::fill_n(m.bits.begin() + static_cast<std::ptrdiff_t>(pos), len,
                  static_cast<std::uint8_t>(k % 2));
      pos += len;
    }
    if (pos != m.bits.size()) {
      throw Error(Errc::kShapeMismatch, "mask runs do not cover H * W");
    }
    out.push_back(std::move(m));
  }
  return out;
}

// ---- QRYS: query set ------------------------------------------------------
// "QRYS" u32 D, u32 prior, u32 no-prior, u32 semantic; per prior query
// f32 position x3, f32 confidence, u8 origin, i32 voxel r theta z, 2D f32
// content, D f32 spe; then no-prior and semantic vectors as D f32 each.

inline Bytes encode_queries(const QuerySet & q)
{
  ByteWriter w;
  w.magic("QRYS");
  const std::size_t d = q.dim;
  w.u32(static_cast<std::uint32_t>(d));
  w.u32(static_cast<std::uint32_t>(q.prior.size()));
  w.u32(static_cast<std::uint32_t>(q.no_prior.size()));
  w.u32(static_cast<std::uint32_t>(q.semantic.size()));
  for (const auto & p : q.prior) {
    if (p.content.size() != 2 * d || p.spe.size() != d) {
      throw Error(Errc::kShapeMismatch, "query length disagrees with D");
    }
    w.f32(static_cast<float>(p.hint.position.x));
    w.f32(static_cast<float>(p.hint.position.y));
    w.f32(static_cast<float>(p.hint.position.z));
    w.f32(static_cast<float>(p.hint.confidence));
    w.u8(static_cast<std::uint8_t>(p.hint.origin));
    w.i32(p.voxel.r);
    w.i32(p.voxel.theta);
    w.i32(p.voxel.z);
    for (double x : p.content) {
      w.f32(static_cast<float>(x));
    }
    for (double x : p.spe) {
      w.f32(static_cast<float>(x));
    }
  }
  for (const auto * set : {&q.no_prior, &q.semantic}) {
    for (const auto & v : *set) {
      if (v.size() != d) {
        throw Error(Errc::kShapeMismatch, "placeholder length disagrees with D");
      }
      for (double x : v) {
        w.f32(static_cast<float>(x));
      }
    }
  }
  return std::move(w.bytes());
}

inline QuerySet decode_queries(std::span<const std::uint8_t> b)
{
  ByteReader r(b);
  r.expect_magic("QRYS");
  QuerySet q;
  q.dim = r.u32();
  const auto np = r.u32();
  const auto nl = r.u32();
  const auto ns = r.u32();
  const std::size_t d = q.dim;
  r.need(np, 29 + 12 * static_cast<std::uint64_t>(d));
  q.prior.resize(np);
  for (auto & p : q.prior) {
    p.hint.position.x = r.f32();
    p.hint.position.y = r.f32();
    p.hint.position.z = r.f32();
    p.hint.confidence = r.f32();
    const auto origin = r.u8();
    if (origin > 1) {
      throw Error(Errc::kShapeMismatch, "unknown hint origin");
    }
    p.hint.origin = static_cast<HintOrigin>(origin);
    p.voxel.r = r.i32();
    p.voxel.theta = r.i32();
    p.voxel.z = r.i32();
    p.content.resize(2 * d);
    p.spe.resize(d);
    for (auto & x : p.content) {
      x = r.f32();
    }
    for (auto & x : p.spe) {
      x = r.f32();
    }
  }
  auto read_set = [&](std::vector<Embedding> & set, std::uint32_t n) {
    r.need(n, 4 * static_cast<std::uint64_t>(d));
    set.assign(n, Embedding(d));
    for (auto & v : set) {
      for (auto & x : v) {
        x = r.f32();
      }
    }
  };
  read_set(q.no_prior, nl);
  read_set(q.semantic, ns);
  r.expect_end();
  return q;
}

// ---- SPEW: positional-embedding weights -----------------------------------
// "SPEW" u32 dim bands hidden, u64 seed, f64 radial_extent z_min z_max, then
// psi_w psi_b phi_w1 phi_b1 phi_w2 phi_b2 as f32.

inline Bytes encode_spe_params(const SpeParams & p)
{
  p.validate();
  ByteWriter w;
  w.magic("SPEW");
  w.u32(static_cast<std::uint32_t>(p.dim));
  w.u32(static_cast<std::uint32_t>(p.bands));
  w.u32(static_cast<std::uint32_t>(p.hidden));
  w.u64(p.seed);
  w.f64(p.radial_extent);
  w.f64(p.z_min);
  w.f64(p.z_max);
  for (const auto * v : {&p.psi_w, &p.psi_b, &p.phi_w1, &p.phi_b1, &p.phi_w2, &p.phi_b2}) {
    for (float x : *v) {
      w.f32(x);
    }
  }
  return std::move(w.bytes());
}

inline SpeParams decode_spe_params(std::span<const std::uint8_t> b)
{
  ByteReader r(b);
  r.expect_magic("SPEW");
  SpeParams p;
  p.dim = r.u32();
  p.bands = r.u32();
  p.hidden = r.u32();
  p.seed = r.u64();
  p.radial_extent = r.f64();
  p.z_min = r.f64();
  p.z_max = r.f64();
  const std::array<std::pair<std::vector<float> *, std::uint64_t>, 6> parts{{
    {&p.psi_w, static_cast<std::uint64_t>(p.dim) * p.input_dim()},
    {&p.psi_b, p.dim},
    {&p.phi_w1, static_cast<std::uint64_t>(p.hidden) * 8},
    {&p.phi_b1, p.hidden},
    {&p.phi_w2, static_cast<std::uint64_t>(p.dim) * p.hidden},
    {&p.phi_b2, p.dim},
  }};
  for (const auto & [vec, n] : parts) {
    r.need(n, 4);
    vec->resize(n);
    for (auto & x : *vec) {
      x = r.f32();
    }
  }
  r.expect_end();
  p.validate();
  return p;
}

// ---- VOXL: voxelized grid -------------------------------------------------
// "VOXL" u32 version=1, grid spec (i32 x3, f64 x4), embedded PLCD record,
// u8 per point source tag, u64 dropped count + u32 indices, u64 voxel count,
// per voxel: i32 r theta z, u8 source, u32 n + u32 indices, u32 m + m x
// {u32 camera, i32 u_min v_min u_max v_max}.

inline Bytes encode_grid(const CylGrid & g)
{
  ByteWriter w;
  w.magic("VOXL");
  w.u32(1);
  w.i32(g.spec.r_bins);
  w.i32(g.spec.theta_bins);
  w.i32(g.spec.z_bins);
  w.f64(g.spec.r_min);
  w.f64(g.spec.r_max);
  w.f64(g.spec.z_min);
  w.f64(g.spec.z_max);
  const auto cloud = encode_cloud(g.cloud);
  w.raw(cloud.data(), cloud.size());
  if (g.point_source.size() != g.cloud.size()) {
    throw Error(Errc::kShapeMismatch, "point source tags disagree with the cloud");
  }
  w.raw(g.point_source.data(), g.point_source.size());
  w.u64(g.dropped.size());
  for (auto i : g.dropped) {
    w.u32(i);
  }
  w.u64(g.voxels.size());
  for (const auto & v : g.voxels) {
    w.i32(v.index.r);
    w.i32(v.index.theta);
    w.i32(v.index.z);
    w.u8(v.source);
    w.u32(static_cast<std::uint32_t>(v.points.size()));
    for (auto i : v.points) {
      w.u32(i);
    }
    w.u32(static_cast<std::uint32_t>(v.pairings.size()));
    for (const auto & p : v.pairings) {
      w.u32(p.camera);
      w.i32(p.rect.u_min);
      w.i32(p.rect.v_min);
      w.i32(p.rect.u_max);
      w.i32(p.rect.v_max);
    }
  }
  return std::move(w.bytes());
}

inline CylGrid decode_grid(std::span<const std::uint8_t> b)
{
  ByteReader r(b);
  r.expect_magic("VOXL");
  if (r.u32() != 1) {
    throw Error(Errc::kShapeMismatch, "unsupported VOXL version");
  }
  CylGrid g;
  g.spec.r_bins = r.i32();
  g.spec.theta_bins = r.i32();
  g.spec.z_bins = r.i32();
  g.spec.r_min = r.f64();
  g.spec.r_max = r.f64();
  g.spec.z_min = r.f64();
  g.spec.z_max = r.f64();
  try {
    g.spec.validate();
  } catch (const Error &) {
    throw Error(Errc::kShapeMismatch, "VOXL grid spec is invalid");
  }
  g.cloud = read_cloud_from(r);
  g.point_source.resize(g.cloud.size());
  r.raw(g.point_source.data(), g.point_source.size());
  const auto nd = r.u64();
  r.need(nd, 4);
  g.dropped.resize(nd);
  for (auto & i : g.dropped) {
    i = r.u32();
  }
  const auto nv = r.u64();
  r.need(nv, 21);
  g.voxels.resize(nv);
  for (auto & v : g.voxels) {
    v.index.r = r.i32();
    v.index.theta = r.i32();
    v.index.z = r.i32();
    if (!g.spec.contains(v.index)) {
      throw Error(Errc::kShapeMismatch, "voxel index outside the stored grid");
    }
    v.source = r.u8();
    const auto np = r.u32();
    r.need(np, 4);
    v.points.resize(np);
    for (auto & i : v.points) {
      i = r.u32();
      if (i >= g.cloud.size()) {
        throw Error(Errc::kShapeMismatch, "voxel refers to a missing point");
      }
    }
    const auto nc = r.u32();
    r.need(nc, 20);
    v.pairings.resize(nc);
    for (auto & p : v.pairings) {
      p.camera = r.u32();
      p.rect.u_min = r.i32();
      p.rect.v_min = r.i32();
      p.rect.u_max = r.i32();
      p.rect.v_max = r.i32();
    }
  }
  r.expect_end();
  return g;
}

// ---- PPM (binary P6, maxval 255) ------------------------------------------

inline Bytes encode_ppm(const Image & img)
{
  const std::string header =
    "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  Bytes b(header.begin(), header.end());
  b.insert(b.end(), img.data.begin(), img.data.end());
  return b;
}

inline Image decode_ppm(std::span<const std::uint8_t> b)
{
  if (b.size() < 2 || b[0] != 'P' || b[1] != '6') {
    throw Error(Errc::kBadMagic, "expected a binary P6 PPM");
  }
  std::size_t pos = 2;
  auto next_int = [&]() -> long {
    // Whitespace and '#' comments may separate header fields.
    while (pos < b.size()) {
      if (b[pos] == '#') {
        while (pos < b.size() && b[pos] != '\n') {
          ++pos;
        }
      } else if (std::isspace(b[pos])) {
        ++pos;
      } else {
        break;
      }
    }
    if (pos >= b.size() || !std::isdigit(b[pos])) {
      throw Error(Errc::kTruncatedFile, "malformed PPM header");
    }
    long v = 0;
    while (pos < b.size() && std::isdigit(b[pos])) {
      v = v * 10 + (b[pos] - '0');
      if (v > (1L << 24)) {
        throw Error(Errc::kShapeMismatch, "PPM dimension too large");
      }
      ++pos;
    }
    return v;
  };
  const long w = next_int();
  const long h = next_int();
  const long maxval = next_int();
  if (maxval != 255) {
    throw Error(Errc::kShapeMismatch, "only 8-bit PPM is supported");
  }
  if (pos >= b.size() || !std::isspace(b[pos])) {
    throw Error(Errc::kTruncatedFile, "malformed PPM header");
  }
  ++pos;
  Image img(static_cast<int>(w), static_cast<int>(h));
  if (b.size() - pos < img.data.size()) {
    throw Error(Errc::kTruncatedFile, "PPM pixel data is short");
  }
  if (b.size() - pos > img.data.size()) {
    throw Error(Errc::kShapeMismatch, "trailing bytes after PPM pixel data");
  }
  std::copy(b.begin() + static_cast<std::ptrdiff_t>(pos), b.end(), img.data.begin());
  return img;
}

// ---- calibration JSON -----------------------------------------------------

/// `augmented` marks extrinsics that carry a global augmentation (scale or
/// reflection) and are exempt from the rotation check on load.
inline nlohmann::json calibration_to_json(std::span<const CameraModel> cams, bool augmented = false)
{
  nlohmann::json j;
  j["format"] = "panofuse-calibration";
  j["version"] = 1;
  j["augmented"] = augmented;
  j["cameras"] = nlohmann::json::array();
  for (const auto & c : cams) {
    nlohmann::json cj;
    cj["width"] = c.width;
    cj["height"] = c.height;
    std::vector<double> k;
    std::vector<double> t;
    for (int i = 0; i < 3; ++i) {
      for (int jj = 0; jj < 3; ++jj) {
        k.push_back(c.intrinsic(i, jj));
      }
    }
    for (int i = 0; i < 4; ++i) {
      for (int jj = 0; jj < 4; ++jj) {
        t.push_back(c.extrinsic(i, jj));
      }
    }
    cj["K"] = k;
    cj["T"] = t;
    j["cameras"].push_back(cj);
  }
  return j;
}

inline std::vector<CameraModel> calibration_from_json(const nlohmann::json & j)
{
  std::vector<CameraModel> cams;
  try {
    const bool validate = !j.value("augmented", false);
    if (j.at("format").get<std::string>() != "panofuse-calibration" ||
        j.at("version").get<int>() != 1) {
      throw Error(Errc::kBadConfig, "unrecognised calibration format or version");
    }
    for (const auto & cj : j.at("cameras")) {
      CameraModel c;
      c.width = cj.at("width").get<int>();
      c.height = cj.at("height").get<int>();
      const auto k = cj.at("K").get<std::vector<double>>();
      const auto t = cj.at("T").get<std::vector<double>>();
      if (k.size() != 9 || t.size() != 16) {
        throw Error(Errc::kShapeMismatch, "calibration matrices must be 3x3 and 4x4");
      }
      for (int i = 0; i < 3; ++i) {
        for (int jj = 0; jj < 3; ++jj) {
          c.intrinsic(i, jj) = k[static_cast<std::size_t>(3 * i + jj)];
        }
      }
      for (int i = 0; i < 4; ++i) {
        for (int jj = 0; jj < 4; ++jj) {
          c.extrinsic(i, jj) = t[static_cast<std::size_t>(4 * i + jj)];
        }
      }
      if (validate) {
        validate_camera(c);
      } else if (c.width <= 0 || c.height <= 0) {
        throw Error(Errc::kBadConfig, "image size must be positive");
      }
      cams.push_back(c);
    }
  } catch (const nlohmann::json::exception & e) {
    throw Error(Errc::kBadConfig, std::string("calibration: ") + e.what());
  }
  return cams;
}

inline std::string encode_calibration(std::span<const CameraModel> cams, bool augmented = false)
{
  return calibration_to_json(cams, augmented).dump(2) + "\n";
}

inline std::vector<CameraModel> decode_calibration(std::string_view text)
{
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception & e) {
    throw Error(Errc::kBadConfig, std::string("calibration: ") + e.what());
  }
  return calibration_from_json(j);
}

// ---- class table text -----------------------------------------------------
// One class per line: "<id> <thing|stuff|ignore> <name>"; '#' starts a comment.

inline ClassTable decode_class_table(std::string_view text)
{
  ClassTable t;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) {
      line.erase(h);
    }
    std::istringstream ls(line);
    long id = 0;
    std::string kind;
    std::string name;
    if (!(ls >> id)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) {
        continue;
      }
      throw Error(Errc::kBadConfig, "class table line " + std::to_string(lineno));
    }
    if (!(ls >> kind >> name) || id < 0 || id > 65535) {
      throw Error(Errc::kBadConfig, "class table line " + std::to_string(lineno));
    }
    ClassInfo c;
    c.id = static_cast<std::uint16_t>(id);
    c.name = name;
    if (kind == "thing") {
      c.kind = ClassKind::kThing;
    } else if (kind == "stuff") {
      c.kind = ClassKind::kStuff;
    } else if (kind == "ignore") {
      c.kind = ClassKind::kIgnore;
    } else {
      throw Error(Errc::kBadConfig, "unknown class kind '" + kind + "'");
    }
    for (const auto & e : t.classes) {
      if (e.id == c.id) {
        throw Error(Errc::kBadConfig, "duplicate class id " + std::to_string(id));
      }
    }
    t.classes.push_back(c);
  }
  return t;
}

inline std::string encode_class_table(const ClassTable & t)
{
  std::string s;
  for (const auto & c : t.classes) {
    s += std::to_string(c.id) + " " + class_kind_name(c.kind) + " " + c.name + "\n";
  }
  return s;
}

// ---- panoptic report JSON -------------------------------------------------

inline nlohmann::json report_to_json(const PanopticReport & r)
{
  nlohmann::json j;
  j["pq"] = r.pq;
  j["pq_dagger"] = r.pq_dagger;
  j["rq"] = r.rq;
  j["sq"] = r.sq;
  j["pq_th"] = r.pq_th;
  j["rq_th"] = r.rq_th;
  j["sq_th"] = r.sq_th;
  j["pq_st"] = r.pq_st;
  j["rq_st"] = r.rq_st;
  j["sq_st"] = r.sq_st;
  j["miou"] = r.miou;
  j["classes"] = nlohmann::json::array();
  for (const auto & c : r.classes) {
    j["classes"].push_back({{"id", c.id},
                            {"name", c.name},
                            {"kind", class_kind_name(c.kind)},
                            {"tp", c.tp},
                            {"fp", c.fp},
                            {"fn", c.fn},
                            {"pq", c.pq},
                            {"sq", c.sq},
                            {"rq", c.rq},
                            {"iou", c.iou}});
  }
  return j;
}

}  // namespace panofuse

#endif  // PANOFUSE_IO_HPP_
