// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The chanpred Authors

// Binary model file:
//   "CPGMM" 0x01 | structure u8 | K u32 | dim u32 | weights K f64 |
//   means K*dim (re, im) f64 | covariances (full: K*dim*dim (re, im) f64,
//   row-major; toeplitz: K*2dim f64) | CRC-32 u32 of all preceding bytes.
// All integers and floats little-endian.

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "error.hpp"
#include "gmm.hpp"

namespace chanpred {

namespace {

constexpr unsigned char kMagic[5] = {'C', 'P', 'G', 'M', 'M'};
constexpr unsigned char kVersion = 0x01;
constexpr std::size_t kHeaderSize = 6 + 1 + 4 + 4;

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  void f64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<unsigned char>(bits >> (8 * i)));
  }
  void c128(cplx v) {
    f64(v.real());
    f64(v.imag());
  }
  std::vector<unsigned char>& buffer() { return buf_; }

 private:
  std::vector<unsigned char> buf_;
};

class Reader {
 public:
  explicit Reader(const std::vector<unsigned char>& b, std::size_t end) : buf_(b), end_(end) {}
  void need(std::size_t n) const {
    if (pos_ + n > end_) fail(ErrorKind::Data, "model file truncated");
  }
  std::uint8_t u8() {
    need(1);
    return buf_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf_[pos_++]) << (8 * i);
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(buf_[pos_++]) << (8 * i);
    return std::bit_cast<double>(bits);
  }
  cplx c128() {
    const double re = f64();
    return {re, f64()};
  }
  std::size_t position() const { return pos_; }

 private:
  const std::vector<unsigned char>& buf_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

std::uint32_t crc32_of(const unsigned char* p, std::size_t n) {
  uLong crc = crc32(0L, Z_NULL, 0);
  while (n > 0) {
    const auto step = static_cast<uInt>(std::min<std::size_t>(n, 1u << 30));
    crc = crc32(crc, p, step);
    p += step;
    n -= step;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

std::vector<unsigned char> serialize_model(const GmmModel& model) {
  model.validate();
  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.u8(kVersion);
  w.u8(static_cast<std::uint8_t>(model.structure));
  w.u32(static_cast<std::uint32_t>(model.components()));
  w.u32(static_cast<std::uint32_t>(model.dim));
  for (double v : model.weights) w.f64(v);
  for (const CVector& mu : model.means)
    for (Eigen::Index i = 0; i < mu.size(); ++i) w.c128(mu(i));
  if (model.structure == CovarianceStructure::Full) {
    for (const CMatrix& c : model.covariances)
      for (Eigen::Index r = 0; r < c.rows(); ++r)
        for (Eigen::Index col = 0; col < c.cols(); ++col) w.c128(c(r, col));
  } else {
    for (const auto& s : model.spectra)
      for (double v : s) w.f64(v);
  }
  auto& buf = w.buffer();
  const std::uint32_t crc = crc32_of(buf.data(), buf.size());
  w.u32(crc);
  return std::move(buf);
}

GmmModel deserialize_model(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < kHeaderSize + 4) fail(ErrorKind::Data, "model file truncated");
  if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
    fail(ErrorKind::Data, "not a model file (bad magic)");
  if (bytes[5] != kVersion)
    fail(ErrorKind::Data, "unsupported model file version " + std::to_string(bytes[5]));

  const std::size_t body = bytes.size() - 4;
  Reader r(bytes, bytes.size());
  for (int i = 0; i < 6; ++i) r.u8();
  const std::uint8_t tag = r.u8();
  if (tag > 1) fail(ErrorKind::Data, "unknown covariance structure tag " + std::to_string(tag));
  const std::uint32_t k_count = r.u32();
  const std::uint32_t dim = r.u32();
  if (k_count == 0 || dim == 0) fail(ErrorKind::Data, "model file declares K=0 or dim=0");

  const auto structure = static_cast<CovarianceStructure>(tag);
  const std::size_t cov_bytes = structure == CovarianceStructure::Full
                                    ? std::size_t{16} * dim * dim
                                    : std::size_t{16} * dim;
  const std::size_t expected = kHeaderSize + std::size_t{k_count} * (8 + 16 * std::size_t{dim} + cov_bytes);
  if (body < expected) fail(ErrorKind::Data, "model file truncated");
  if (body > expected) fail(ErrorKind::Data, "model file has trailing bytes");

  const std::uint32_t stored = [&] {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[body + static_cast<std::size_t>(i)]) << (8 * i);
    return v;
  }();
  if (crc32_of(bytes.data(), body) != stored) fail(ErrorKind::Data, "model file checksum mismatch");

  GmmModel m;
  m.structure = structure;
  m.dim = dim;
  m.weights.resize(k_count);
  for (auto& w : m.weights) w = r.f64();
  m.means.assign(k_count, CVector(dim));
  for (auto& mu : m.means)
    for (Eigen::Index i = 0; i < mu.size(); ++i) mu(i) = r.c128();
  if (structure == CovarianceStructure::Full) {
    m.covariances.assign(k_count, CMatrix(dim, dim));
    for (auto& c : m.covariances)
      for (Eigen::Index row = 0; row < c.rows(); ++row)
        for (Eigen::Index col = 0; col < c.cols(); ++col) c(row, col) = r.c128();
  } else {
    m.spectra.assign(k_count, std::vector<double>(2 * std::size_t{dim}));
    for (auto& s : m.spectra)
      for (double& v : s) v = r.f64();
  }
  m.validate();
  return m;
}

void save_model(const GmmModel& model, const std::filesystem::path& path) {
  const auto bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

GmmModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

}  // namespace chanpred
