// Copyright 2026 The mlnpose Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "mlnpose/tensor_io.hpp"

#include <cctype>
#include <fstream>
#include <iterator>

#include "mlnpose/byte_io.hpp"
#include "mlnpose/errors.hpp"

namespace mlnpose {

std::vector<char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, std::span<const char> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("short write to '" + path + "'");
}

std::vector<char> encode_tensor(const Tensor& tensor) {
  ByteWriter w;
  w.bytes("MLNT");
  w.u32(kTensorFormatVersion);
  const Shape& s = tensor.shape();
  for (int d : {s.n, s.c, s.h, s.w}) w.u32(static_cast<std::uint32_t>(d));
  w.f32s(tensor.data());
  return std::move(w.buffer());
}

Tensor decode_tensor(std::span<const char> bytes) {
  ByteReader r(bytes, "MLNT tensor");
  if (r.bytes(4) != "MLNT") throw FormatError("MLNT tensor: bad magic bytes");
  const std::uint32_t version = r.u32();
  if (version != kTensorFormatVersion) {
    throw FormatError("MLNT tensor: unsupported version " +
                      std::to_string(version));
  }
  std::uint32_t dims[4];
  for (auto& d : dims) {
    d = r.u32();
    if (d > 0x7fffffffu) throw FormatError("MLNT tensor: dimension too large");
  }
  const Shape shape{static_cast<int>(dims[0]), static_cast<int>(dims[1]),
                    static_cast<int>(dims[2]), static_cast<int>(dims[3])};
  if (r.remaining() / 4 < shape.numel()) {
    throw TruncatedError("MLNT tensor: payload holds " +
                         std::to_string(r.remaining() / 4) + " values, shape " +
                         shape.str() + " needs " + std::to_string(shape.numel()));
  }
  Tensor t(shape);
  r.f32s(t.data());
  return t;
}

void save_tensor(const std::string& path, const Tensor& tensor) {
  write_file(path, encode_tensor(tensor));
}

Tensor load_tensor(const std::string& path) { return decode_tensor(read_file(path)); }

namespace {

int ppm_int(const std::vector<char>& b, std::size_t& pos) {
  while (pos < b.size()) {
    if (b[pos] == '#') {
      while (pos < b.size() && b[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(b[pos]))) {
      ++pos;
    } else {
      break;
    }
  }
  if (pos >= b.size() || !std::isdigit(static_cast<unsigned char>(b[pos]))) {
    throw FormatError("PPM: malformed header");
  }
  long v = 0;
  while (pos < b.size() && std::isdigit(static_cast<unsigned char>(b[pos]))) {
    v = v * 10 + (b[pos++] - '0');
    if (v > 1 << 20) throw FormatError("PPM: header value too large");
  }
  return static_cast<int>(v);
}

}  // namespace

Tensor load_ppm(const std::string& path) {
  const std::vector<char> b = read_file(path);
  if (b.size() < 2 || b[0] != 'P' || b[1] != '6') {
    throw FormatError("PPM '" + path + "': only binary P6 is supported");
  }
  std::size_t pos = 2;
  const int width = ppm_int(b, pos);
  const int height = ppm_int(b, pos);
  const int maxval = ppm_int(b, pos);
  if (maxval != 255) throw FormatError("PPM '" + path + "': maxval must be 255");
  ++pos;  // single whitespace before the raster
  const std::size_t needed = static_cast<std::size_t>(width) * height * 3;
  if (b.size() < pos + needed) throw TruncatedError("PPM '" + path + "': raster truncated");
  Tensor t(Shape{1, 3, height, width});
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < 3; ++c) {
        const auto v = static_cast<unsigned char>(b[pos + (static_cast<std::size_t>(y) * width + x) * 3 + c]);
        t.at(0, c, y, x) = static_cast<float>(v) / 256.0f - 0.5f;
      }
    }
  }
  return t;
}

void save_ppm(const std::string& path, int width, int height,
              std::span<const std::uint8_t> rgb) {
  if (rgb.size() != static_cast<std::size_t>(width) * height * 3) {
    throw ShapeError("save_ppm: raster size does not match dims");
  }
  std::string header = "P6\n" + std::to_string(width) + " " +
                       std::to_string(height) + "\n255\n";
  std::vector<char> out(header.begin(), header.end());
  out.insert(out.end(), rgb.begin(), rgb.end());
  write_file(path, out);
}

}  // namespace mlnpose
