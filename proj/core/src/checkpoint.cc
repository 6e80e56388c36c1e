// Copyright 2026 The lsmooth Authors.
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

#include "lsmooth/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace lsmooth {

namespace {

constexpr char kMagic[8] = {'L', 'S', 'M', 'C', 'K', 'P', 'T', '1'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

template <typename T>
void put(std::ostream& os, T value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T value{};
  if (!is.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw Error("checkpoint: truncated file");
  }
  return value;
}

std::string get_bytes(std::istream& is, std::uint64_t n) {
  if (n > (1ULL << 32)) throw Error("checkpoint: implausible string length");
  std::string s(n, '\0');
  if (n && !is.read(s.data(), static_cast<std::streamsize>(n))) {
    throw Error("checkpoint: truncated file");
  }
  return s;
}

}  // namespace

void save_checkpoint(std::ostream& os, const Model& model,
                     const std::string& config_echo) {
  os.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(os, kCheckpointVersion);
  const ModelConfig& c = model.config();
  put<std::uint64_t>(os, c.vocab_size);
  put<std::uint64_t>(os, c.embed_dim);
  put<std::uint64_t>(os, c.hidden_dim);
  put<std::uint64_t>(os, config_echo.size());
  os.write(config_echo.data(), static_cast<std::streamsize>(config_echo.size()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(model.tensors().size()));
  const auto params = model.params();
  for (const TensorInfo& t : model.tensors()) {
    put<std::uint32_t>(os, static_cast<std::uint32_t>(t.name.size()));
    os.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    put<std::uint64_t>(os, t.rows);
    put<std::uint64_t>(os, t.cols);
    os.write(reinterpret_cast<const char*>(params.data() + t.offset),
             static_cast<std::streamsize>(t.size() * sizeof(double)));
  }
  if (!os) throw Error("checkpoint: write failed");
}

void save_checkpoint(const std::string& path, const Model& model,
                     const std::string& config_echo) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  save_checkpoint(os, model, config_echo);
}

Checkpoint load_checkpoint(std::istream& is) {
  char magic[sizeof(kMagic)];
  if (!is.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error("checkpoint: bad magic");
  }
  const auto version = get<std::uint32_t>(is);
  if (version != kCheckpointVersion) {
    throw Error("checkpoint: unsupported version " + std::to_string(version));
  }
  ModelConfig config;
  config.vocab_size = get<std::uint64_t>(is);
  config.embed_dim = get<std::uint64_t>(is);
  config.hidden_dim = get<std::uint64_t>(is);
  std::string echo = get_bytes(is, get<std::uint64_t>(is));

  Model model(config);
  const auto count = get<std::uint32_t>(is);
  if (count != model.tensors().size()) {
    throw Error("checkpoint: tensor count mismatch");
  }
  auto params = model.params();
  for (const TensorInfo& t : model.tensors()) {
    const std::string name = get_bytes(is, get<std::uint32_t>(is));
    const auto rows = get<std::uint64_t>(is);
    const auto cols = get<std::uint64_t>(is);
    if (name != t.name || rows != t.rows || cols != t.cols) {
      throw Error("checkpoint: unexpected tensor '" + name + "'");
    }
    if (!is.read(reinterpret_cast<char*>(params.data() + t.offset),
                 static_cast<std::streamsize>(t.size() * sizeof(double)))) {
      throw Error("checkpoint: truncated file");
    }
  }
  return {std::move(model), std::move(echo)};
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open checkpoint '" + path + "'");
  return load_checkpoint(is);
}

}  // namespace lsmooth
