#pragma once

// Model checkpoint: 8-byte magic "GZCFCKPT", then little-endian u32
// version, u32 cell_kind (0 rnn, 1 gru, 2 lstm), u32 input_size,
// u32 hidden_size, u64 parameter count, then that many little-endian f64
// values in ModelParams flat order (W, U, b, V, c; each column-major).

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "gazeconf/nn/params.hpp"

namespace gazeconf::nn {

inline constexpr std::array<char, 8> kCheckpointMagic = {'G', 'Z', 'C', 'F', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

template <typename T>
void put_le(std::ostream& out, T value) {
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes;
  if (!in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T))) throw DataError("checkpoint: truncated");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

}  // namespace detail

template <typename Scalar>
void write_checkpoint(const ModelParams<Scalar>& params, std::ostream& out) {
  out.write(kCheckpointMagic.data(), kCheckpointMagic.size());
  detail::put_le<std::uint32_t>(out, kCheckpointVersion);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.kind()));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.input_size()));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.hidden_size()));
  detail::put_le<std::uint64_t>(out, static_cast<std::uint64_t>(params.size()));
  for (Eigen::Index i = 0; i < params.size(); ++i) detail::put_le<double>(out, static_cast<double>(params.data()(i)));
}

inline ModelParams<double> read_checkpoint(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kCheckpointMagic)
    throw DataError("checkpoint: bad magic");
  const auto version = detail::get_le<std::uint32_t>(in);
  if (version != kCheckpointVersion) throw DataError("checkpoint: unsupported version " + std::to_string(version));
  const auto kind = detail::get_le<std::uint32_t>(in);
  if (kind > 2) throw DataError("checkpoint: unknown cell kind");
  const auto input = detail::get_le<std::uint32_t>(in);
  const auto hidden = detail::get_le<std::uint32_t>(in);
  const auto count = detail::get_le<std::uint64_t>(in);
  ModelParams<double> params(static_cast<CellKind>(kind), static_cast<int>(input), static_cast<int>(hidden));
  if (count != static_cast<std::uint64_t>(params.size())) throw DataError("checkpoint: parameter count mismatch");
  for (Eigen::Index i = 0; i < params.size(); ++i) params.data()(i) = detail::get_le<double>(in);
  return params;
}

template <typename Scalar>
void save_checkpoint(const ModelParams<Scalar>& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path);
  write_checkpoint(params, out);
}

inline ModelParams<double> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path);
  return read_checkpoint(in);
}

}  // namespace gazeconf::nn
