#pragma once

// Shared vocabulary: labels, error types, time units and seeded RNG streams.

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gazeconf {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input files or bad data inside them.
class DataError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

// Invalid options, flag values or call preconditions.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Non-finite loss/gradients or other numeric breakdown during training.
class NumericError : public Error {
 public:
  using Error::Error;
};

class ContractViolation : public Error {
 public:
  using Error::Error;
};

enum class Label : std::uint8_t { not_confused = 0, confused = 1 };

inline std::string_view to_string(Label label) {
  return label == Label::confused ? "confused" : "not_confused";
}

inline Label parse_label(std::string_view token) {
  if (token == "confused") return Label::confused;
  if (token == "not_confused") return Label::not_confused;
  throw DataError("unknown label token '" + std::string(token) + "'");
}

// Timestamps are integer microseconds since trial start.
using Micros = std::int64_t;

inline constexpr int kSampleRateHz = 120;
inline constexpr double kSamplePeriodUs = 1e6 / kSampleRateHz;

// Timestamp of sample `index` on the nominal 120 Hz grid, rounded once
// from the exact rational value so spacing never drifts.
inline constexpr Micros sample_time_us(std::int64_t index) {
  // index * 1e6 / 120 == index * 25000 / 3
  const std::int64_t scaled = index * 25000;
  return (scaled + 1) / 3;  // round-half-up of scaled/3 (remainder is 0,1,2)
}

inline constexpr Micros ms_to_us(double ms) {
  return static_cast<Micros>(ms * 1000.0 + (ms >= 0 ? 0.5 : -0.5));
}

inline constexpr double us_to_ms(Micros us) { return static_cast<double>(us) / 1000.0; }

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

// Independent stream for a named purpose, e.g. derive_seed(seed, "pivot").
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
  return splitmix64(seed ^ splitmix64(fnv1a64(label)));
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view label,
                                 std::uint64_t index) {
  return splitmix64(derive_seed(seed, label) + splitmix64(index));
}

inline Rng make_rng(std::uint64_t seed, std::string_view label) {
  return Rng(derive_seed(seed, label));
}

inline Rng make_rng(std::uint64_t seed, std::string_view label, std::uint64_t index) {
  return Rng(derive_seed(seed, label, index));
}

// Uniform double in [0, 1) built from the top 53 bits; unlike
// std::uniform_real_distribution this is identical across standard libraries.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Unbiased integer in [0, n).
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  if (n == 0) throw ContractViolation("uniform_index: empty range");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t draw = rng();
  while (draw >= limit) draw = rng();
  return draw % n;
}

// Fisher-Yates with uniform_index, portable across standard libraries.
template <typename RandomIt>
void shuffle(RandomIt first, RandomIt last, Rng& rng) {
  const auto count = static_cast<std::uint64_t>(last - first);
  for (std::uint64_t i = count; i > 1; --i) {
    const auto j = uniform_index(rng, i);
    std::swap(first[i - 1], first[j]);
  }
}

}  // namespace gazeconf
