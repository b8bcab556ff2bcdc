#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace arbor {

using VertexId = std::int32_t;
using NodeId = std::int32_t;
inline constexpr std::int32_t kNone = -1;

// Selects the reference loop or the OpenMP kernel. Both must agree exactly.
enum class Exec { serial, parallel };

enum class ErrorKind { validation, budget, stage };

class ArborError : public std::runtime_error {
 public:
  ArborError(ErrorKind kind, std::string stage, const std::string& what)
      : std::runtime_error(what), kind_(kind), stage_(std::move(stage)) {}
  ErrorKind kind() const { return kind_; }
  const std::string& stage() const { return stage_; }
  int exit_code() const {
    switch (kind_) {
      case ErrorKind::validation: return 2;
      case ErrorKind::budget: return 3;
      default: return 4;
    }
  }

 private:
  ErrorKind kind_;
  std::string stage_;
};

inline ArborError validation_error(std::string stage, const std::string& what) {
  return ArborError(ErrorKind::validation, std::move(stage), what);
}
inline ArborError budget_error(std::string stage, const std::string& what) {
  return ArborError(ErrorKind::budget, std::move(stage), what);
}
inline ArborError stage_error(std::string stage, const std::string& what) {
  return ArborError(ErrorKind::stage, std::move(stage), what);
}

using Rng = std::mt19937_64;

// Independent stream derived from (seed, stream); used for retries and trials.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

inline double ipow(double base, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

}  // namespace arbor
