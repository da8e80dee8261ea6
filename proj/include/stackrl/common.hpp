#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace stackrl {

using Vec = std::vector<double>;

[[noreturn]] inline void contract_fail(const char* file, int line, const std::string& msg) {
  throw std::runtime_error(std::string(file) + ":" + std::to_string(line) +
                           ": contract violation: " + msg);
}

#define SRL_CHECK(cond, msg)                                \
  do {                                                      \
    if (!(cond)) ::stackrl::contract_fail(__FILE__, __LINE__, (msg)); \
  } while (0)

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic RNG stream. Child streams are derived with fork() so that
// workers and subsystems draw from independent sequences.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(splitmix64(seed)) {}

  uint64_t raw() { return eng_(); }

  double uniform() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(eng_);
  }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(eng_);
  }
  double normal(double mean = 0.0, double sd = 1.0) {
    return std::normal_distribution<double>(mean, sd)(eng_);
  }
  // inclusive bounds
  int64_t uniform_int(int64_t lo, int64_t hi) {
    return std::uniform_int_distribution<int64_t>(lo, hi)(eng_);
  }

  Rng fork(uint64_t tag) { return Rng(splitmix64(raw() ^ splitmix64(tag))); }

 private:
  std::mt19937_64 eng_;
};

}  // namespace stackrl
