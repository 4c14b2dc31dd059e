#pragma once

#include <array>
#include <cstdint>
#include <random>

namespace stimsqz {

using Counts = std::array<std::uint64_t, 4>;

/// Seed of the independent stream `stream` under master seed `seed`.
/// Streams are keyed by a counter (window index, resample index) so results do
/// not depend on evaluation order.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream);

class StreamRng {
 public:
  StreamRng(std::uint64_t seed, std::uint64_t stream) : engine_(stream_seed(seed, stream)) {}
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// Multinomial draw of `trials` over four outcome probabilities via
/// conditional binomials.
Counts sample_multinomial(const std::array<double, 4>& probs, std::uint64_t trials, std::mt19937_64& engine);

std::uint64_t total(const Counts& c);
std::array<double, 4> frequencies(const Counts& c);

}  // namespace stimsqz
