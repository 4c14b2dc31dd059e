#include "stimsqz/random.hpp"

#include <algorithm>
#include <stdexcept>

namespace stimsqz {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

Counts sample_multinomial(const std::array<double, 4>& probs, std::uint64_t trials, std::mt19937_64& engine) {
  Counts out{};
  double remaining_mass = 1.0;
  std::uint64_t remaining = trials;
  for (std::size_t k = 0; k + 1 < probs.size() && remaining > 0; ++k) {
    if (probs[k] < 0.0) throw std::invalid_argument("negative outcome probability");
    const double q = remaining_mass > 0.0 ? std::clamp(probs[k] / remaining_mass, 0.0, 1.0) : 0.0;
    if (q >= 1.0) {
      out[k] = remaining;
    } else if (q > 0.0) {
      std::binomial_distribution<std::uint64_t> draw(remaining, q);
      out[k] = draw(engine);
    }
    remaining -= out[k];
    remaining_mass -= probs[k];
  }
  out[3] += remaining;
  return out;
}

std::uint64_t total(const Counts& c) { return c[0] + c[1] + c[2] + c[3]; }

std::array<double, 4> frequencies(const Counts& c) {
  const auto n = total(c);
  if (n == 0) throw std::invalid_argument("no trials recorded");
  const double inv = 1.0 / static_cast<double>(n);
  return {c[0] * inv, c[1] * inv, c[2] * inv, c[3] * inv};
}

}  // namespace stimsqz
