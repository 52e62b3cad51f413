#ifndef TASKPLAN_CORE_RNG_HPP
#define TASKPLAN_CORE_RNG_HPP

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

namespace taskplan {

inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Mixes an arbitrary number of 64-bit words into one seed. Used to derive
// independent per-sample streams from a master seed so that generation order
// never depends on loop structure.
inline uint64_t mix_seed(std::initializer_list<uint64_t> words) {
  uint64_t s = 0x51ab29f3c2e4d06bULL;
  for (uint64_t w : words) {
    s ^= w + 0x9e3779b97f4a7c15ULL + (s << 6) + (s >> 2);
    (void)splitmix64(s);
  }
  return s;
}

// xoshiro256++ with splitmix64 seeding. Self-contained so that sampling is
// bit-reproducible across standard libraries and platforms; std::mt19937
// distributions are not portable.
class Rng {
 public:
  explicit Rng(uint64_t seed) : seed_(seed) {
    uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
  }

  uint64_t seed() const { return seed_; }

  uint64_t next() {
    auto rotl = [](uint64_t x, int k) { return (x << k) | (x >> (64 - k)); };
    const uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform in [0, n). Modulo bias is negligible for the small n used here.
  size_t index(size_t n) { return n == 0 ? 0 : static_cast<size_t>(next() % n); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  Rng child(uint64_t stream) const { return Rng(mix_seed({seed_, stream})); }

 private:
  uint64_t seed_;
  std::array<uint64_t, 4> state_{};
};

inline uint64_t fnv1a(std::string_view bytes, uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace taskplan

#endif
