#pragma once

#include <cstdint>
#include <vector>

namespace hinctr {

// splitmix64 generator. Chosen over std::mt19937 because its output is a
// pure function of the seed word with no implementation-defined
// distribution adaptors, so every sequence is reproducible bit-for-bit
// across platforms and across process runs.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1]; safe as the argument of a logarithm.
  double next_open01() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Uniform integer in [0, n), n > 0. Multiply-shift reduction: fixed
  // behaviour everywhere, bias is negligible for the n used here.
  uint64_t below(uint64_t n) {
    return static_cast<uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  bool next_bool() { return (next_u64() & 1u) != 0; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Derives an independent stream from (seed, tag). Used to give every
  // (instance, epoch, resample) its own reproducible sequence.
  static uint64_t mix(uint64_t seed, uint64_t tag) {
    Rng r(seed ^ (tag * 0xd6e8feb86659fd93ULL));
    r.next_u64();
    return r.next_u64();
  }

 private:
  uint64_t state_;
};

}  // namespace hinctr
