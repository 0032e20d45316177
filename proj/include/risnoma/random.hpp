#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace risnoma {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Hierarchical seed. Child streams are derived by hashing tags into the
/// parent seed, so a trial's channels, initial phases and randomization draws
/// never share state and do not depend on evaluation order.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0) : seed_(splitmix64(seed)) {}

  RngStream substream(std::uint64_t tag) const {
    RngStream child;
    child.seed_ = splitmix64(seed_ ^ splitmix64(tag + 0x632be59bd9b4e019ULL));
    return child;
  }
  RngStream substream(std::initializer_list<std::uint64_t> tags) const {
    RngStream s = *this;
    for (auto t : tags) s = s.substream(t);
    return s;
  }

  std::mt19937_64 engine() const { return std::mt19937_64(seed_); }
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
};

}  // namespace risnoma
