#pragma once

#include <cstdint>
#include <limits>

namespace hjm {

/// Counter-based generator: the stream is a pure function of
/// (seed, stream id, counter), so any (path, step) draw can be regenerated
/// independently of thread scheduling. Output is SplitMix64 over a Weyl
/// sequence started at a hash of the key.
class CounterRng {
   public:
    using result_type = std::uint64_t;

    CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter)
        : state_(mix(seed ^ mix(stream + 0x632BE59BD9B4E019ULL) ^ mix(mix(counter) + 0x8CB92BA72F3D8DD7ULL))) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix(state_);
    }

    static constexpr std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

   private:
    std::uint64_t state_;
};

}  // namespace hjm
