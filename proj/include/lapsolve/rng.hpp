#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace lapsolve {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Named streams: derive(seed, "richardson", level, iter) never collides with
// derive(seed, "sample", level, iter), so recursive calls share no randomness.
class SeedSplitter {
public:
    explicit SeedSplitter(std::uint64_t master) : master_(master) {}

    std::uint64_t master() const { return master_; }

    template <typename... Ints>
    std::uint64_t derive(std::string_view purpose, Ints... ids) const {
        std::uint64_t h = splitmix64(master_ ^ 0x5bd1e995ULL);
        for (unsigned char c : purpose) h = splitmix64(h ^ c);
        ((h = splitmix64(h ^ static_cast<std::uint64_t>(ids))), ...);
        return h;
    }

    template <typename... Ints>
    Rng stream(std::string_view purpose, Ints... ids) const {
        return Rng(derive(purpose, ids...));
    }

    template <typename... Ints>
    SeedSplitter child(std::string_view purpose, Ints... ids) const {
        return SeedSplitter(derive(purpose, ids...));
    }

private:
    std::uint64_t master_;
};

inline double uniform01(Rng& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace lapsolve
