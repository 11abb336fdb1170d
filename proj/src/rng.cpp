#include "zhang/rng.hpp"

#include <array>
#include <stdexcept>

namespace zhang {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    std::array<std::uint32_t, 8> words{};
    for (std::size_t i = 0; i < words.size(); i += 2) {
        std::uint64_t v = splitmix64(s);
        words[i] = static_cast<std::uint32_t>(v);
        words[i + 1] = static_cast<std::uint32_t>(v >> 32);
    }
    std::seed_seq seq(words.begin(), words.end());
    engine_.seed(seq);
}

std::uint64_t Rng::index(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("index range must be positive");
    // Rejection on the top of the range keeps the draw unbiased.
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t v;
    do {
        v = engine_();
    } while (v >= limit);
    return v % n;
}

Rng Rng::split() { return Rng(mix_seed(engine_(), engine_())); }

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed ^ (stream * 0xd1b54a32d192ed03ULL);
    splitmix64(s);
    return splitmix64(s);
}

}  // namespace zhang
