#pragma once

// Havoc-style secret generator. Round 0 replays the base secret; every
// later round applies a stack of 1..16 random length-preserving mutations
// (bit flips, random bytes, add/sub, swaps, block copies, interesting
// constants). All randomness comes from splitmix64, and each round derives
// its own stream from (seed XOR round), so the sequence is a pure function
// of the config and rounds can run in any order.

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <utility>

#include "ctmix/bytes.hpp"

namespace ctmix {

inline constexpr uint64_t kDefaultSeed = 1;
inline constexpr uint32_t kDefaultRoundsCt = 100; // confidence runs
inline constexpr uint32_t kDefaultRoundsQuick = 5;

// splitmix64 step: advance the state by the golden-gamma and scramble.
inline uint64_t splitmix64(uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

struct PrngState {
    uint64_t state = 0;

    uint64_t next() { return splitmix64(state); }

    // uniform-ish in [0, n); modulo bias is irrelevant for fuzzing
    uint64_t below(uint64_t n) { return next() % n; }
};

struct FuzzConfig {
    uint64_t seed = kDefaultSeed;
    uint32_t rounds = kDefaultRoundsCt;
    uint64_t secret_length = 0;
    Bytes base_secret;
    uint32_t mutations_min = 1; // set both to 0 to replay the base secret every round
    uint32_t mutations_max = 16;
};

inline PrngState round_prng(uint64_t seed, uint32_t round) {
    uint64_t s = seed ^ static_cast<uint64_t>(round);
    return PrngState{splitmix64(s)};
}

inline Bytes next_secret(const FuzzConfig& cfg, uint32_t round) {
    if (cfg.base_secret.size() != cfg.secret_length)
        throw std::invalid_argument("base secret length does not match secret_length");
    if (cfg.secret_length == 0)
        throw std::invalid_argument("secret_length must be positive");
    if (round >= cfg.rounds)
        throw std::invalid_argument("round index past configured rounds");

    Bytes out = cfg.base_secret;
    if (round == 0)
        return out;

    PrngState prng = round_prng(cfg.seed, round);
    const uint64_t len = out.size();
    uint32_t k = cfg.mutations_min;
    if (cfg.mutations_max > cfg.mutations_min)
        k += static_cast<uint32_t>(prng.below(cfg.mutations_max - cfg.mutations_min + 1));

    static constexpr uint8_t kInteresting[] = {0x00, 0x01, 0x7F, 0x80, 0xFF};
    for (uint32_t m = 0; m < k; ++m) {
        switch (prng.below(6)) {
        case 0: { // single-bit flip
            uint64_t pos = prng.below(len);
            out[pos] ^= static_cast<uint8_t>(1u << prng.below(8));
            break;
        }
        case 1: { // byte set to a random value
            uint64_t pos = prng.below(len);
            out[pos] = static_cast<uint8_t>(prng.next() & 0xff);
            break;
        }
        case 2: { // byte add/sub in [1, 35], wrapping
            uint64_t pos = prng.below(len);
            uint8_t delta = static_cast<uint8_t>(1 + prng.below(35));
            out[pos] = prng.below(2) ? static_cast<uint8_t>(out[pos] + delta)
                                     : static_cast<uint8_t>(out[pos] - delta);
            break;
        }
        case 3: { // two-byte swap
            uint64_t a = prng.below(len);
            uint64_t b = prng.below(len);
            std::swap(out[a], out[b]);
            break;
        }
        case 4: { // block overwrite with a copy of another in-buffer block
            uint64_t max_len = len / 4;
            if (max_len == 0)
                break;
            uint64_t blen = 1 + prng.below(max_len);
            uint64_t src = prng.below(len - blen + 1);
            uint64_t dst = prng.below(len - blen + 1);
            Bytes block(out.begin() + src, out.begin() + src + blen);
            std::copy(block.begin(), block.end(), out.begin() + dst);
            break;
        }
        default: { // interesting constant
            uint64_t pos = prng.below(len);
            out[pos] = kInteresting[prng.below(5)];
            break;
        }
        }
    }
    return out;
}

} // namespace ctmix
