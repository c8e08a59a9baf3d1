#pragma once

// Instruction-mix analysis. A trace is condensed into a 13-entry count
// vector, one counter per instruction class; two traces are equivalent when
// their vectors are equal, i.e. the L1 distance between them is zero. A
// function observed with unequal vectors for any pair of secret inputs is
// not constant-time; equal vectors over the sampled set are evidence, not
// proof, hence the CONSTANT_TIME_OBSERVED verdict name.

#include <array>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "ctmix/classify.hpp"
#include "ctmix/trace.hpp"

namespace ctmix {

struct MixVector {
    std::array<uint64_t, kClassCount> counts{};

    uint64_t total() const {
        uint64_t sum = 0;
        for (uint64_t c : counts)
            sum += c;
        return sum;
    }

    uint64_t& operator[](InstructionClass c) { return counts[static_cast<size_t>(c)]; }
    uint64_t operator[](InstructionClass c) const { return counts[static_cast<size_t>(c)]; }

    MixVector operator+(const MixVector& other) const {
        MixVector out;
        for (size_t i = 0; i < kClassCount; ++i)
            out.counts[i] = counts[i] + other.counts[i];
        return out;
    }

    bool operator==(const MixVector&) const = default;
};

inline MixVector build_mix(const Trace& trace) {
    MixVector mix;
    for (const TraceEvent& e : trace.events)
        ++mix.counts[static_cast<size_t>(e.cls)];
    return mix;
}

struct MixDiff {
    std::array<int64_t, kClassCount> per_class{};
    uint64_t l1 = 0;
    bool equal = true;
};

inline MixDiff diff(const MixVector& a, const MixVector& b) {
    MixDiff d;
    for (size_t i = 0; i < kClassCount; ++i) {
        d.per_class[i] = static_cast<int64_t>(a.counts[i]) - static_cast<int64_t>(b.counts[i]);
        d.l1 += static_cast<uint64_t>(std::abs(d.per_class[i]));
    }
    d.equal = d.l1 == 0;
    return d;
}

enum class Verdict : uint8_t {
    ConstantTimeObserved,
    NonConstantTime,
    Inconclusive,
};

inline const char* verdict_name(Verdict v) {
    switch (v) {
    case Verdict::ConstantTimeObserved: return "CONSTANT_TIME_OBSERVED";
    case Verdict::NonConstantTime: return "NON_CONSTANT_TIME";
    case Verdict::Inconclusive: return "INCONCLUSIVE";
    }
    return "?";
}

inline std::optional<Verdict> verdict_from_name(std::string_view name) {
    for (Verdict v : {Verdict::ConstantTimeObserved, Verdict::NonConstantTime,
                      Verdict::Inconclusive}) {
        if (name == verdict_name(v))
            return v;
    }
    return std::nullopt;
}

struct LabeledMix {
    uint32_t round = 0;
    MixVector mix;
};

struct ViolatingPair {
    uint32_t first_round = 0;
    uint32_t second_round = 0;
    MixDiff delta; // diff(first, second)
};

struct PairwiseResult {
    Verdict verdict = Verdict::ConstantTimeObserved;
    std::optional<ViolatingPair> violation;
};

// All-pairs equality check, reported against the earliest violating pair in
// lexicographic (i, j) order. Comparing every vector against the first is
// equivalent: if v_i != v_j for some i < j, at least one of them differs
// from v_0, and that pair precedes (i, j).
inline PairwiseResult pairwise_check(std::span<const LabeledMix> vectors) {
    if (vectors.empty())
        throw std::invalid_argument("pairwise_check needs at least one mix vector");
    PairwiseResult res;
    for (size_t j = 1; j < vectors.size(); ++j) {
        MixDiff d = diff(vectors[0].mix, vectors[j].mix);
        if (!d.equal) {
            res.verdict = Verdict::NonConstantTime;
            res.violation = ViolatingPair{vectors[0].round, vectors[j].round, d};
            return res;
        }
    }
    res.verdict = Verdict::ConstantTimeObserved;
    return res;
}

inline PairwiseResult pairwise_check(const std::vector<LabeledMix>& vectors) {
    return pairwise_check(std::span<const LabeledMix>(vectors));
}

} // namespace ctmix
