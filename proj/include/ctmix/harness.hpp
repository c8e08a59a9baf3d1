#pragma once

// Verification driver. One run executes the target once per sampled secret,
// condenses each trace into a mix vector, and compares all vectors pairwise.
// Any unequal pair is a counterexample and yields NON_CONSTANT_TIME; a round
// that faults (budget, memory, divide) proves nothing about the remaining
// secret space, so a run with errors and no counterexample is INCONCLUSIVE.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctmix/bytes.hpp"
#include "ctmix/fuzz.hpp"
#include "ctmix/mix.hpp"
#include "ctmix/vm.hpp"

namespace ctmix {

inline constexpr const char* kToolName = "ctmix";
inline constexpr const char* kToolVersion = "0.1.0";

struct VerifyJob {
    Program program;
    TargetSpec target;
    InputBinding binding; // public inputs fixed for the whole run
    FuzzConfig fuzz;
    uint64_t budget = kDefaultBudget;
    uint64_t memory_size = kDefaultMemorySize;
    bool exhaustive = false; // keep running after the first violation
};

struct RoundResult {
    uint32_t round = 0;
    Bytes secret;
    ExecStatus status = ExecStatus::Halted;
    MixVector mix;               // meaningful when status == Halted
    uint64_t executed_total = 0; // all retired instructions, traced or not
    std::string error;           // fault detail when status != Halted

    uint64_t traced_total() const { return mix.total(); }
};

struct VerificationReport {
    Verdict verdict = Verdict::ConstantTimeObserved;
    std::vector<RoundResult> rounds;
    std::optional<ViolatingPair> violation;

    // config echo
    std::string mode;         // "fuzz" or "directed"
    std::string target_label;
    bool trace_callees = true;
    uint64_t seed = 0;        // fuzz mode only
    uint32_t rounds_requested = 0;
    uint64_t secret_length = 0;
    std::string isa_version;
    std::string map_arch;
    bool exhaustive = false;
};

namespace detail {

inline VerificationReport run_rounds(const VerifyJob& job,
                                     const std::vector<Bytes>& secrets,
                                     std::string mode, uint64_t seed) {
    VerificationReport rep;
    rep.mode = std::move(mode);
    rep.target_label = job.target.function_label;
    rep.trace_callees = job.target.trace_callees;
    rep.seed = seed;
    rep.rounds_requested = static_cast<uint32_t>(secrets.size());
    rep.secret_length = job.binding.secret.byte_length();
    rep.isa_version = kIsaVersion;
    rep.map_arch = builtin_map().arch;
    rep.exhaustive = job.exhaustive;

    const MachineState base = make_initial_state(job.program, job.binding, job.memory_size);
    std::vector<LabeledMix> clean;
    bool any_error = false;

    for (uint32_t r = 0; r < secrets.size(); ++r) {
        const Bytes& secret = secrets[r];
        if (secret.size() != job.binding.secret.byte_length())
            throw std::invalid_argument("secret for round " + std::to_string(r) +
                                        " does not match the manifest length");
        MachineState st = base;
        inject_secret(st, job.binding.secret, secret);
        ExecResult res = execute(job.program, std::move(st), job.target, job.budget);

        RoundResult round;
        round.round = r;
        round.secret = secret;
        round.status = res.status;
        round.executed_total = res.steps;
        if (res.status == ExecStatus::Halted) {
            round.mix = build_mix(res.trace);
            clean.push_back({r, round.mix});
        } else {
            round.error = res.fault_detail;
            any_error = true;
        }
        rep.rounds.push_back(std::move(round));

        if (!job.exhaustive && clean.size() >= 2 && !(clean.back().mix == clean.front().mix))
            break; // counterexample found, no need to keep sampling
    }

    if (!clean.empty()) {
        PairwiseResult check = pairwise_check(clean);
        if (check.verdict == Verdict::NonConstantTime) {
            rep.verdict = Verdict::NonConstantTime;
            rep.violation = check.violation;
            return rep;
        }
    }
    rep.verdict = any_error ? Verdict::Inconclusive : Verdict::ConstantTimeObserved;
    return rep;
}

} // namespace detail

// Fuzzing run: secrets come from the havoc generator, round 0 being the
// base secret. Deterministic given the job; reports are byte-reproducible.
inline VerificationReport verify(const VerifyJob& job) {
    if (job.fuzz.rounds < 2)
        throw std::invalid_argument("verification needs at least two rounds");
    if (job.fuzz.secret_length != job.binding.secret.byte_length())
        throw std::invalid_argument("fuzz secret_length does not match the manifest");
    std::vector<Bytes> secrets;
    secrets.reserve(job.fuzz.rounds);
    for (uint32_t r = 0; r < job.fuzz.rounds; ++r)
        secrets.push_back(next_secret(job.fuzz, r));
    return detail::run_rounds(job, secrets, "fuzz", job.fuzz.seed);
}

// Directed run over an explicit secret list (case-study inputs).
inline VerificationReport verify_directed(const VerifyJob& job,
                                          const std::vector<Bytes>& secrets) {
    if (secrets.empty())
        throw std::invalid_argument("directed verification needs at least one secret");
    return detail::run_rounds(job, secrets, "directed", 0);
}

} // namespace ctmix
