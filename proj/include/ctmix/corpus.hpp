#pragma once

// Benchmark corpus: assembly programs with declared secret manifests, fixed
// public inputs, and expected verdicts. The manifest file is INI-style:
//
//   [benchmark_name]
//   file = password_nct.asm
//   target = password_checker
//   secret = mem:1024:6        ; or regs:2,3 width:8
//   width = 1
//   base_secret = 736563726574
//   public_mem = 768:00010203  ; repeatable
//   public_reg = 5:42          ; repeatable
//   expect = NON_CONSTANT_TIME
//   note = free text

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctmix/assembler.hpp"
#include "ctmix/bytes.hpp"
#include "ctmix/harness.hpp"
#include "ctmix/ingest.hpp"

namespace ctmix {

class CorpusError : public std::runtime_error {
public:
    explicit CorpusError(const std::string& message) : std::runtime_error(message) {}
};

struct Benchmark {
    std::string name;
    std::string file;   // relative to the corpus directory
    std::string target;
    SecretManifest secret;
    Bytes base_secret;
    std::vector<MemWrite> public_mem;
    std::vector<RegWrite> public_regs;
    Verdict expected = Verdict::ConstantTimeObserved;
    std::string note;
};

namespace detail {

inline std::string_view corpus_trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
        ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
        --e;
    return s.substr(b, e - b);
}

inline uint64_t corpus_u64(std::string_view tok, uint32_t line, const std::string& what) {
    uint64_t v = 0;
    if (!parse_u64(tok, v))
        throw CorpusError("manifest line " + std::to_string(line) + ": bad " + what + " '" +
                          std::string(tok) + "'");
    return v;
}

} // namespace detail

inline std::vector<Benchmark> load_corpus(const std::filesystem::path& dir) {
    const std::filesystem::path manifest_path = dir / "manifest.txt";
    std::ifstream in(manifest_path);
    if (!in)
        throw CorpusError("cannot open corpus manifest " + manifest_path.string());

    std::vector<Benchmark> out;
    Benchmark* cur = nullptr;
    std::string line;
    uint32_t lineno = 0;

    auto finish_entry = [&](const Benchmark& b) {
        if (b.file.empty() || b.target.empty())
            throw CorpusError("benchmark '" + b.name + "' is missing file/target");
        if (b.secret.byte_length() == 0)
            throw CorpusError("benchmark '" + b.name + "' has no secret manifest");
        if (b.base_secret.size() != b.secret.byte_length())
            throw CorpusError("benchmark '" + b.name + "' base secret length mismatch");
        if (b.expected == Verdict::Inconclusive)
            throw CorpusError("benchmark '" + b.name + "' expected verdict must be CT or NCT");
    };

    while (std::getline(in, line)) {
        ++lineno;
        std::string_view body = detail::corpus_trim(line);
        if (body.empty() || body[0] == '#' || body[0] == ';')
            continue;
        if (body.front() == '[') {
            if (body.back() != ']')
                throw CorpusError("manifest line " + std::to_string(lineno) + ": bad section");
            if (cur)
                finish_entry(*cur);
            out.emplace_back();
            cur = &out.back();
            cur->name = std::string(detail::corpus_trim(body.substr(1, body.size() - 2)));
            if (cur->name.empty())
                throw CorpusError("manifest line " + std::to_string(lineno) + ": empty name");
            continue;
        }
        if (!cur)
            throw CorpusError("manifest line " + std::to_string(lineno) +
                              ": key outside a [section]");
        size_t eq = body.find('=');
        if (eq == std::string_view::npos)
            throw CorpusError("manifest line " + std::to_string(lineno) + ": expected key = value");
        std::string key(detail::corpus_trim(body.substr(0, eq)));
        std::string value(detail::corpus_trim(body.substr(eq + 1)));

        if (key == "file") {
            cur->file = value;
        } else if (key == "target") {
            cur->target = value;
        } else if (key == "secret") {
            // mem:<addr>:<len> or regs:<id>[,<id>...]
            if (value.rfind("mem:", 0) == 0) {
                std::string rest = value.substr(4);
                size_t colon = rest.find(':');
                if (colon == std::string::npos)
                    throw CorpusError("manifest line " + std::to_string(lineno) +
                                      ": secret mem wants mem:<addr>:<len>");
                uint64_t addr = detail::corpus_u64(rest.substr(0, colon), lineno, "address");
                uint64_t len = detail::corpus_u64(rest.substr(colon + 1), lineno, "length");
                uint32_t width = cur->secret.width;
                cur->secret = SecretManifest::memory_region(addr, len, width);
            } else if (value.rfind("regs:", 0) == 0) {
                std::vector<uint8_t> regs;
                std::stringstream ss(value.substr(5));
                std::string tok;
                while (std::getline(ss, tok, ','))
                    regs.push_back(static_cast<uint8_t>(
                        detail::corpus_u64(detail::corpus_trim(tok), lineno, "register")));
                uint32_t width = cur->secret.width == 1 ? 8 : cur->secret.width;
                cur->secret = SecretManifest::registers(std::move(regs), width);
            } else {
                throw CorpusError("manifest line " + std::to_string(lineno) +
                                  ": secret must be mem:... or regs:...");
            }
        } else if (key == "width") {
            cur->secret.width =
                static_cast<uint32_t>(detail::corpus_u64(value, lineno, "width"));
        } else if (key == "base_secret") {
            auto bytes = from_hex(value);
            if (!bytes)
                throw CorpusError("manifest line " + std::to_string(lineno) + ": bad hex");
            cur->base_secret = std::move(*bytes);
        } else if (key == "public_mem") {
            size_t colon = value.find(':');
            if (colon == std::string::npos)
                throw CorpusError("manifest line " + std::to_string(lineno) +
                                  ": public_mem wants <addr>:<hex>");
            uint64_t addr = detail::corpus_u64(value.substr(0, colon), lineno, "address");
            auto bytes = from_hex(value.substr(colon + 1));
            if (!bytes)
                throw CorpusError("manifest line " + std::to_string(lineno) + ": bad hex");
            cur->public_mem.push_back({addr, std::move(*bytes)});
        } else if (key == "public_reg") {
            size_t colon = value.find(':');
            if (colon == std::string::npos)
                throw CorpusError("manifest line " + std::to_string(lineno) +
                                  ": public_reg wants <reg>:<value>");
            uint8_t reg = static_cast<uint8_t>(
                detail::corpus_u64(value.substr(0, colon), lineno, "register"));
            uint64_t v = detail::corpus_u64(value.substr(colon + 1), lineno, "value");
            cur->public_regs.push_back({reg, v});
        } else if (key == "expect") {
            auto v = verdict_from_name(value);
            if (!v)
                throw CorpusError("manifest line " + std::to_string(lineno) +
                                  ": unknown verdict '" + value + "'");
            cur->expected = *v;
        } else if (key == "note") {
            cur->note = value;
        } else {
            throw CorpusError("manifest line " + std::to_string(lineno) + ": unknown key '" +
                              key + "'");
        }
    }
    if (cur)
        finish_entry(*cur);
    if (out.empty())
        throw CorpusError("corpus manifest lists no benchmarks");
    return out;
}

inline Program load_benchmark_program(const std::filesystem::path& dir, const Benchmark& b) {
    const std::filesystem::path path = dir / b.file;
    std::ifstream in(path);
    if (!in)
        throw CorpusError("cannot open benchmark source " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return assemble(ss.str());
}

inline VerifyJob benchmark_job(const std::filesystem::path& dir, const Benchmark& b,
                               uint64_t seed, uint32_t rounds) {
    VerifyJob job;
    job.program = load_benchmark_program(dir, b);
    job.target = TargetSpec{b.target, true};
    job.binding.secret = b.secret;
    job.binding.public_mem = b.public_mem;
    job.binding.public_regs = b.public_regs;
    job.fuzz.seed = seed;
    job.fuzz.rounds = rounds;
    job.fuzz.secret_length = b.secret.byte_length();
    job.fuzz.base_secret = b.base_secret;
    return job;
}

// Runs one benchmark with the usual round policy: quick runs for expected
// violations, confidence runs for expected constant-time behaviour.
inline VerificationReport run_benchmark(const std::filesystem::path& dir, const Benchmark& b,
                                        uint64_t seed = kDefaultSeed,
                                        uint32_t rounds_ct = kDefaultRoundsCt,
                                        uint32_t rounds_nct = kDefaultRoundsQuick) {
    uint32_t rounds = b.expected == Verdict::NonConstantTime ? rounds_nct : rounds_ct;
    return verify(benchmark_job(dir, b, seed, rounds));
}

} // namespace ctmix
