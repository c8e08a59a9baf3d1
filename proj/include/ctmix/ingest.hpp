#pragma once

// Ingest for externally produced artifacts: raw instruction-trace logs
// (classified through a user-supplied mnemonic map) and pre-counted mix
// CSVs. This lets the analysis side run on traces from any tracer that can
// dump `index mnemonic` lines, and replays published count tables.
//
// Trace log format, line oriented:
//   # arch: <tag>          optional header; other # lines are comments
//   <index> <mnemonic>     indices start at 0 and strictly increase
//
// Mix CSV format: the exact header below, then one row per round with a
// round label and 13 non-negative counters.

#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctmix/classify.hpp"
#include "ctmix/mix.hpp"
#include "ctmix/trace.hpp"

namespace ctmix {

inline constexpr const char* kMixCsvHeader =
    "round,load_int,load_float,load_vec,store_int,store_float,store_vec,"
    "alu_light_int,alu_light_float,alu_light_vec,alu_heavy_int,alu_heavy_float,"
    "alu_heavy_vec,control_flow";

class IngestError : public std::runtime_error {
public:
    IngestError(uint32_t line, const std::string& message)
        : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

    uint32_t line() const { return line_; }

private:
    uint32_t line_;
};

namespace detail {

inline std::string_view trim_ws(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r'))
        ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r'))
        --e;
    return s.substr(b, e - b);
}

inline bool parse_u64(std::string_view tok, uint64_t& out) {
    if (tok.empty())
        return false;
    uint64_t v = 0;
    for (char c : tok) {
        if (c < '0' || c > '9')
            return false;
        uint64_t digit = static_cast<uint64_t>(c - '0');
        if (v > (UINT64_MAX - digit) / 10)
            return false;
        v = v * 10 + digit;
    }
    out = v;
    return true;
}

} // namespace detail

struct ForeignTrace {
    Trace trace;
    std::string arch; // from the optional `# arch:` header
};

inline ForeignTrace parse_trace(std::istream& in, const MnemonicMap& map) {
    ForeignTrace out;
    std::string line;
    uint32_t lineno = 0;
    bool have_record = false;
    uint64_t last_index = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view body = detail::trim_ws(line);
        if (body.empty())
            continue;
        if (body[0] == '#') {
            std::string_view rest = detail::trim_ws(body.substr(1));
            constexpr std::string_view kArch = "arch:";
            if (rest.substr(0, kArch.size()) == kArch && out.arch.empty())
                out.arch = std::string(detail::trim_ws(rest.substr(kArch.size())));
            continue;
        }
        size_t sp = body.find_first_of(" \t");
        if (sp == std::string_view::npos)
            throw IngestError(lineno, "expected '<index> <mnemonic>', got '" +
                                          std::string(body) + "'");
        std::string_view index_tok = body.substr(0, sp);
        std::string_view mnemonic_tok = detail::trim_ws(body.substr(sp + 1));
        uint64_t index = 0;
        if (!detail::parse_u64(index_tok, index))
            throw IngestError(lineno, "bad index '" + std::string(index_tok) + "'");
        if (mnemonic_tok.empty() || mnemonic_tok.find_first_of(" \t") != std::string_view::npos)
            throw IngestError(lineno, "bad mnemonic token");
        if (!have_record && index != 0)
            throw IngestError(lineno, "trace indices must start at 0");
        if (have_record && index <= last_index)
            throw IngestError(lineno, "non-monotonic index " + std::to_string(index));
        auto cls = map.lookup(mnemonic_tok);
        if (!cls)
            throw IngestError(lineno, "unknown mnemonic '" + std::string(mnemonic_tok) +
                                          "' (not in map for arch '" + map.arch + "')");
        out.trace.append(static_cast<uint32_t>(index), mnemonic_tok, *cls);
        have_record = true;
        last_index = index;
    }
    return out;
}

inline void write_trace(std::ostream& os, const Trace& trace, std::string_view arch) {
    os << "# arch: " << arch << "\n";
    uint64_t index = 0;
    for (const TraceEvent& e : trace.events)
        os << index++ << ' ' << trace.mnemonic_of(e) << "\n";
}

// `mnemonic<TAB>class` per line, # comments; class names are matched
// case-insensitively. An optional `# arch: <tag>` names the architecture.
inline MnemonicMap parse_mnemonic_map(std::istream& in) {
    MnemonicMap map;
    map.arch = "unknown";
    std::string line;
    uint32_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view body = detail::trim_ws(line);
        if (body.empty())
            continue;
        if (body[0] == '#') {
            std::string_view rest = detail::trim_ws(body.substr(1));
            constexpr std::string_view kArch = "arch:";
            if (rest.substr(0, kArch.size()) == kArch)
                map.arch = std::string(detail::trim_ws(rest.substr(kArch.size())));
            continue;
        }
        size_t tab = body.find('\t');
        if (tab == std::string_view::npos)
            throw IngestError(lineno, "expected 'mnemonic<TAB>class'");
        std::string_view mnemonic_tok = detail::trim_ws(body.substr(0, tab));
        std::string_view class_tok = detail::trim_ws(body.substr(tab + 1));
        if (mnemonic_tok.empty())
            throw IngestError(lineno, "empty mnemonic");
        auto cls = class_from_name(class_tok);
        if (!cls)
            throw IngestError(lineno, "unknown class name '" + std::string(class_tok) + "'");
        if (!map.classes.emplace(std::string(mnemonic_tok), *cls).second)
            throw IngestError(lineno, "mnemonic '" + std::string(mnemonic_tok) +
                                          "' mapped twice");
    }
    return map;
}

inline std::vector<LabeledMix> parse_mix_csv(std::istream& in) {
    std::string line;
    uint32_t lineno = 0;
    if (!std::getline(in, line))
        throw IngestError(1, "empty file, expected the mix CSV header");
    ++lineno;
    if (detail::trim_ws(line) != kMixCsvHeader)
        throw IngestError(1, std::string("header mismatch, expected '") + kMixCsvHeader + "'");

    std::vector<LabeledMix> rows;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view body = detail::trim_ws(line);
        if (body.empty())
            continue;
        LabeledMix row;
        size_t field = 0;
        size_t start = 0;
        std::string text(body);
        for (size_t i = 0; i <= text.size(); ++i) {
            if (i != text.size() && text[i] != ',')
                continue;
            std::string_view tok = detail::trim_ws(std::string_view(text).substr(start, i - start));
            uint64_t v = 0;
            if (!detail::parse_u64(tok, v))
                throw IngestError(lineno, "bad integer '" + std::string(tok) + "' in column " +
                                              std::to_string(field + 1));
            if (field == 0)
                row.round = static_cast<uint32_t>(v);
            else if (field <= kClassCount)
                row.mix.counts[field - 1] = v;
            else
                throw IngestError(lineno, "too many columns");
            ++field;
            start = i + 1;
        }
        if (field != kClassCount + 1)
            throw IngestError(lineno, "expected " + std::to_string(kClassCount + 1) +
                                          " columns, got " + std::to_string(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline void write_mix_csv(std::ostream& os, const std::vector<LabeledMix>& rows) {
    os << kMixCsvHeader << "\n";
    for (const LabeledMix& row : rows) {
        os << row.round;
        for (uint64_t c : row.mix.counts)
            os << ',' << c;
        os << "\n";
    }
}

// File wrappers; IngestError line numbers refer to the named file.
inline std::ifstream open_input(const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw std::runtime_error("cannot open " + path);
    return f;
}

inline ForeignTrace parse_trace_file(const std::string& path, const MnemonicMap& map) {
    std::ifstream f = open_input(path);
    return parse_trace(f, map);
}

inline MnemonicMap parse_mnemonic_map_file(const std::string& path) {
    std::ifstream f = open_input(path);
    return parse_mnemonic_map(f);
}

inline std::vector<LabeledMix> parse_mix_csv_file(const std::string& path) {
    std::ifstream f = open_input(path);
    return parse_mix_csv(f);
}

} // namespace ctmix
