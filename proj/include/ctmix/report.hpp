#pragma once

// Report rendering: a human-readable text document and a JSON document with
// the same content. Field order is fixed so identical reports render to
// identical bytes.

#include <cstdio>
#include <sstream>
#include <string>

#include "json.hpp"

#include "ctmix/harness.hpp"

namespace ctmix {

using ordered_json = nlohmann::ordered_json;

inline ordered_json report_to_json(const VerificationReport& rep) {
    ordered_json j;
    j["tool"] = std::string(kToolName) + " " + kToolVersion;
    j["verdict"] = verdict_name(rep.verdict);
    j["mode"] = rep.mode;
    j["target"] = rep.target_label;
    j["trace_callees"] = rep.trace_callees;
    j["isa_version"] = rep.isa_version;
    j["map_arch"] = rep.map_arch;
    j["seed"] = rep.seed;
    j["rounds_requested"] = rep.rounds_requested;
    j["rounds_completed"] = rep.rounds.size();
    j["secret_length"] = rep.secret_length;
    j["exhaustive"] = rep.exhaustive;

    ordered_json rounds = ordered_json::array();
    for (const RoundResult& r : rep.rounds) {
        ordered_json row;
        row["round"] = r.round;
        row["secret"] = to_hex(r.secret);
        row["status"] = exec_status_name(r.status);
        row["executed_total"] = r.executed_total;
        if (r.status == ExecStatus::Halted) {
            row["traced_total"] = r.traced_total();
            ordered_json mix;
            for (size_t i = 0; i < kClassCount; ++i)
                mix[kClassNames[i]] = r.mix.counts[i];
            row["mix"] = mix;
        } else {
            row["error"] = r.error;
        }
        rounds.push_back(std::move(row));
    }
    j["rounds"] = std::move(rounds);

    if (rep.violation) {
        ordered_json v;
        v["first_round"] = rep.violation->first_round;
        v["second_round"] = rep.violation->second_round;
        v["l1"] = rep.violation->delta.l1;
        ordered_json per_class;
        for (size_t i = 0; i < kClassCount; ++i)
            per_class[kClassNames[i]] = rep.violation->delta.per_class[i];
        v["per_class"] = std::move(per_class);
        j["violation"] = std::move(v);
    } else {
        j["violation"] = nullptr;
    }
    return j;
}

inline std::string render_json(const VerificationReport& rep) {
    return report_to_json(rep).dump(2) + "\n";
}

inline std::string render_text(const VerificationReport& rep) {
    std::ostringstream os;
    os << "constant-time verification report\n";
    os << "tool:           " << kToolName << " " << kToolVersion << "\n";
    os << "mode:           " << rep.mode << "\n";
    os << "target:         " << rep.target_label
       << (rep.trace_callees ? " (callees traced)" : " (callees excluded)") << "\n";
    os << "isa:            " << rep.isa_version << "\n";
    os << "map:            " << rep.map_arch << "\n";
    if (rep.mode == "fuzz")
        os << "seed:           " << rep.seed << "\n";
    os << "rounds:         " << rep.rounds.size() << " completed of " << rep.rounds_requested
       << " requested\n";
    os << "secret length:  " << rep.secret_length << " bytes\n";
    os << "verdict:        " << verdict_name(rep.verdict) << "\n";
    os << "\n";
    os << "round  status            traced  executed  secret\n";
    for (const RoundResult& r : rep.rounds) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%-5u  %-16s  %-6llu  %-8llu  ", r.round,
                      exec_status_name(r.status),
                      static_cast<unsigned long long>(r.traced_total()),
                      static_cast<unsigned long long>(r.executed_total));
        os << buf << to_hex(r.secret) << "\n";
        if (r.status != ExecStatus::Halted)
            os << "       ^ " << r.error << "\n";
    }

    if (rep.violation) {
        const ViolatingPair& v = *rep.violation;
        const RoundResult* a = nullptr;
        const RoundResult* b = nullptr;
        for (const RoundResult& r : rep.rounds) {
            if (r.round == v.first_round)
                a = &r;
            if (r.round == v.second_round)
                b = &r;
        }
        os << "\nviolating pair: round " << v.first_round << " vs round " << v.second_round
           << " (l1 distance " << v.delta.l1 << ")\n";
        os << "class            round " << v.first_round << "  round " << v.second_round
           << "  diff\n";
        for (size_t i = 0; i < kClassCount; ++i) {
            char buf[128];
            std::snprintf(buf, sizeof buf, "%-15s  %-7llu  %-7llu  %+lld\n", kClassNames[i],
                          static_cast<unsigned long long>(a ? a->mix.counts[i] : 0),
                          static_cast<unsigned long long>(b ? b->mix.counts[i] : 0),
                          static_cast<long long>(v.delta.per_class[i]));
            os << buf;
        }
    }
    return os.str();
}

} // namespace ctmix
