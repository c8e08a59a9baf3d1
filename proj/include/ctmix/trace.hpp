#pragma once

// An execution trace: the ordered sequence of instructions retired within
// the dynamic extent of the target function, each tagged with its class.
// Mnemonic text is interned per trace so events stay small.

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ctmix/classify.hpp"

namespace ctmix {

struct TraceEvent {
    uint32_t index = 0;        // instruction index (or record number for foreign traces)
    uint16_t mnemonic_id = 0;  // into Trace::mnemonics
    InstructionClass cls = InstructionClass::ControlFlow;

    bool operator==(const TraceEvent&) const = default;
};

struct Trace {
    std::vector<TraceEvent> events;
    std::vector<std::string> mnemonics;

    uint16_t intern(std::string_view name) {
        auto it = ids_.find(std::string(name));
        if (it != ids_.end())
            return it->second;
        auto id = static_cast<uint16_t>(mnemonics.size());
        mnemonics.emplace_back(name);
        ids_.emplace(mnemonics.back(), id);
        return id;
    }

    void append(uint32_t index, std::string_view name, InstructionClass cls) {
        events.push_back({index, intern(name), cls});
    }

    std::string_view mnemonic_of(const TraceEvent& e) const {
        return mnemonics[e.mnemonic_id];
    }

    size_t size() const { return events.size(); }
    bool empty() const { return events.empty(); }

    bool operator==(const Trace& other) const {
        return events == other.events && mnemonics == other.mnemonics;
    }

private:
    std::unordered_map<std::string, uint16_t> ids_;
};

} // namespace ctmix
