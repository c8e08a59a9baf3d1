#pragma once

// Instruction classification. Every executed instruction falls into exactly
// one of thirteen classes: memory loads/stores, light ALU (moves, bitwise,
// add/sub, shifts), heavy ALU (multiply, divide, remainder), each split by
// data type (integer / floating-point / vector), plus a single control-flow
// class. The class of an instruction depends only on its mnemonic, never on
// operand values.

#include <array>
#include <cctype>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>

namespace ctmix {

enum class InstructionClass : uint8_t {
    LoadInt,
    LoadFloat,
    LoadVector,
    StoreInt,
    StoreFloat,
    StoreVector,
    LightAluInt,
    LightAluFloat,
    LightAluVector,
    HeavyAluInt,
    HeavyAluFloat,
    HeavyAluVector,
    ControlFlow,
};

inline constexpr size_t kClassCount = 13;

// Short names, also the mix CSV column order.
inline constexpr std::array<const char*, kClassCount> kClassNames = {
    "load_int",      "load_float",      "load_vec",
    "store_int",     "store_float",     "store_vec",
    "alu_light_int", "alu_light_float", "alu_light_vec",
    "alu_heavy_int", "alu_heavy_float", "alu_heavy_vec",
    "control_flow",
};

inline constexpr std::array<const char*, kClassCount> kClassEnumNames = {
    "LoadInt",     "LoadFloat",     "LoadVector",
    "StoreInt",    "StoreFloat",    "StoreVector",
    "LightAluInt", "LightAluFloat", "LightAluVector",
    "HeavyAluInt", "HeavyAluFloat", "HeavyAluVector",
    "ControlFlow",
};

inline const char* class_name(InstructionClass c) {
    return kClassNames[static_cast<size_t>(c)];
}

inline const char* class_enum_name(InstructionClass c) {
    return kClassEnumNames[static_cast<size_t>(c)];
}

// Accepts either naming style, case-insensitively and ignoring underscores,
// e.g. "LoadInt", "loadint", "load_int" all name the same class.
inline std::optional<InstructionClass> class_from_name(std::string_view text) {
    auto fold = [](std::string_view s) {
        std::string out;
        for (char c : s) {
            if (c == '_')
                continue;
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
        return out;
    };
    const std::string needle = fold(text);
    for (size_t i = 0; i < kClassCount; ++i) {
        if (needle == fold(kClassEnumNames[i]) || needle == fold(kClassNames[i]))
            return static_cast<InstructionClass>(i);
    }
    return std::nullopt;
}

// Raised when a trace contains a mnemonic the active map does not cover;
// usually means the trace and the map were produced for different ISAs.
class UnknownMnemonicError : public std::runtime_error {
public:
    explicit UnknownMnemonicError(std::string mnemonic)
        : std::runtime_error("unknown mnemonic: " + mnemonic),
          mnemonic_(std::move(mnemonic)) {}

    const std::string& mnemonic() const { return mnemonic_; }

private:
    std::string mnemonic_;
};

// Total map from mnemonic to class for one architecture.
struct MnemonicMap {
    std::string arch;
    std::unordered_map<std::string, InstructionClass> classes;

    std::optional<InstructionClass> lookup(std::string_view mnemonic) const {
        auto it = classes.find(std::string(mnemonic));
        if (it == classes.end())
            return std::nullopt;
        return it->second;
    }
};

inline InstructionClass classify(std::string_view mnemonic, const MnemonicMap& map) {
    if (auto c = map.lookup(mnemonic))
        return *c;
    throw UnknownMnemonicError(std::string(mnemonic));
}

// Classification for the built-in mini ISA. Covers every mnemonic the
// assembler accepts; register moves and immediate loads are light ALU of
// their data type, not memory traffic.
inline const MnemonicMap& builtin_map() {
    static const MnemonicMap map = [] {
        MnemonicMap m;
        m.arch = "mini-isa/1";
        auto put = [&m](std::initializer_list<const char*> names, InstructionClass c) {
            for (const char* n : names)
                m.classes.emplace(n, c);
        };
        put({"li", "mov", "add", "sub", "and", "or", "xor", "not", "shl", "shr", "slt"},
            InstructionClass::LightAluInt);
        put({"mul", "div", "rem"}, InstructionClass::HeavyAluInt);
        put({"fli", "fmov", "fadd", "fsub", "fneg"}, InstructionClass::LightAluFloat);
        put({"fmul", "fdiv"}, InstructionClass::HeavyAluFloat);
        put({"vli", "vmov", "vadd", "vsub", "vand", "vor", "vxor"},
            InstructionClass::LightAluVector);
        put({"vmul"}, InstructionClass::HeavyAluVector);
        put({"ld"}, InstructionClass::LoadInt);
        put({"fld"}, InstructionClass::LoadFloat);
        put({"vld"}, InstructionClass::LoadVector);
        put({"st"}, InstructionClass::StoreInt);
        put({"fst"}, InstructionClass::StoreFloat);
        put({"vst"}, InstructionClass::StoreVector);
        put({"jmp", "beq", "bne", "blt", "call", "ret", "halt"}, InstructionClass::ControlFlow);
        return m;
    }();
    return map;
}

} // namespace ctmix
