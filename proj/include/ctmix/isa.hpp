#pragma once

// The mini ISA: a small register machine with 64-bit integer, double and
// 4-lane vector registers. Programs are lists of decoded instructions;
// branch targets are instruction indices resolved at assembly time.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ctmix/classify.hpp"

namespace ctmix {

inline constexpr const char* kIsaVersion = "mini-isa/1";

enum class Opcode : uint8_t {
    // integer light ALU
    Li, Mov, Add, Sub, And, Or, Xor, Not, Shl, Shr, Slt,
    // integer heavy ALU
    Mul, Div, Rem,
    // float light ALU
    Fli, Fmov, Fadd, Fsub, Fneg,
    // float heavy ALU
    Fmul, Fdiv,
    // vector light ALU
    Vli, Vmov, Vadd, Vsub, Vand, Vor, Vxor,
    // vector heavy ALU
    Vmul,
    // memory
    Ld, St, Fld, Fst, Vld, Vst,
    // control flow
    Jmp, Beq, Bne, Blt, Call, Ret, Halt,
};

inline constexpr size_t kOpcodeCount = 42;

inline constexpr std::array<const char*, kOpcodeCount> kMnemonics = {
    "li",  "mov",  "add",  "sub",  "and",  "or",   "xor",  "not", "shl", "shr", "slt",
    "mul", "div",  "rem",
    "fli", "fmov", "fadd", "fsub", "fneg",
    "fmul", "fdiv",
    "vli", "vmov", "vadd", "vsub", "vand", "vor",  "vxor",
    "vmul",
    "ld",  "st",   "fld",  "fst",  "vld",  "vst",
    "jmp", "beq",  "bne",  "blt",  "call", "ret",  "halt",
};

inline const char* mnemonic(Opcode op) {
    return kMnemonics[static_cast<size_t>(op)];
}

inline std::optional<Opcode> opcode_from_mnemonic(std::string_view name) {
    for (size_t i = 0; i < kOpcodeCount; ++i) {
        if (name == kMnemonics[i])
            return static_cast<Opcode>(i);
    }
    return std::nullopt;
}

// Class of a decoded instruction. Total by construction and independent of
// operands; agrees with builtin_map() on every mnemonic.
inline InstructionClass class_of(Opcode op) {
    switch (op) {
    case Opcode::Li: case Opcode::Mov: case Opcode::Add: case Opcode::Sub:
    case Opcode::And: case Opcode::Or: case Opcode::Xor: case Opcode::Not:
    case Opcode::Shl: case Opcode::Shr: case Opcode::Slt:
        return InstructionClass::LightAluInt;
    case Opcode::Mul: case Opcode::Div: case Opcode::Rem:
        return InstructionClass::HeavyAluInt;
    case Opcode::Fli: case Opcode::Fmov: case Opcode::Fadd: case Opcode::Fsub:
    case Opcode::Fneg:
        return InstructionClass::LightAluFloat;
    case Opcode::Fmul: case Opcode::Fdiv:
        return InstructionClass::HeavyAluFloat;
    case Opcode::Vli: case Opcode::Vmov: case Opcode::Vadd: case Opcode::Vsub:
    case Opcode::Vand: case Opcode::Vor: case Opcode::Vxor:
        return InstructionClass::LightAluVector;
    case Opcode::Vmul:
        return InstructionClass::HeavyAluVector;
    case Opcode::Ld:
        return InstructionClass::LoadInt;
    case Opcode::Fld:
        return InstructionClass::LoadFloat;
    case Opcode::Vld:
        return InstructionClass::LoadVector;
    case Opcode::St:
        return InstructionClass::StoreInt;
    case Opcode::Fst:
        return InstructionClass::StoreFloat;
    case Opcode::Vst:
        return InstructionClass::StoreVector;
    case Opcode::Jmp: case Opcode::Beq: case Opcode::Bne: case Opcode::Blt:
    case Opcode::Call: case Opcode::Ret: case Opcode::Halt:
        return InstructionClass::ControlFlow;
    }
    return InstructionClass::ControlFlow; // unreachable
}

enum class OperandKind : uint8_t {
    IntReg,
    FloatReg,
    VecReg,
    Imm,      // 64-bit integer immediate (data labels fold to their address)
    FloatImm,
    Mem,      // [rN+imm]: base register plus signed offset
    Label,    // resolved to an instruction index at assembly time
};

struct Operand {
    OperandKind kind = OperandKind::Imm;
    uint8_t reg = 0;     // register id, or memory base register
    int64_t imm = 0;     // immediate value, memory offset, or label target index
    double fimm = 0.0;

    bool operator==(const Operand&) const = default;
};

struct Instruction {
    Opcode op = Opcode::Halt;
    uint8_t operand_count = 0;
    std::array<Operand, 3> operands{};
    uint32_t line = 0; // source line, for diagnostics

    bool operator==(const Instruction&) const = default;
};

struct Program {
    std::vector<Instruction> instructions;
    std::map<std::string, uint32_t> labels; // code labels -> instruction index
    uint32_t entry = 0;
    std::vector<uint8_t> data_segment;      // loaded at address 0
};

// Per-slot operand pattern the assembler enforces.
enum class SlotKind : uint8_t {
    IntReg,
    FloatReg,
    VecReg,
    Imm,
    RegOrImm,   // integer register or immediate
    FloatOrImm, // float literal or integer immediate
    Mem,
    Label,
};

struct OpSignature {
    uint8_t count = 0;
    std::array<SlotKind, 3> slots{};
};

inline const OpSignature& signature(Opcode op) {
    using S = SlotKind;
    static const std::array<OpSignature, kOpcodeCount> table = [] {
        std::array<OpSignature, kOpcodeCount> t{};
        auto set = [&t](Opcode o, std::initializer_list<S> slots) {
            OpSignature sig;
            sig.count = static_cast<uint8_t>(slots.size());
            size_t i = 0;
            for (S s : slots)
                sig.slots[i++] = s;
            t[static_cast<size_t>(o)] = sig;
        };
        set(Opcode::Li, {S::IntReg, S::Imm});
        set(Opcode::Mov, {S::IntReg, S::IntReg});
        for (Opcode o : {Opcode::Add, Opcode::Sub, Opcode::And, Opcode::Or, Opcode::Xor,
                         Opcode::Shl, Opcode::Shr, Opcode::Slt, Opcode::Mul, Opcode::Div,
                         Opcode::Rem})
            set(o, {S::IntReg, S::IntReg, S::RegOrImm});
        set(Opcode::Not, {S::IntReg, S::IntReg});
        set(Opcode::Fli, {S::FloatReg, S::FloatOrImm});
        set(Opcode::Fmov, {S::FloatReg, S::FloatReg});
        set(Opcode::Fneg, {S::FloatReg, S::FloatReg});
        for (Opcode o : {Opcode::Fadd, Opcode::Fsub, Opcode::Fmul, Opcode::Fdiv})
            set(o, {S::FloatReg, S::FloatReg, S::FloatReg});
        set(Opcode::Vli, {S::VecReg, S::Imm});
        set(Opcode::Vmov, {S::VecReg, S::VecReg});
        for (Opcode o : {Opcode::Vadd, Opcode::Vsub, Opcode::Vand, Opcode::Vor,
                         Opcode::Vxor, Opcode::Vmul})
            set(o, {S::VecReg, S::VecReg, S::VecReg});
        set(Opcode::Ld, {S::IntReg, S::Mem});
        set(Opcode::St, {S::IntReg, S::Mem});
        set(Opcode::Fld, {S::FloatReg, S::Mem});
        set(Opcode::Fst, {S::FloatReg, S::Mem});
        set(Opcode::Vld, {S::VecReg, S::Mem});
        set(Opcode::Vst, {S::VecReg, S::Mem});
        set(Opcode::Jmp, {S::Label});
        set(Opcode::Beq, {S::IntReg, S::RegOrImm, S::Label});
        set(Opcode::Bne, {S::IntReg, S::RegOrImm, S::Label});
        set(Opcode::Blt, {S::IntReg, S::RegOrImm, S::Label});
        set(Opcode::Call, {S::Label});
        set(Opcode::Ret, {});
        set(Opcode::Halt, {});
        return t;
    }();
    return table[static_cast<size_t>(op)];
}

inline constexpr uint32_t kIntRegCount = 32;
inline constexpr uint32_t kFloatRegCount = 16;
inline constexpr uint32_t kVecRegCount = 8;
inline constexpr uint32_t kVecLanes = 4;

} // namespace ctmix
