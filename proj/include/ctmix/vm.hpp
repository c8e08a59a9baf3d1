#pragma once

// Deterministic register machine. Executes an assembled program against an
// input binding and records the instruction trace of the target function:
// tracing starts when a `call` lands on the target label and covers every
// retired instruction up to and including the matching `ret` (callee frames
// included when TargetSpec::trace_callees is set). The `call` itself belongs
// to the caller and is not traced.
//
// Semantics notes:
//   - integer add/sub/mul wrap modulo 2^64; div/rem are unsigned and trap
//     on a zero divisor; slt/blt compare as signed 64-bit
//   - shifts use the low 6 bits of the amount
//   - float divide by zero follows IEEE-754 (infinity, no trap)
//   - ld/st move 8 bytes little-endian, fld/fst 8 bytes, vld/vst 32 bytes
//   - `ret` with an empty call stack terminates execution like `halt`

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctmix/bytes.hpp"
#include "ctmix/isa.hpp"
#include "ctmix/trace.hpp"

namespace ctmix {

inline constexpr uint64_t kDefaultMemorySize = 65536;
inline constexpr uint64_t kDefaultBudget = 10'000'000;
inline constexpr uint32_t kMaxCallDepth = 1024;

struct MachineState {
    std::array<uint64_t, kIntRegCount> iregs{};
    std::array<double, kFloatRegCount> fregs{};
    std::array<std::array<uint64_t, kVecLanes>, kVecRegCount> vregs{};
    std::vector<uint8_t> memory;
    uint64_t pc = 0;
    std::vector<uint32_t> call_stack;

    explicit MachineState(uint64_t memory_size = kDefaultMemorySize) : memory(memory_size, 0) {}

    bool operator==(const MachineState&) const = default;
};

struct TargetSpec {
    std::string function_label;
    bool trace_callees = true;
};

// Where the secret lives: either a memory region or a list of integer
// registers, each register taking `width` little-endian bytes.
struct SecretManifest {
    enum class Kind { Memory, Registers };

    Kind kind = Kind::Memory;
    uint64_t addr = 0;
    uint64_t length = 0;        // Memory: bytes at addr
    std::vector<uint8_t> regs;  // Registers: integer register ids
    uint32_t width = 1;         // bytes per secret element (per register when Kind::Registers)

    uint64_t byte_length() const {
        return kind == Kind::Memory ? length : regs.size() * static_cast<uint64_t>(width);
    }

    static SecretManifest memory_region(uint64_t addr, uint64_t length, uint32_t width = 1) {
        SecretManifest m;
        m.kind = Kind::Memory;
        m.addr = addr;
        m.length = length;
        m.width = width;
        return m;
    }

    static SecretManifest registers(std::vector<uint8_t> regs, uint32_t width = 8) {
        SecretManifest m;
        m.kind = Kind::Registers;
        m.regs = std::move(regs);
        m.width = width;
        return m;
    }
};

struct MemWrite {
    uint64_t addr = 0;
    Bytes bytes;
};

struct RegWrite {
    uint8_t reg = 0;
    uint64_t value = 0;
};

struct InputBinding {
    std::vector<MemWrite> public_mem;
    std::vector<RegWrite> public_regs;
    SecretManifest secret;
};

enum class ExecStatus : uint8_t {
    Halted,
    BudgetExhausted,
    MemoryFault,
    StackOverflow,
    DivideByZero,
    PcOutOfRange,
};

inline const char* exec_status_name(ExecStatus s) {
    switch (s) {
    case ExecStatus::Halted: return "ok";
    case ExecStatus::BudgetExhausted: return "budget_exhausted";
    case ExecStatus::MemoryFault: return "memory_fault";
    case ExecStatus::StackOverflow: return "stack_overflow";
    case ExecStatus::DivideByZero: return "divide_by_zero";
    case ExecStatus::PcOutOfRange: return "pc_out_of_range";
    }
    return "?";
}

struct ExecResult {
    Trace trace;
    ExecStatus status = ExecStatus::Halted;
    uint64_t steps = 0;        // instructions retired, traced or not
    uint64_t fault_pc = 0;     // meaningful unless status == Halted
    std::string fault_detail;
    MachineState state{0};     // final machine state
};

inline void validate_manifest(const SecretManifest& m, uint64_t memory_size) {
    if (m.byte_length() == 0)
        throw std::invalid_argument("secret manifest is empty");
    if (m.kind == SecretManifest::Kind::Memory) {
        if (m.addr >= memory_size || m.length > memory_size - m.addr)
            throw std::invalid_argument("secret region exceeds memory bounds");
    } else {
        if (m.width == 0 || m.width > 8)
            throw std::invalid_argument("secret register width must be 1..8 bytes");
        for (uint8_t r : m.regs) {
            if (r >= kIntRegCount)
                throw std::invalid_argument("secret manifest names a register out of range");
        }
    }
}

inline void validate_binding(const InputBinding& b, uint64_t memory_size) {
    validate_manifest(b.secret, memory_size);
    for (const auto& w : b.public_mem) {
        if (w.addr >= memory_size || w.bytes.size() > memory_size - w.addr)
            throw std::invalid_argument("public memory write exceeds memory bounds");
        if (b.secret.kind == SecretManifest::Kind::Memory) {
            uint64_t lo = std::max(w.addr, b.secret.addr);
            uint64_t hi = std::min(w.addr + w.bytes.size(), b.secret.addr + b.secret.length);
            if (lo < hi)
                throw std::invalid_argument("public write overlaps the secret region");
        }
    }
    for (const auto& w : b.public_regs) {
        if (w.reg >= kIntRegCount)
            throw std::invalid_argument("public register write out of range");
        if (b.secret.kind == SecretManifest::Kind::Registers) {
            for (uint8_t r : b.secret.regs) {
                if (r == w.reg)
                    throw std::invalid_argument("public write overlaps a secret register");
            }
        }
    }
}

// Zeroed machine with the data segment loaded at address 0.
inline MachineState make_initial_state(const Program& program,
                                       uint64_t memory_size = kDefaultMemorySize) {
    if (program.data_segment.size() > memory_size)
        throw std::invalid_argument("data segment does not fit in memory");
    MachineState st(memory_size);
    if (!program.data_segment.empty())
        std::memcpy(st.memory.data(), program.data_segment.data(), program.data_segment.size());
    st.pc = program.entry;
    return st;
}

inline void apply_binding(MachineState& st, const InputBinding& binding) {
    validate_binding(binding, st.memory.size());
    for (const auto& w : binding.public_mem) {
        if (!w.bytes.empty())
            std::memcpy(st.memory.data() + w.addr, w.bytes.data(), w.bytes.size());
    }
    for (const auto& w : binding.public_regs)
        st.iregs[w.reg] = w.value;
}

inline MachineState make_initial_state(const Program& program, const InputBinding& binding,
                                       uint64_t memory_size = kDefaultMemorySize) {
    MachineState st = make_initial_state(program, memory_size);
    apply_binding(st, binding);
    return st;
}

// Overwrites exactly the manifest region with `secret`; everything else is
// left untouched. The value length must match the manifest.
inline void inject_secret(MachineState& state, const SecretManifest& manifest,
                          std::span<const uint8_t> secret) {
    validate_manifest(manifest, state.memory.size());
    if (secret.size() != manifest.byte_length())
        throw std::invalid_argument("secret length " + std::to_string(secret.size()) +
                                    " does not match manifest length " +
                                    std::to_string(manifest.byte_length()));
    if (manifest.kind == SecretManifest::Kind::Memory) {
        std::memcpy(state.memory.data() + manifest.addr, secret.data(), secret.size());
        return;
    }
    size_t off = 0;
    for (uint8_t r : manifest.regs) {
        uint64_t v = 0;
        for (uint32_t i = 0; i < manifest.width; ++i)
            v |= static_cast<uint64_t>(secret[off + i]) << (8 * i);
        state.iregs[r] = v;
        off += manifest.width;
    }
}

namespace detail {

class Interpreter {
public:
    Interpreter(const Program& program, MachineState state, const TargetSpec& target,
                uint64_t budget)
        : prog_(program), st_(std::move(state)), target_(target), budget_(budget) {}

    ExecResult run() {
        auto it = prog_.labels.find(target_.function_label);
        if (it == prog_.labels.end())
            throw std::invalid_argument("target label '" + target_.function_label +
                                        "' not found in program");
        target_entry_ = it->second;
        if (prog_.entry == target_entry_) {
            span_active_ = true;
            span_depth_ = st_.call_stack.size();
        }

        while (!done_)
            step();

        ExecResult res;
        res.trace = std::move(trace_);
        res.status = status_;
        res.steps = steps_;
        res.fault_pc = fault_pc_;
        res.fault_detail = std::move(fault_detail_);
        res.state = std::move(st_);
        return res;
    }

private:
    const Program& prog_;
    MachineState st_;
    const TargetSpec& target_;
    uint64_t budget_;

    Trace trace_;
    uint64_t steps_ = 0;
    uint32_t target_entry_ = 0;
    bool span_active_ = false;
    size_t span_depth_ = 0;
    bool done_ = false;
    ExecStatus status_ = ExecStatus::Halted;
    uint64_t fault_pc_ = 0;
    std::string fault_detail_;

    void fault(ExecStatus status, uint64_t pc, std::string detail) {
        status_ = status;
        fault_pc_ = pc;
        fault_detail_ = std::move(detail);
        done_ = true;
    }

    uint64_t& ireg(const Operand& o) { return st_.iregs[o.reg]; }
    double& freg(const Operand& o) { return st_.fregs[o.reg]; }
    std::array<uint64_t, kVecLanes>& vreg(const Operand& o) { return st_.vregs[o.reg]; }

    uint64_t value(const Operand& o) const {
        return o.kind == OperandKind::Imm ? static_cast<uint64_t>(o.imm) : st_.iregs[o.reg];
    }

    bool mem_addr(const Operand& o, uint64_t width, uint64_t pc, uint64_t& out) {
        uint64_t addr = st_.iregs[o.reg] + static_cast<uint64_t>(o.imm);
        if (addr >= st_.memory.size() || width > st_.memory.size() - addr) {
            fault(ExecStatus::MemoryFault, pc,
                  "address " + std::to_string(addr) + " out of bounds (memory size " +
                      std::to_string(st_.memory.size()) + ")");
            return false;
        }
        out = addr;
        return true;
    }

    uint64_t load_word(uint64_t addr) const {
        uint64_t v;
        std::memcpy(&v, st_.memory.data() + addr, 8);
        return v; // little-endian host
    }

    void store_word(uint64_t addr, uint64_t v) { std::memcpy(st_.memory.data() + addr, &v, 8); }

    void step() {
        if (steps_ >= budget_) {
            fault(ExecStatus::BudgetExhausted, st_.pc,
                  "budget of " + std::to_string(budget_) + " instructions exhausted");
            return;
        }
        const uint64_t pc = st_.pc;
        if (pc >= prog_.instructions.size()) {
            fault(ExecStatus::PcOutOfRange, pc, "pc past the end of the program");
            return;
        }
        const Instruction& ins = prog_.instructions[pc];
        const size_t depth = st_.call_stack.size();
        const bool traced = span_active_ && (target_.trace_callees || depth == span_depth_);
        const bool was_active = span_active_;

        uint64_t next_pc = pc + 1;
        switch (ins.op) {
        case Opcode::Li: ireg(ins.operands[0]) = static_cast<uint64_t>(ins.operands[1].imm); break;
        case Opcode::Mov: ireg(ins.operands[0]) = ireg(ins.operands[1]); break;
        case Opcode::Add:
            ireg(ins.operands[0]) = ireg(ins.operands[1]) + value(ins.operands[2]);
            break;
        case Opcode::Sub:
            ireg(ins.operands[0]) = ireg(ins.operands[1]) - value(ins.operands[2]);
            break;
        case Opcode::And:
            ireg(ins.operands[0]) = ireg(ins.operands[1]) & value(ins.operands[2]);
            break;
        case Opcode::Or:
            ireg(ins.operands[0]) = ireg(ins.operands[1]) | value(ins.operands[2]);
            break;
        case Opcode::Xor:
            ireg(ins.operands[0]) = ireg(ins.operands[1]) ^ value(ins.operands[2]);
            break;
        case Opcode::Not: ireg(ins.operands[0]) = ~ireg(ins.operands[1]); break;
        case Opcode::Shl:
            ireg(ins.operands[0]) = ireg(ins.operands[1]) << (value(ins.operands[2]) & 63);
            break;
        case Opcode::Shr:
            ireg(ins.operands[0]) = ireg(ins.operands[1]) >> (value(ins.operands[2]) & 63);
            break;
        case Opcode::Slt:
            ireg(ins.operands[0]) = static_cast<int64_t>(ireg(ins.operands[1])) <
                                            static_cast<int64_t>(value(ins.operands[2]))
                                        ? 1
                                        : 0;
            break;
        case Opcode::Mul:
            ireg(ins.operands[0]) = ireg(ins.operands[1]) * value(ins.operands[2]);
            break;
        case Opcode::Div:
        case Opcode::Rem: {
            uint64_t divisor = value(ins.operands[2]);
            if (divisor == 0) {
                fault(ExecStatus::DivideByZero, pc,
                      std::string(mnemonic(ins.op)) + " by zero");
                return;
            }
            uint64_t a = ireg(ins.operands[1]);
            ireg(ins.operands[0]) = ins.op == Opcode::Div ? a / divisor : a % divisor;
            break;
        }
        case Opcode::Fli: freg(ins.operands[0]) = ins.operands[1].fimm; break;
        case Opcode::Fmov: freg(ins.operands[0]) = freg(ins.operands[1]); break;
        case Opcode::Fadd:
            freg(ins.operands[0]) = freg(ins.operands[1]) + freg(ins.operands[2]);
            break;
        case Opcode::Fsub:
            freg(ins.operands[0]) = freg(ins.operands[1]) - freg(ins.operands[2]);
            break;
        case Opcode::Fneg: freg(ins.operands[0]) = -freg(ins.operands[1]); break;
        case Opcode::Fmul:
            freg(ins.operands[0]) = freg(ins.operands[1]) * freg(ins.operands[2]);
            break;
        case Opcode::Fdiv:
            freg(ins.operands[0]) = freg(ins.operands[1]) / freg(ins.operands[2]);
            break;
        case Opcode::Vli: {
            auto& d = vreg(ins.operands[0]);
            d.fill(static_cast<uint64_t>(ins.operands[1].imm));
            break;
        }
        case Opcode::Vmov: vreg(ins.operands[0]) = vreg(ins.operands[1]); break;
        case Opcode::Vadd:
        case Opcode::Vsub:
        case Opcode::Vand:
        case Opcode::Vor:
        case Opcode::Vxor:
        case Opcode::Vmul: {
            auto& d = vreg(ins.operands[0]);
            const auto a = vreg(ins.operands[1]);
            const auto b = vreg(ins.operands[2]);
            for (uint32_t i = 0; i < kVecLanes; ++i) {
                switch (ins.op) {
                case Opcode::Vadd: d[i] = a[i] + b[i]; break;
                case Opcode::Vsub: d[i] = a[i] - b[i]; break;
                case Opcode::Vand: d[i] = a[i] & b[i]; break;
                case Opcode::Vor: d[i] = a[i] | b[i]; break;
                case Opcode::Vxor: d[i] = a[i] ^ b[i]; break;
                default: d[i] = a[i] * b[i]; break;
                }
            }
            break;
        }
        case Opcode::Ld: {
            uint64_t addr;
            if (!mem_addr(ins.operands[1], 8, pc, addr))
                return;
            ireg(ins.operands[0]) = load_word(addr);
            break;
        }
        case Opcode::St: {
            uint64_t addr;
            if (!mem_addr(ins.operands[1], 8, pc, addr))
                return;
            store_word(addr, ireg(ins.operands[0]));
            break;
        }
        case Opcode::Fld: {
            uint64_t addr;
            if (!mem_addr(ins.operands[1], 8, pc, addr))
                return;
            freg(ins.operands[0]) = std::bit_cast<double>(load_word(addr));
            break;
        }
        case Opcode::Fst: {
            uint64_t addr;
            if (!mem_addr(ins.operands[1], 8, pc, addr))
                return;
            store_word(addr, std::bit_cast<uint64_t>(freg(ins.operands[0])));
            break;
        }
        case Opcode::Vld: {
            uint64_t addr;
            if (!mem_addr(ins.operands[1], 32, pc, addr))
                return;
            auto& d = vreg(ins.operands[0]);
            for (uint32_t i = 0; i < kVecLanes; ++i)
                d[i] = load_word(addr + 8 * i);
            break;
        }
        case Opcode::Vst: {
            uint64_t addr;
            if (!mem_addr(ins.operands[1], 32, pc, addr))
                return;
            const auto& s = vreg(ins.operands[0]);
            for (uint32_t i = 0; i < kVecLanes; ++i)
                store_word(addr + 8 * i, s[i]);
            break;
        }
        case Opcode::Jmp: next_pc = static_cast<uint64_t>(ins.operands[0].imm); break;
        case Opcode::Beq:
            if (ireg(ins.operands[0]) == value(ins.operands[1]))
                next_pc = static_cast<uint64_t>(ins.operands[2].imm);
            break;
        case Opcode::Bne:
            if (ireg(ins.operands[0]) != value(ins.operands[1]))
                next_pc = static_cast<uint64_t>(ins.operands[2].imm);
            break;
        case Opcode::Blt:
            if (static_cast<int64_t>(ireg(ins.operands[0])) <
                static_cast<int64_t>(value(ins.operands[1])))
                next_pc = static_cast<uint64_t>(ins.operands[2].imm);
            break;
        case Opcode::Call: {
            if (st_.call_stack.size() >= kMaxCallDepth) {
                fault(ExecStatus::StackOverflow, pc,
                      "call stack exceeds " + std::to_string(kMaxCallDepth) + " frames");
                return;
            }
            st_.call_stack.push_back(static_cast<uint32_t>(pc + 1));
            next_pc = static_cast<uint64_t>(ins.operands[0].imm);
            break;
        }
        case Opcode::Ret: {
            if (st_.call_stack.empty()) {
                done_ = true; // returning from the entry frame ends the run
            } else {
                next_pc = st_.call_stack.back();
                st_.call_stack.pop_back();
            }
            break;
        }
        case Opcode::Halt: done_ = true; break;
        }

        st_.pc = done_ ? pc : next_pc;
        ++steps_;
        if (traced)
            trace_.append(static_cast<uint32_t>(pc), mnemonic(ins.op), class_of(ins.op));

        // span ends with the ret executed in the target's own frame
        if (span_active_ && ins.op == Opcode::Ret && depth == span_depth_)
            span_active_ = false;
        // span starts when a call lands on the target entry
        if (!was_active && ins.op == Opcode::Call && !done_ &&
            static_cast<uint32_t>(ins.operands[0].imm) == target_entry_) {
            span_active_ = true;
            span_depth_ = depth + 1;
        }
    }
};

} // namespace detail

inline ExecResult execute(const Program& program, MachineState state, const TargetSpec& target,
                          uint64_t budget = kDefaultBudget) {
    if (budget == 0)
        throw std::invalid_argument("budget must be positive");
    detail::Interpreter interp(program, std::move(state), target, budget);
    return interp.run();
}

// Convenience wrapper: build the initial state from the binding, inject the
// secret value (when given), then run.
inline ExecResult execute(const Program& program, const InputBinding& binding,
                          const TargetSpec& target, std::span<const uint8_t> secret = {},
                          uint64_t budget = kDefaultBudget,
                          uint64_t memory_size = kDefaultMemorySize) {
    MachineState st = make_initial_state(program, binding, memory_size);
    if (!secret.empty())
        inject_secret(st, binding.secret, secret);
    return execute(program, std::move(st), target, budget);
}

} // namespace ctmix
