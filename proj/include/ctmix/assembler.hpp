#pragma once

// Text assembler for the mini ISA.
//
// Grammar (line oriented):
//   [label:] mnemonic [op1[, op2[, op3]]]   ; comment
// Operands: rN / fN / vN registers, integer immediates (decimal, 0x hex,
// 'c' char literals), float literals (fli), memory operands [rN+imm], and
// label references. `.data` opens the data segment; `.byte`, `.word` and
// `.ascii` append to it. Labels defined after `.data` name data addresses
// and may be used as immediates; labels in the code section name branch
// and call targets.

#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ctmix/isa.hpp"

namespace ctmix {

class AsmError : public std::runtime_error {
public:
    enum class Kind {
        Syntax,
        UnknownMnemonic,
        UnresolvedLabel,
        OperandMismatch,
        DuplicateLabel,
        Data,
        Structure,
    };

    AsmError(Kind kind, uint32_t line, uint32_t col, const std::string& message)
        : std::runtime_error("line " + std::to_string(line) + ", col " + std::to_string(col) +
                             ": " + message),
          kind_(kind), line_(line), col_(col) {}

    Kind kind() const { return kind_; }
    uint32_t line() const { return line_; }
    uint32_t col() const { return col_; }

private:
    Kind kind_;
    uint32_t line_;
    uint32_t col_;
};

namespace detail {

struct AsmContext {
    Program program;
    std::map<std::string, uint32_t> data_labels;    // name -> data offset
    std::map<std::string, uint32_t> label_lines;

    struct SymbolRef {
        uint32_t instr;
        uint8_t slot;
        std::string name;
        uint32_t line;
        uint32_t col;
        bool wants_code_label; // Label slot vs. immediate slot
    };
    std::vector<SymbolRef> refs;
    bool in_data = false;
};

inline bool is_ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

inline bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

inline bool is_register_name(std::string_view s) {
    if (s.size() < 2 || (s[0] != 'r' && s[0] != 'f' && s[0] != 'v'))
        return false;
    for (size_t i = 1; i < s.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i])))
            return false;
    }
    return true;
}

// Strips a trailing `;` comment, honouring '...' and "..." literals.
inline std::string_view strip_comment(std::string_view line) {
    bool in_single = false, in_double = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (c == '\\' && (in_single || in_double)) {
            ++i;
            continue;
        }
        if (c == '\'' && !in_double)
            in_single = !in_single;
        else if (c == '"' && !in_single)
            in_double = !in_double;
        else if (c == ';' && !in_single && !in_double)
            return line.substr(0, i);
    }
    return line;
}

inline std::string_view trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
        ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
        --e;
    return s.substr(b, e - b);
}

// Splits on top-level commas (outside quotes). Returns (token, 1-based col).
inline std::vector<std::pair<std::string_view, uint32_t>> split_operands(std::string_view text,
                                                                         uint32_t base_col) {
    std::vector<std::pair<std::string_view, uint32_t>> out;
    bool in_single = false, in_double = false;
    size_t start = 0;
    auto push = [&](size_t from, size_t to) {
        std::string_view raw = text.substr(from, to - from);
        std::string_view token = trim(raw);
        size_t lead = token.empty() ? 0 : static_cast<size_t>(token.data() - raw.data());
        out.emplace_back(token, base_col + static_cast<uint32_t>(from + lead));
    };
    for (size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c == '\\' && (in_single || in_double)) {
            ++i;
            continue;
        }
        if (c == '\'' && !in_double)
            in_single = !in_single;
        else if (c == '"' && !in_single)
            in_double = !in_double;
        else if (c == ',' && !in_single && !in_double) {
            push(start, i);
            start = i + 1;
        }
    }
    push(start, text.size());
    return out;
}

inline int64_t parse_char_literal(std::string_view tok, uint32_t line, uint32_t col) {
    auto fail = [&]() -> int64_t {
        throw AsmError(AsmError::Kind::Syntax, line, col,
                       "bad character literal " + std::string(tok));
    };
    if (tok.size() < 3 || tok.front() != '\'' || tok.back() != '\'')
        return fail();
    std::string_view body = tok.substr(1, tok.size() - 2);
    if (body.size() == 1 && body[0] != '\\')
        return static_cast<unsigned char>(body[0]);
    if (body.size() >= 2 && body[0] == '\\') {
        switch (body[1]) {
        case 'n': return '\n';
        case 't': return '\t';
        case 'r': return '\r';
        case '0': return 0;
        case '\\': return '\\';
        case '\'': return '\'';
        case '"': return '"';
        case 'x': {
            uint32_t v = 0;
            auto [p, ec] = std::from_chars(body.data() + 2, body.data() + body.size(), v, 16);
            if (ec != std::errc() || p != body.data() + body.size() || v > 0xff)
                return fail();
            return v;
        }
        default: return fail();
        }
    }
    return fail();
}

inline bool looks_numeric(std::string_view tok) {
    if (tok.empty())
        return false;
    size_t i = (tok[0] == '+' || tok[0] == '-') ? 1 : 0;
    return i < tok.size() && std::isdigit(static_cast<unsigned char>(tok[i]));
}

inline int64_t parse_int(std::string_view tok, uint32_t line, uint32_t col) {
    bool neg = false;
    std::string_view body = tok;
    if (!body.empty() && (body[0] == '+' || body[0] == '-')) {
        neg = body[0] == '-';
        body.remove_prefix(1);
    }
    uint64_t value = 0;
    std::errc ec{};
    const char* end = nullptr;
    if (body.size() > 2 && body[0] == '0' && (body[1] == 'x' || body[1] == 'X')) {
        auto r = std::from_chars(body.data() + 2, body.data() + body.size(), value, 16);
        ec = r.ec;
        end = r.ptr;
    } else {
        auto r = std::from_chars(body.data(), body.data() + body.size(), value, 10);
        ec = r.ec;
        end = r.ptr;
    }
    if (ec != std::errc() || end != body.data() + body.size())
        throw AsmError(AsmError::Kind::Syntax, line, col,
                       "bad integer literal " + std::string(tok));
    return neg ? -static_cast<int64_t>(value) : static_cast<int64_t>(value);
}

inline bool looks_float(std::string_view tok) {
    if (tok.size() > 2 && (tok.substr(0, 2) == "0x" || tok.substr(0, 2) == "0X"))
        return false;
    return tok.find_first_of(".eE") != std::string_view::npos && looks_numeric(tok);
}

inline double parse_float(std::string_view tok, uint32_t line, uint32_t col) {
    std::string copy(tok);
    char* end = nullptr;
    double v = std::strtod(copy.c_str(), &end);
    if (end != copy.c_str() + copy.size())
        throw AsmError(AsmError::Kind::Syntax, line, col, "bad float literal " + std::string(tok));
    return v;
}

// [rN], [rN+imm], [rN-imm]
inline Operand parse_mem_operand(std::string_view tok, uint32_t line, uint32_t col) {
    auto fail = [&](const std::string& why) -> Operand {
        throw AsmError(AsmError::Kind::Syntax, line, col,
                       "bad memory operand " + std::string(tok) + " (" + why + ")");
    };
    if (tok.size() < 2 || tok.front() != '[' || tok.back() != ']')
        return fail("expected [rN+imm]");
    std::string inner;
    for (char c : tok.substr(1, tok.size() - 2)) {
        if (!std::isspace(static_cast<unsigned char>(c)))
            inner.push_back(c);
    }
    size_t split = inner.find_first_of("+-", 1);
    std::string_view reg = split == std::string::npos ? std::string_view(inner)
                                                      : std::string_view(inner).substr(0, split);
    if (reg.size() < 2 || reg[0] != 'r')
        return fail("base must be an integer register");
    int64_t regno = 0;
    auto [p, ec] = std::from_chars(reg.data() + 1, reg.data() + reg.size(), regno);
    if (ec != std::errc() || p != reg.data() + reg.size() || regno < 0 ||
        regno >= static_cast<int64_t>(kIntRegCount))
        return fail("no such register");
    int64_t offset = 0;
    if (split != std::string::npos)
        offset = parse_int(std::string_view(inner).substr(split), line, col);
    Operand op;
    op.kind = OperandKind::Mem;
    op.reg = static_cast<uint8_t>(regno);
    op.imm = offset;
    return op;
}

inline std::optional<Operand> parse_register(std::string_view tok) {
    if (tok.size() < 2)
        return std::nullopt;
    OperandKind kind;
    uint32_t limit;
    switch (tok[0]) {
    case 'r': kind = OperandKind::IntReg; limit = kIntRegCount; break;
    case 'f': kind = OperandKind::FloatReg; limit = kFloatRegCount; break;
    case 'v': kind = OperandKind::VecReg; limit = kVecRegCount; break;
    default: return std::nullopt;
    }
    uint32_t n = 0;
    auto [p, ec] = std::from_chars(tok.data() + 1, tok.data() + tok.size(), n);
    if (ec != std::errc() || p != tok.data() + tok.size() || n >= limit)
        return std::nullopt;
    Operand op;
    op.kind = kind;
    op.reg = static_cast<uint8_t>(n);
    return op;
}

inline std::string slot_description(SlotKind s) {
    switch (s) {
    case SlotKind::IntReg: return "rN";
    case SlotKind::FloatReg: return "fN";
    case SlotKind::VecReg: return "vN";
    case SlotKind::Imm: return "imm";
    case SlotKind::RegOrImm: return "rN|imm";
    case SlotKind::FloatOrImm: return "float";
    case SlotKind::Mem: return "[rN+imm]";
    case SlotKind::Label: return "label";
    }
    return "?";
}

inline std::string signature_description(Opcode op) {
    const OpSignature& sig = signature(op);
    std::string out = mnemonic(op);
    for (uint8_t i = 0; i < sig.count; ++i) {
        out += i == 0 ? " " : ", ";
        out += slot_description(sig.slots[i]);
    }
    return out;
}

class Assembler {
public:
    Program run(std::string_view source) {
        uint32_t lineno = 0;
        size_t pos = 0;
        while (pos <= source.size()) {
            size_t nl = source.find('\n', pos);
            std::string_view raw = source.substr(pos, nl == std::string_view::npos
                                                          ? std::string_view::npos
                                                          : nl - pos);
            ++lineno;
            parse_line(raw, lineno);
            if (nl == std::string_view::npos)
                break;
            pos = nl + 1;
        }
        finish(lineno);
        return std::move(ctx_.program);
    }

private:
    AsmContext ctx_;

    void parse_line(std::string_view raw, uint32_t lineno) {
        std::string_view line = strip_comment(raw);
        std::string_view body = trim(line);
        if (body.empty())
            return;
        uint32_t col = static_cast<uint32_t>(body.data() - line.data()) + 1;

        // optional leading label
        if (is_ident_start(body[0])) {
            size_t i = 1;
            while (i < body.size() && is_ident_char(body[i]))
                ++i;
            if (i < body.size() && body[i] == ':') {
                define_label(body.substr(0, i), lineno, col);
                body = trim(body.substr(i + 1));
                if (body.empty())
                    return;
                col = static_cast<uint32_t>(body.data() - line.data()) + 1;
            }
        }

        if (body[0] == '.') {
            parse_directive(body, line, lineno, col);
            return;
        }
        parse_instruction(body, line, lineno, col);
    }

    void define_label(std::string_view name, uint32_t lineno, uint32_t col) {
        if (is_register_name(name))
            throw AsmError(AsmError::Kind::Syntax, lineno, col,
                           "label '" + std::string(name) + "' shadows a register name");
        std::string key(name);
        if (ctx_.program.labels.count(key) || ctx_.data_labels.count(key))
            throw AsmError(AsmError::Kind::DuplicateLabel, lineno, col,
                           "duplicate label '" + key + "'");
        if (ctx_.in_data)
            ctx_.data_labels.emplace(key, static_cast<uint32_t>(ctx_.program.data_segment.size()));
        else
            ctx_.program.labels.emplace(key, static_cast<uint32_t>(ctx_.program.instructions.size()));
        ctx_.label_lines.emplace(key, lineno);
    }

    void parse_directive(std::string_view body, std::string_view line, uint32_t lineno,
                         uint32_t col) {
        size_t sp = body.find_first_of(" \t");
        std::string_view name = sp == std::string_view::npos ? body : body.substr(0, sp);
        std::string_view rest = sp == std::string_view::npos ? std::string_view()
                                                             : trim(body.substr(sp + 1));
        uint32_t rest_col = rest.empty() ? col
                                         : static_cast<uint32_t>(rest.data() - line.data()) + 1;
        if (name == ".data") {
            if (!rest.empty())
                throw AsmError(AsmError::Kind::Syntax, lineno, rest_col,
                               ".data takes no arguments");
            ctx_.in_data = true;
            return;
        }
        if (name == ".byte" || name == ".word" || name == ".ascii") {
            if (!ctx_.in_data)
                throw AsmError(AsmError::Kind::Data, lineno, col,
                               std::string(name) + " outside the .data section");
            if (rest.empty())
                throw AsmError(AsmError::Kind::Data, lineno, col,
                               std::string(name) + " needs at least one value");
            if (name == ".ascii") {
                append_ascii(rest, lineno, rest_col);
                return;
            }
            for (auto [tok, tok_col] : split_operands(rest, rest_col)) {
                if (tok.empty())
                    throw AsmError(AsmError::Kind::Data, lineno, tok_col, "empty value");
                int64_t v = tok.front() == '\'' ? parse_char_literal(tok, lineno, tok_col)
                                                : parse_int(tok, lineno, tok_col);
                if (name == ".byte") {
                    if (v < -128 || v > 255)
                        throw AsmError(AsmError::Kind::Data, lineno, tok_col,
                                       ".byte value out of range");
                    ctx_.program.data_segment.push_back(static_cast<uint8_t>(v & 0xff));
                } else {
                    uint64_t u = static_cast<uint64_t>(v);
                    for (int i = 0; i < 8; ++i)
                        ctx_.program.data_segment.push_back(static_cast<uint8_t>(u >> (8 * i)));
                }
            }
            return;
        }
        throw AsmError(AsmError::Kind::Syntax, lineno, col,
                       "unknown directive " + std::string(name));
    }

    void append_ascii(std::string_view rest, uint32_t lineno, uint32_t col) {
        if (rest.size() < 2 || rest.front() != '"' || rest.back() != '"')
            throw AsmError(AsmError::Kind::Data, lineno, col, ".ascii needs a quoted string");
        std::string_view body = rest.substr(1, rest.size() - 2);
        for (size_t i = 0; i < body.size(); ++i) {
            char c = body[i];
            if (c != '\\') {
                ctx_.program.data_segment.push_back(static_cast<uint8_t>(c));
                continue;
            }
            if (++i >= body.size())
                throw AsmError(AsmError::Kind::Data, lineno, col, "dangling escape in .ascii");
            switch (body[i]) {
            case 'n': ctx_.program.data_segment.push_back('\n'); break;
            case 't': ctx_.program.data_segment.push_back('\t'); break;
            case 'r': ctx_.program.data_segment.push_back('\r'); break;
            case '0': ctx_.program.data_segment.push_back(0); break;
            case '\\': ctx_.program.data_segment.push_back('\\'); break;
            case '"': ctx_.program.data_segment.push_back('"'); break;
            default:
                throw AsmError(AsmError::Kind::Data, lineno, col,
                               std::string("unknown escape \\") + body[i] + " in .ascii");
            }
        }
    }

    void parse_instruction(std::string_view body, std::string_view line, uint32_t lineno,
                           uint32_t col) {
        if (ctx_.in_data)
            throw AsmError(AsmError::Kind::Data, lineno, col,
                           "instructions are not allowed after .data");
        size_t sp = body.find_first_of(" \t");
        std::string_view name = sp == std::string_view::npos ? body : body.substr(0, sp);
        auto op = opcode_from_mnemonic(name);
        if (!op) {
            if (!is_ident_start(name[0]))
                throw AsmError(AsmError::Kind::Syntax, lineno, col,
                               "expected a mnemonic, got '" + std::string(name) + "'");
            throw AsmError(AsmError::Kind::UnknownMnemonic, lineno, col,
                           "unknown mnemonic '" + std::string(name) + "'");
        }

        std::string_view rest = sp == std::string_view::npos ? std::string_view()
                                                             : trim(body.substr(sp + 1));
        std::vector<std::pair<std::string_view, uint32_t>> tokens;
        if (!rest.empty()) {
            uint32_t rest_col = static_cast<uint32_t>(rest.data() - line.data()) + 1;
            tokens = split_operands(rest, rest_col);
        }

        const OpSignature& sig = signature(*op);
        if (tokens.size() != sig.count)
            throw AsmError(AsmError::Kind::OperandMismatch, lineno, col,
                           mnemonic(*op) + std::string(" takes ") + std::to_string(sig.count) +
                               " operand(s): " + signature_description(*op));

        Instruction ins;
        ins.op = *op;
        ins.operand_count = sig.count;
        ins.line = lineno;
        uint32_t index = static_cast<uint32_t>(ctx_.program.instructions.size());
        for (uint8_t slot = 0; slot < sig.count; ++slot) {
            auto [tok, tok_col] = tokens[slot];
            if (tok.empty())
                throw AsmError(AsmError::Kind::Syntax, lineno, tok_col, "empty operand");
            ins.operands[slot] = parse_operand(*op, sig.slots[slot], slot, index, tok, lineno,
                                               tok_col);
        }
        ctx_.program.instructions.push_back(ins);
    }

    Operand parse_operand(Opcode op, SlotKind want, uint8_t slot, uint32_t index,
                          std::string_view tok, uint32_t lineno, uint32_t col) {
        auto mismatch = [&]() -> Operand {
            throw AsmError(AsmError::Kind::OperandMismatch, lineno, col,
                           "operand " + std::to_string(slot + 1) + " of " + mnemonic(op) +
                               " must be " + slot_description(want) + " (signature: " +
                               signature_description(op) + ")");
        };
        auto imm_operand = [&]() -> Operand {
            Operand o;
            o.kind = OperandKind::Imm;
            if (tok.front() == '\'')
                o.imm = parse_char_literal(tok, lineno, col);
            else if (looks_numeric(tok))
                o.imm = parse_int(tok, lineno, col);
            else if (is_ident_start(tok.front()) && !is_register_name(tok)) {
                // data label, resolved after parsing
                std::string name(tok);
                for (char c : name) {
                    if (!is_ident_char(c))
                        return mismatch();
                }
                ctx_.refs.push_back({index, slot, name, lineno, col, false});
            } else {
                return mismatch();
            }
            return o;
        };

        switch (want) {
        case SlotKind::IntReg:
        case SlotKind::FloatReg:
        case SlotKind::VecReg: {
            auto reg = parse_register(tok);
            OperandKind expect = want == SlotKind::IntReg    ? OperandKind::IntReg
                                 : want == SlotKind::FloatReg ? OperandKind::FloatReg
                                                              : OperandKind::VecReg;
            if (!reg || reg->kind != expect)
                return mismatch();
            return *reg;
        }
        case SlotKind::Imm:
            if (parse_register(tok))
                return mismatch();
            return imm_operand();
        case SlotKind::RegOrImm: {
            if (auto reg = parse_register(tok)) {
                if (reg->kind != OperandKind::IntReg)
                    return mismatch();
                return *reg;
            }
            return imm_operand();
        }
        case SlotKind::FloatOrImm: {
            if (parse_register(tok))
                return mismatch();
            Operand o;
            o.kind = OperandKind::FloatImm;
            if (looks_float(tok))
                o.fimm = parse_float(tok, lineno, col);
            else if (looks_numeric(tok))
                o.fimm = static_cast<double>(parse_int(tok, lineno, col));
            else
                return mismatch();
            return o;
        }
        case SlotKind::Mem:
            if (tok.front() != '[')
                return mismatch();
            return parse_mem_operand(tok, lineno, col);
        case SlotKind::Label: {
            if (!is_ident_start(tok.front()) || is_register_name(tok))
                return mismatch();
            for (char c : tok) {
                if (!is_ident_char(c))
                    return mismatch();
            }
            ctx_.refs.push_back({index, slot, std::string(tok), lineno, col, true});
            Operand o;
            o.kind = OperandKind::Label;
            return o;
        }
        }
        return mismatch();
    }

    void finish(uint32_t last_line) {
        Program& prog = ctx_.program;
        if (prog.instructions.empty())
            throw AsmError(AsmError::Kind::Structure, last_line, 1, "program has no instructions");

        for (const auto& [name, idx] : prog.labels) {
            if (idx >= prog.instructions.size())
                throw AsmError(AsmError::Kind::UnresolvedLabel, ctx_.label_lines.at(name), 1,
                               "label '" + name + "' does not precede an instruction");
        }

        for (const auto& ref : ctx_.refs) {
            if (ref.wants_code_label) {
                auto it = prog.labels.find(ref.name);
                if (it == prog.labels.end()) {
                    std::string why = ctx_.data_labels.count(ref.name)
                                          ? "' is a data label, branch targets must be code labels"
                                          : "' is not defined";
                    throw AsmError(AsmError::Kind::UnresolvedLabel, ref.line, ref.col,
                                   "label '" + ref.name + why);
                }
                Operand& o = prog.instructions[ref.instr].operands[ref.slot];
                o.kind = OperandKind::Label;
                o.imm = static_cast<int64_t>(it->second);
            } else {
                auto it = ctx_.data_labels.find(ref.name);
                if (it == ctx_.data_labels.end())
                    throw AsmError(AsmError::Kind::UnresolvedLabel, ref.line, ref.col,
                                   "data label '" + ref.name + "' is not defined");
                Operand& o = prog.instructions[ref.instr].operands[ref.slot];
                o.kind = OperandKind::Imm;
                o.imm = static_cast<int64_t>(it->second);
            }
        }

        // every reachable path must end in halt or ret; catching the plain
        // fall-off-the-end cases statically keeps corpus mistakes loud
        const Instruction& last = prog.instructions.back();
        if (last.op != Opcode::Halt && last.op != Opcode::Ret && last.op != Opcode::Jmp)
            throw AsmError(AsmError::Kind::Structure, last.line, 1,
                           "control can fall off the end of the program (last instruction must "
                           "be halt, ret, or jmp)");
        prog.entry = 0;
    }
};

} // namespace detail

inline Program assemble(std::string_view source) {
    detail::Assembler as;
    return as.run(source);
}

} // namespace ctmix
