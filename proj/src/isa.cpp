#include "nmsoc/isa.hpp"

#include <charconv>
#include <sstream>

namespace nmsoc::fabric {
namespace {

std::string hex(std::uint32_t word)
{
    std::ostringstream out;
    out << "0x" << std::hex << word;
    return out.str();
}

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};

std::uint32_t pack(Opcode op, std::uint32_t operand = 0)
{
    return static_cast<std::uint32_t>(op) | (operand << 8);
}

int parse_operand(const std::string& text, const std::string& token)
{
    const bool is_hex = token.starts_with("0x");
    const char* first = token.data() + (is_hex ? 2 : 0);
    const char* last = token.data() + token.size();
    int value = 0;
    auto [ptr, ec] = std::from_chars(first, last, value, is_hex ? 16 : 10);
    if (ec != std::errc() || ptr != last || first == last || value < 0 || value > 255) {
        throw std::invalid_argument("bad operand '" + token + "' in instruction '" + text + "'");
    }
    return value;
}

} // namespace

DecodeError::DecodeError(std::uint32_t word, const std::string& message)
    : Error("cannot decode instruction " + hex(word) + ": " + message), word_(word)
{
}

std::uint32_t encode(const Instruction& instruction)
{
    return std::visit(Overloaded{
        [](const InitParams& i) { return pack(Opcode::InitParams, i.core); },
        [](const CoreEnable& i) { return pack(Opcode::CoreEnable, i.core); },
        [](const NetworkStart& i) {
            if (i.networks > 0xF) {
                throw std::invalid_argument("network mask has bits beyond the four networks");
            }
            return pack(Opcode::NetworkStart, i.networks);
        },
        [](const Sleep&) { return pack(Opcode::Sleep); },
        [](const WakeOnTimestep&) { return pack(Opcode::WakeOnTimestep); },
        [](const WakeOnFinish&) { return pack(Opcode::WakeOnFinish); },
        [](const ReadOutput& i) {
            if (i.buffer > 3) {
                throw std::invalid_argument("output buffer index must be 0..3");
            }
            return pack(Opcode::ReadOutput, i.buffer);
        },
    }, instruction);
}

Instruction decode(std::uint32_t word)
{
    const auto op = word & 0xFF;
    const auto operand = word >> 8;
    auto require_operand_bits = [&](std::uint32_t mask) {
        if ((operand & ~mask) != 0) {
            throw DecodeError(word, "reserved operand bits set");
        }
    };
    switch (op) {
    case 0:
        throw DecodeError(word, "opcode 0 is reserved");
    case static_cast<std::uint32_t>(Opcode::InitParams):
        require_operand_bits(0xFF);
        return InitParams{static_cast<std::uint8_t>(operand)};
    case static_cast<std::uint32_t>(Opcode::CoreEnable):
        require_operand_bits(0xFF);
        return CoreEnable{static_cast<std::uint8_t>(operand)};
    case static_cast<std::uint32_t>(Opcode::NetworkStart):
        require_operand_bits(0xF);
        return NetworkStart{static_cast<std::uint8_t>(operand)};
    case static_cast<std::uint32_t>(Opcode::Sleep):
        require_operand_bits(0);
        return Sleep{};
    case static_cast<std::uint32_t>(Opcode::WakeOnTimestep):
        require_operand_bits(0);
        return WakeOnTimestep{};
    case static_cast<std::uint32_t>(Opcode::WakeOnFinish):
        require_operand_bits(0);
        return WakeOnFinish{};
    case static_cast<std::uint32_t>(Opcode::ReadOutput):
        require_operand_bits(0x3);
        return ReadOutput{static_cast<std::uint8_t>(operand)};
    default:
        throw DecodeError(word, "unknown opcode " + std::to_string(op));
    }
}

std::string to_string(const Instruction& instruction)
{
    return std::visit(Overloaded{
        [](const InitParams& i) {
            return i.core == kAllCores ? std::string("init_params all") : "init_params " + std::to_string(i.core);
        },
        [](const CoreEnable& i) { return "core_enable " + std::to_string(i.core); },
        [](const NetworkStart& i) { return "network_start " + std::to_string(i.networks); },
        [](const Sleep&) { return std::string("sleep"); },
        [](const WakeOnTimestep&) { return std::string("wake_on_timestep"); },
        [](const WakeOnFinish&) { return std::string("wake_on_finish"); },
        [](const ReadOutput& i) { return "read_output " + std::to_string(i.buffer); },
    }, instruction);
}

Instruction parse_instruction(const std::string& text)
{
    std::istringstream in(text);
    std::string name;
    std::string arg;
    in >> name >> arg;
    std::string extra;
    if (in >> extra) {
        throw std::invalid_argument("trailing text in instruction '" + text + "'");
    }
    auto needs_arg = [&] {
        if (arg.empty()) {
            throw std::invalid_argument("instruction '" + text + "' needs an operand");
        }
    };
    auto no_arg = [&] {
        if (!arg.empty()) {
            throw std::invalid_argument("instruction '" + name + "' takes no operand");
        }
    };
    if (name == "init_params") {
        if (arg.empty() || arg == "all") {
            return InitParams{};
        }
        return InitParams{static_cast<std::uint8_t>(parse_operand(text, arg))};
    }
    if (name == "core_enable") {
        needs_arg();
        return CoreEnable{static_cast<std::uint8_t>(parse_operand(text, arg))};
    }
    if (name == "network_start") {
        needs_arg();
        return NetworkStart{static_cast<std::uint8_t>(parse_operand(text, arg))};
    }
    if (name == "sleep") {
        no_arg();
        return Sleep{};
    }
    if (name == "wake_on_timestep") {
        no_arg();
        return WakeOnTimestep{};
    }
    if (name == "wake_on_finish") {
        no_arg();
        return WakeOnFinish{};
    }
    if (name == "read_output") {
        needs_arg();
        return ReadOutput{static_cast<std::uint8_t>(parse_operand(text, arg))};
    }
    throw std::invalid_argument("unknown instruction '" + name + "'");
}

std::vector<std::uint32_t> encode_program(const std::vector<Instruction>& program)
{
    std::vector<std::uint32_t> words;
    words.reserve(program.size());
    for (const auto& i : program) {
        words.push_back(encode(i));
    }
    return words;
}

std::vector<Instruction> decode_program(const std::vector<std::uint32_t>& words)
{
    std::vector<Instruction> program;
    program.reserve(words.size());
    for (auto w : words) {
        program.push_back(decode(w));
    }
    return program;
}

} // namespace nmsoc::fabric
