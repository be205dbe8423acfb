#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "nmsoc/common.hpp"

namespace nmsoc::fabric {

/// 32-bit instruction word: opcode in bits 0..7, operands above it. Unused
/// bits must be zero, so encode and decode are mutually inverse.
enum class Opcode : std::uint8_t {
    InitParams = 1,
    CoreEnable = 2,
    NetworkStart = 3,
    Sleep = 4,
    WakeOnTimestep = 5,
    WakeOnFinish = 6,
    ReadOutput = 7,
};

inline constexpr std::uint8_t kAllCores = 0xFF;

struct InitParams {
    std::uint8_t core = kAllCores; // core index, or kAllCores
    bool operator==(const InitParams&) const = default;
};
struct CoreEnable {
    std::uint8_t core = 0;
    bool operator==(const CoreEnable&) const = default;
};
struct NetworkStart {
    std::uint8_t networks = 0; // bit i starts network i
    bool operator==(const NetworkStart&) const = default;
};
struct Sleep {
    bool operator==(const Sleep&) const = default;
};
struct WakeOnTimestep {
    bool operator==(const WakeOnTimestep&) const = default;
};
struct WakeOnFinish {
    bool operator==(const WakeOnFinish&) const = default;
};
struct ReadOutput {
    std::uint8_t buffer = 0;
    bool operator==(const ReadOutput&) const = default;
};

using Instruction =
    std::variant<InitParams, CoreEnable, NetworkStart, Sleep, WakeOnTimestep, WakeOnFinish, ReadOutput>;

class DecodeError : public Error {
public:
    DecodeError(std::uint32_t word, const std::string& message);
    std::uint32_t word() const { return word_; }

private:
    std::uint32_t word_;
};

std::uint32_t encode(const Instruction& instruction);
Instruction decode(std::uint32_t word);

std::string to_string(const Instruction& instruction);
/// Parses the text form produced by to_string, e.g. `core_enable 3`.
Instruction parse_instruction(const std::string& text);

std::vector<std::uint32_t> encode_program(const std::vector<Instruction>& program);
std::vector<Instruction> decode_program(const std::vector<std::uint32_t>& words);

} // namespace nmsoc::fabric
