#pragma once

#include <bitset>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace fbac::re {

/// Compiled pattern in the engine's POSIX-ERE subset.
///
/// Supported: literals, `.`, bracket expressions (ranges, negation, `[:class:]`),
/// grouping, `|`, `*`, `+`, `?`, `{m}`, `{m,}`, `{m,n}`, `^`/`$` assertions and the
/// escapes `\n`, `\t`, `\r`, `\xHH` plus `\` before any punctuation character.
/// Backreferences are rejected. Matching is byte-oriented and always anchored to
/// the whole subject; `.` matches every byte including newline.
///
/// Evaluation runs a Pike-style NFA simulation, so match time is
/// O(|pattern| * |subject|) with no backtracking.
class Regex {
public:
    /// Throws Error(InvalidPattern) with the offending offset on bad syntax.
    explicit Regex(std::string_view pattern);

    bool full_match(std::string_view subject) const;

    const std::string& pattern() const noexcept { return pattern_; }
    std::size_t program_size() const noexcept { return program_.size(); }

    // Instruction set, exposed for the compiler in regex.cpp.
    enum class Op : std::uint8_t { Byte, Class, Split, Jump, AssertBegin, AssertEnd, Match };
    struct Inst {
        Op op;
        std::uint8_t byte = 0;
        std::uint32_t x = 0;  // Class index, or jump/split target
        std::uint32_t y = 0;  // second split target
    };

private:
    std::string pattern_;
    std::vector<Inst> program_;
    std::vector<std::bitset<256>> classes_;
};

/// Upper bound on compiled program length; counted repetition is expanded.
inline constexpr std::size_t kMaxProgramSize = 200000;

/// Builds a pattern matching the decimal rendering (no leading zeros) of every
/// integer in [0, max_value].
std::string decimal_at_most(std::uint64_t max_value);

/// Escapes `text` so that it matches itself literally.
std::string escape_literal(std::string_view text);

}  // namespace fbac::re
