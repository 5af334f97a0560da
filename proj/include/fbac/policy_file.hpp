#pragma once

#include "fbac/tensor.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace fbac {

// Line-oriented policy text:
//
//   SUBJECT <id>
//   FUNCTION <id> <arity>
//   OBJECT <id>
//   ENTRY <subject> <function> <obj1[,obj2,...]|-> <FALSE|TRUE|TRUE_RE:<pattern>|TRUE_PROG:<name>>
//
// `#` at the start of a token begins a comment. A TRUE_RE pattern runs to the end
// of the line (trailing whitespace trimmed), so it may itself contain `#`.
// Declarations are applied before entries regardless of their position.

/// Merges `text` into `t`. Re-declaring an existing subject/object, or a function
/// with the same arity, is accepted. Errors carry "<source>:<line>:".
void load_policy(AccessTensor& t, std::string_view text, std::string_view source = "<policy>");

AccessTensor parse_policy(std::string_view text, std::string_view source = "<policy>");

AccessTensor load_policy_file(const std::filesystem::path& path);
void load_policy_file(AccessTensor& t, const std::filesystem::path& path);

/// Declarations then entries, each group sorted; parse_policy(serialize_policy(t)) == t.
std::string serialize_policy(const AccessTensor& t);

std::string read_file(const std::filesystem::path& path);

}  // namespace fbac
