#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace gxs {

struct Workflow;

using TokenList = std::vector<std::string>;

/// Which workflow fields feed the retrievable document text.
struct FieldConfig {
  bool use_title = true;
  bool use_description = true;
  bool use_tools = true;

  /// At least one field must be enabled.
  bool valid() const noexcept { return use_title || use_description || use_tools; }

  bool operator==(const FieldConfig&) const = default;
};

/// NFKC case-folded; every non-alphanumeric code point becomes a space; runs
/// of spaces collapse; trimmed. Invalid UTF-8 sequences are treated as
/// separators.
std::string normalize(std::string_view text);

/// normalize() then split on spaces, dropping tokens shorter than 2 code points.
TokenList tokenize(std::string_view text);

/// Enabled fields in order title, description, tools, joined by ". ".
/// Throws BadParam when cfg enables no field.
std::string doc_text(const Workflow& w, const FieldConfig& cfg = {});

/// UTF-8 <-> code point helpers shared by the fuzzy matcher and hash embedder.
std::u32string to_utf32(std::string_view utf8);
std::string to_utf8(std::u32string_view text);

/// Truncates to at most `max_chars` code points without splitting a sequence.
std::string truncate_utf8(std::string_view text, std::size_t max_chars, bool* truncated = nullptr);

}  // namespace gxs
