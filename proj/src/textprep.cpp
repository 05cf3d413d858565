#include "gxs/textprep.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "gxs/corpus.hpp"
#include "gxs/error.hpp"

namespace gxs {

namespace {

const icu::Normalizer2& nfkc_casefold() {
  static const icu::Normalizer2* instance = [] {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* n = icu::Normalizer2::getNFKCCasefoldInstance(status);
    if (U_FAILURE(status) || n == nullptr) {
      throw Error(ErrorCode::BadParam, "ICU NFKC_Casefold data unavailable");
    }
    return n;
  }();
  return *instance;
}

void append_utf8(std::string& out, char32_t cp) {
  char buf[U8_MAX_LENGTH];
  int32_t len = 0;
  UBool error = false;
  U8_APPEND(buf, len, U8_MAX_LENGTH, static_cast<UChar32>(cp), error);
  if (!error) out.append(buf, static_cast<std::size_t>(len));
}

}  // namespace

std::u32string to_utf32(std::string_view utf8) {
  std::u32string out;
  out.reserve(utf8.size());
  const auto* s = reinterpret_cast<const uint8_t*>(utf8.data());
  const auto length = static_cast<int32_t>(utf8.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c = 0;
    U8_NEXT(s, i, length, c);
    out.push_back(c < 0 ? U'\uFFFD' : static_cast<char32_t>(c));
  }
  return out;
}

std::string to_utf8(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t cp : text) append_utf8(out, cp);
  return out;
}

std::string truncate_utf8(std::string_view text, std::size_t max_chars, bool* truncated) {
  const auto* s = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  std::size_t count = 0;
  while (i < length && count < max_chars) {
    U8_FWD_1(s, i, length);
    ++count;
  }
  if (truncated != nullptr) *truncated = i < length;
  return std::string(text.substr(0, static_cast<std::size_t>(i)));
}

std::string normalize(std::string_view text) {
  if (text.empty()) return {};
  UErrorCode status = U_ZERO_ERROR;
  const icu::UnicodeString source = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  const icu::UnicodeString folded = nfkc_casefold().normalize(source, status);
  if (U_FAILURE(status)) return {};

  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (int32_t i = 0; i < folded.length();) {
    const UChar32 c = folded.char32At(i);
    i += U16_LENGTH(c);
    if (u_isalnum(c)) {
      if (pending_space && !out.empty()) out.push_back(' ');
      pending_space = false;
      append_utf8(out, static_cast<char32_t>(c));
    } else {
      pending_space = true;
    }
  }
  return out;
}

TokenList tokenize(std::string_view text) {
  const std::string norm = normalize(text);
  TokenList tokens;
  std::size_t start = 0;
  while (start < norm.size()) {
    std::size_t end = norm.find(' ', start);
    if (end == std::string::npos) end = norm.size();
    std::string_view tok(norm.data() + start, end - start);
    // Length counted in code points; a single multi-byte letter is still one.
    std::size_t cps = 0;
    for (unsigned char ch : tok) cps += (ch & 0xC0) != 0x80 ? 1 : 0;
    if (cps >= 2) tokens.emplace_back(tok);
    start = end + 1;
  }
  return tokens;
}

std::string doc_text(const Workflow& w, const FieldConfig& cfg) {
  if (!cfg.valid()) throw Error(ErrorCode::BadParam, "FieldConfig enables no field");
  std::string out;
  bool first = true;
  auto add = [&](std::string_view part) {
    if (!first) out += ". ";
    out += part;
    first = false;
  };
  if (cfg.use_title) add(w.title);
  if (cfg.use_description) add(w.description);
  if (cfg.use_tools) {
    std::string joined;
    for (std::size_t i = 0; i < w.tools.size(); ++i) {
      if (i > 0) joined += ' ';
      joined += w.tools[i];
    }
    add(joined);
  }
  return out;
}

}  // namespace gxs
