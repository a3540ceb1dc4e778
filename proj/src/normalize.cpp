#include "tgqa/text/normalize.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

namespace tgqa::text {

namespace {

bool is_punct_or_symbol(UChar32 c) {
  const int8_t type = u_charType(c);
  switch (type) {
    case U_DASH_PUNCTUATION:
    case U_START_PUNCTUATION:
    case U_END_PUNCTUATION:
    case U_CONNECTOR_PUNCTUATION:
    case U_OTHER_PUNCTUATION:
    case U_INITIAL_PUNCTUATION:
    case U_FINAL_PUNCTUATION:
    case U_MATH_SYMBOL:
    case U_CURRENCY_SYMBOL:
    case U_MODIFIER_SYMBOL:
    case U_OTHER_SYMBOL:
      return true;
    default:
      return false;
  }
}

bool is_digit(UChar32 c) { return c >= '0' && c <= '9'; }

void append_utf8(std::string& out, UChar32 c) {
  char buf[U8_MAX_LENGTH];
  int32_t len = 0;
  UBool error = false;
  U8_APPEND(buf, len, U8_MAX_LENGTH, c, error);
  if (!error) out.append(buf, static_cast<std::size_t>(len));
}

}  // namespace

std::u32string to_code_points(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  const auto* s = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c = 0;
    U8_NEXT(s, i, length, c);
    out.push_back(c < 0 ? U'�' : static_cast<char32_t>(c));
  }
  return out;
}

std::string to_utf8(std::u32string_view code_points) {
  std::string out;
  for (char32_t c : code_points) append_utf8(out, static_cast<UChar32>(c));
  return out;
}

std::vector<std::string> normalize_tokenize(std::string_view text) {
  const std::u32string cps = to_code_points(text);
  std::vector<std::string> tokens;
  std::string current;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const auto c = static_cast<UChar32>(cps[i]);
    if (u_isUWhiteSpace(c)) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
      continue;
    }
    if (is_punct_or_symbol(c)) {
      const bool keep = (c == U'/' || c == U'.' || c == U',') && i > 0 && i + 1 < cps.size() &&
                        is_digit(static_cast<UChar32>(cps[i - 1])) &&
                        is_digit(static_cast<UChar32>(cps[i + 1]));
      if (!keep) continue;
    }
    append_utf8(current, u_tolower(c));
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::string normalize(std::string_view text) {
  std::string out;
  for (const auto& tok : normalize_tokenize(text)) {
    if (!out.empty()) out.push_back(' ');
    out += tok;
  }
  return out;
}

}  // namespace tgqa::text
