#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tgqa::text {

/// Lowercases, strips Unicode punctuation and symbols (P* and S*), and splits
/// on whitespace. "/", "." and "," survive when both neighbours are digits so
/// that "3.5", "1,200" and "02/09/2010" stay intact.
std::vector<std::string> normalize_tokenize(std::string_view text);

/// The tokens of `text` re-joined with single spaces.
std::string normalize(std::string_view text);

/// Decodes UTF-8 into code points; invalid sequences become U+FFFD.
std::u32string to_code_points(std::string_view text);

std::string to_utf8(std::u32string_view code_points);

}  // namespace tgqa::text
