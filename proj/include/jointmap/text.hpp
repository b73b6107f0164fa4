#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace jointmap {

// Lowercases ASCII and splits on whitespace.
std::vector<std::string> tokenize(std::string_view text);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Splits on a single character, keeping empty fields.
std::vector<std::string> split(std::string_view text, char sep);

}  // namespace jointmap
