#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace guided::text {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

// Lowercase, trim, and fold runs of spaces, hyphens and underscores into a
// single '_' so "Palm Press", "palm-press" and "palm_press" compare equal.
std::string normalize_token(std::string_view s);

// Case-insensitive, whitespace-collapsed comparison form.
std::string normalize_phrase(std::string_view s);

bool is_blank(std::string_view s);

std::string read_file(const std::string& path);
std::vector<unsigned char> read_binary_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace guided::text
