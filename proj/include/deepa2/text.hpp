#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace deepa2::text {

// Collapses every run of whitespace to a single space and trims both ends.
std::string normalize_ws(std::string_view s);

std::string trim(std::string_view s);

bool starts_with(std::string_view s, std::string_view prefix);
bool ends_with(std::string_view s, std::string_view suffix);

std::vector<std::string> split(std::string_view s, char sep);
std::vector<std::string> split_ws(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Lowercased alphanumeric word tokens; punctuation is dropped.
std::vector<std::string> word_tokens(std::string_view s);

// F1 between the unigram multisets of two token lists. Two empty lists score 1.
double token_f1(const std::vector<std::string>& a, const std::vector<std::string>& b);
double token_f1(std::string_view a, std::string_view b);

std::string capitalize_first(std::string_view s);
std::string lowercase_first(std::string_view s);

// Splits a file into logical lines, dropping '#' comments and blank lines.
std::vector<std::string> data_lines(std::string_view content);

}  // namespace deepa2::text
