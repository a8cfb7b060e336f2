#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace gseo::text {

std::string trim(std::string_view s);

/// Collapses every run of whitespace to one space and trims the ends.
std::string collapse_whitespace(std::string_view s);

std::string to_lower(std::string_view s);

/// Lowercase alphanumeric tokens; everything else separates.
std::vector<std::string> tokenize(std::string_view s);
std::set<std::string> token_set(std::string_view s);

/// |a ∩ b| / |a ∪ b|; two empty sets are identical (1.0).
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

std::string sha256_hex(std::string_view data);

/// Orders "q2" before "q10": digit runs compare numerically.
bool natural_less(std::string_view a, std::string_view b);

/// Drops the scheme and trailing slashes and lowercases the host.
std::string normalize_url(std::string_view url);

/// Text between the first <tag> and the matching </tag>, or empty when absent.
std::string extract_tagged(std::string_view text, std::string_view tag);

std::size_t count_occurrences(std::string_view haystack, std::string_view needle);

/// Replaces {{name}} placeholders. Throws ValidationError on an unknown name.
std::string render(std::string_view tmpl, const std::map<std::string, std::string>& vars);

std::vector<std::string> split_lines(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace gseo::text
