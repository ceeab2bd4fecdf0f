#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace bqpt {

/// Flat `key = value` text: one entry per line, `#` starts a comment, blank
/// lines are ignored. Later duplicates override earlier ones.
using KeyValues = std::map<std::string, std::string>;

KeyValues read_key_values(std::istream& in, const std::string& origin = "<stream>");
KeyValues read_key_values_file(const std::string& path);

void write_key_values(std::ostream& out,
                      const std::vector<std::pair<std::string, std::string>>& entries);

std::string format_double(double value);  // 17 significant digits

}  // namespace bqpt
