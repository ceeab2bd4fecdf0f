#include "bqpt/kv_config.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "bqpt/errors.hpp"

namespace bqpt {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

KeyValues read_key_values(std::istream& in, const std::string& origin) {
  KeyValues values;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string key = eq == std::string::npos ? std::string() : trim(line.substr(0, eq));
    if (key.empty()) {
      throw DomainError(origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    values[key] = trim(line.substr(eq + 1));
  }
  return values;
}

KeyValues read_key_values_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  return read_key_values(in, path);
}

void write_key_values(std::ostream& out,
                      const std::vector<std::pair<std::string, std::string>>& entries) {
  for (const auto& [key, value] : entries) out << key << " = " << value << '\n';
}

std::string format_double(double value) {
  std::ostringstream out;
  out << std::setprecision(17) << value;
  return out.str();
}

}  // namespace bqpt
