#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace elm {

/// Shortest decimal that round-trips to the same double ('.' separator).
std::string format_real(double value);

/// Minimal CSV emitter: comma separated, '\n' line endings, no quoting
/// (every field we write is numeric or a bare identifier).
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}

  void header(const std::vector<std::string>& names) { row(names); }
  void row(const std::vector<std::string>& fields);

 private:
  std::ostream& os_;
};

}  // namespace elm
