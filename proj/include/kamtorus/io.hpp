#pragma once

// JSON and CSV serialization. Output is deterministic: fixed key order,
// shortest round-trip doubles, no timestamps.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "kamtorus/diffeo.hpp"
#include "kamtorus/kam.hpp"

namespace kamtorus::io {

using Json = nlohmann::ordered_json;

/// {N, m, K_box, modes: [{k, re, im}]} over modes with lex(k) >= 0 and a
/// nonzero coefficient in some component; re and im have m entries.
Json to_json(const FourierField& u);
/// Inverse of to_json. Hermitian partners are filled in. Throws ConfigError.
FourierField field_from_json(const Json& j);

/// {displacement, inverse} with inverse null when not computed.
Json to_json(const TorusDiffeo& d);
TorusDiffeo diffeo_from_json(const Json& j);

Json to_json(const SchemeConstants& c);
/// Starts from SchemeConstants::defaults(N) and applies the keys present.
/// Unknown keys are rejected. Does not validate.
SchemeConstants constants_from_json(const Json& j, int N);

Json to_json(const StepRecord& s);

/// Modes given as [{k, cos: [..], sin: [..]}]: adds cos/sin amplitudes per
/// component. Missing amplitude lists count as zero.
FourierField field_from_modes(const Json& modes, int dim, int range, int kbox);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void row(const std::vector<std::string>& cells);
  std::string str() const { return text_; }

 private:
  std::size_t columns_;
  std::string text_;
};

/// Shortest decimal that reads back to the same double.
std::string format_double(double v);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const Json& j);
Json read_json(const std::filesystem::path& path);

}  // namespace kamtorus::io
