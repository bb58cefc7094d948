#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>
#include <unordered_map>

#include "cutofflab/data_model.hpp"
#include "cutofflab/error.hpp"

namespace cutofflab {
namespace {

// Splits one line into fields. Double-quoted fields may contain commas and
// "" escapes; no embedded newlines.
std::vector<std::string> split_fields(std::string_view line, std::size_t row) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) throw ParseError("row " + std::to_string(row) + ": unterminated quote");
  fields.push_back(std::move(cur));
  return fields;
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

class RowParser {
 public:
  RowParser(std::size_t row, const std::vector<std::string>& fields, const std::vector<std::size_t>& index)
      : row_(row), fields_(fields), index_(index) {}

  const std::string& raw(std::size_t col) const { return fields_[index_[col]]; }

  std::string text(std::size_t col) const { return trim(raw(col)); }

  int integer(std::size_t col) const {
    auto v = optional_integer(col);
    if (!v) fail(col, "required value is empty");
    return *v;
  }

  std::optional<int> optional_integer(std::size_t col) const {
    const std::string t = text(col);
    if (t.empty()) return std::nullopt;
    int v = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || p != t.data() + t.size()) fail(col, "not an integer: '" + t + "'");
    return v;
  }

  double number(std::size_t col) const {
    const std::string t = text(col);
    if (t.empty()) fail(col, "required value is empty");
    double v = 0.0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || p != t.data() + t.size()) fail(col, "not a number: '" + t + "'");
    return v;
  }

  bool flag(std::size_t col) const {
    const std::string t = text(col);
    if (t == "0") return false;
    if (t == "1") return true;
    fail(col, "boolean must be 0 or 1, got '" + t + "'");
  }

  [[noreturn]] void fail(std::size_t col, const std::string& what) const {
    throw ParseError("row " + std::to_string(row_) + ", column " + csv_columns()[col] + ": " + what);
  }

 private:
  std::size_t row_;
  const std::vector<std::string>& fields_;
  const std::vector<std::size_t>& index_;
};

enum Col : std::size_t {
  kAthlete,
  kEvent,
  kSeason,
  kRegime,
  kQualRank,
  kPreRank,
  kDistance,
  kStyle,
  kTotal,
  kAdvanced,
  kWcPoints,
  kPrevRank,
  kHome,
  kNumCols
};

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

}  // namespace

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = {
      "athlete_id",         "event_id",   "season",           "regime",
      "qual_rank_nominal",  "pre_event_rank", "round1_distance_points", "round1_style_points",
      "round1_total",       "advanced",   "wc_points_before", "previous_event_rank",
      "home_event"};
  return cols;
}

LoadResult parse_csv(std::string_view text, std::string provenance, const CsvOptions& options) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw SchemaError("csv: missing header row");

  std::string_view header_line = lines.front();
  if (header_line.starts_with("\xEF\xBB\xBF")) header_line.remove_prefix(3);
  const auto header = split_fields(header_line, 1);
  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < header.size(); ++i) position[trim(header[i])] = i;

  std::vector<std::size_t> index(kNumCols);
  for (std::size_t c = 0; c < kNumCols; ++c) {
    auto it = position.find(csv_columns()[c]);
    if (it == position.end()) throw SchemaError("csv: missing column '" + csv_columns()[c] + "'");
    index[c] = it->second;
  }

  LoadResult result;
  std::vector<JumpRecord> records;
  records.reserve(lines.size());
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::size_t row = li + 1;  // 1-based line number in the file
    if (trim(lines[li]).empty()) continue;
    try {
      const auto fields = split_fields(lines[li], row);
      if (fields.size() != header.size()) {
        throw ParseError("row " + std::to_string(row) + ": expected " + std::to_string(header.size()) +
                         " fields, found " + std::to_string(fields.size()));
      }
      RowParser p(row, fields, index);
      JumpRecord r;
      r.athlete_id = p.text(kAthlete);
      r.event_id = p.text(kEvent);
      if (r.athlete_id.empty()) p.fail(kAthlete, "required value is empty");
      if (r.event_id.empty()) p.fail(kEvent, "required value is empty");
      r.season = p.integer(kSeason);
      try {
        r.regime = parse_regime(p.text(kRegime));
      } catch (const ParseError& e) {
        p.fail(kRegime, e.what());
      }
      r.qual_rank_nominal = p.optional_integer(kQualRank);
      r.pre_event_rank = p.integer(kPreRank);
      r.round1_distance_points = p.number(kDistance);
      r.round1_style_points = p.number(kStyle);
      r.round1_total = p.number(kTotal);
      r.advanced = p.flag(kAdvanced);
      r.wc_points_before = p.number(kWcPoints);
      r.previous_event_rank = p.optional_integer(kPrevRank);
      r.home_event = p.flag(kHome);
      try {
        validate_record(r);
      } catch (const InvariantError& e) {
        throw InvariantError("row " + std::to_string(row) + ": " + e.what());
      }
      records.push_back(std::move(r));
    } catch (const Error& e) {
      if (options.strict) throw;
      result.rejected.emplace_back(e.what());
    }
  }
  result.dataset = Dataset(std::move(records), std::move(provenance));
  return result;
}

LoadResult load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), path.string(), options);
}

std::string to_csv(const Dataset& ds) {
  std::string out;
  for (std::size_t c = 0; c < kNumCols; ++c) {
    if (c) out += ',';
    out += csv_columns()[c];
  }
  out += '\n';
  for (const JumpRecord& r : ds.records()) {
    out += quote_if_needed(r.athlete_id);
    out += ',';
    out += quote_if_needed(r.event_id);
    out += ',';
    out += std::to_string(r.season);
    out += ',';
    out += to_string(r.regime);
    out += ',';
    if (r.qual_rank_nominal) out += std::to_string(*r.qual_rank_nominal);
    out += ',';
    out += std::to_string(r.pre_event_rank);
    out += ',';
    out += format_double(r.round1_distance_points);
    out += ',';
    out += format_double(r.round1_style_points);
    out += ',';
    out += format_double(r.round1_total);
    out += ',';
    out += r.advanced ? '1' : '0';
    out += ',';
    out += format_double(r.wc_points_before);
    out += ',';
    if (r.previous_event_rank) out += std::to_string(*r.previous_event_rank);
    out += ',';
    out += r.home_event ? '1' : '0';
    out += '\n';
  }
  return out;
}

void write_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << to_csv(ds);
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace cutofflab
