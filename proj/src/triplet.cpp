#include "peeroc/triplet.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <sstream>

namespace peeroc {

namespace detail {
// Generated at configure time from data/triplets/*.json.
struct EmbeddedTriplet
{
  const char* name;
  const char* document;
};
extern const EmbeddedTriplet kEmbeddedTriplets[];
extern const std::size_t kEmbeddedTripletCount;
}  // namespace detail

namespace {

using nlohmann::json;

int line_of(std::string_view text, std::size_t byte_offset)
{
  byte_offset = std::min(byte_offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte_offset), '\n'));
}

/// Line of the first occurrence of "field": in the document, for diagnostics.
int field_line(std::string_view text, const std::string& field)
{
  const auto pos = text.find("\"" + field + "\"");
  return pos == std::string_view::npos ? 0 : line_of(text, pos);
}

ExactScalar parse_entry(const json& j, const std::string& field, std::string_view text)
{
  if (!j.is_string()) throw TripletParseError(field, "entries must be strings", field_line(text, field));
  try {
    return ExactScalar::parse(j.get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw TripletParseError(field, e.what(), field_line(text, field));
  }
}

ExactVector parse_vector(const json& doc, const std::string& field, int expected, std::string_view text)
{
  if (!doc.contains(field)) throw TripletParseError(field, "missing field");
  const json& arr = doc.at(field);
  if (!arr.is_array()) throw TripletParseError(field, "expected an array", field_line(text, field));
  if (static_cast<int>(arr.size()) != expected)
    throw TripletParseError(field,
                            "expected " + std::to_string(expected) + " entries, got " + std::to_string(arr.size()),
                            field_line(text, field));
  ExactVector out;
  out.reserve(arr.size());
  for (const auto& e : arr) out.push_back(parse_entry(e, field, text));
  return out;
}

ExactMatrix parse_matrix(const json& doc, const std::string& field, int s, std::string_view text)
{
  if (!doc.contains(field)) throw TripletParseError(field, "missing field");
  const json& rows = doc.at(field);
  const int line = field_line(text, field);
  if (!rows.is_array() || static_cast<int>(rows.size()) != s)
    throw TripletParseError(field, "dimension mismatch: expected " + std::to_string(s) + " rows", line);
  ExactMatrix m(s, s);
  for (int i = 0; i < s; ++i) {
    const json& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<int>(row.size()) != s)
      throw TripletParseError(field,
                              "dimension mismatch: row " + std::to_string(i + 1) + " must have " +
                                  std::to_string(s) + " entries",
                              line);
    for (int j = 0; j < s; ++j) m(i, j) = parse_entry(row[static_cast<std::size_t>(j)], field, text);
  }
  return m;
}

int parse_int(const json& doc, const std::string& field, std::string_view text)
{
  if (!doc.contains(field)) throw TripletParseError(field, "missing field");
  const json& j = doc.at(field);
  if (!j.is_number_integer()) throw TripletParseError(field, "expected an integer", field_line(text, field));
  return j.get<int>();
}

json vector_to_json(const ExactVector& v)
{
  json arr = json::array();
  for (const auto& x : v) arr.push_back(x.to_string());
  return arr;
}

json matrix_to_json(const ExactMatrix& m)
{
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j).to_string());
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

TripletParseError::TripletParseError(const std::string& field, const std::string& message, int line)
    : std::runtime_error([&] {
        std::ostringstream os;
        os << "triplet parse error";
        if (line > 0) os << " at line " << line;
        if (!field.empty()) os << " in field '" << field << "'";
        os << ": " << message;
        return os.str();
      }()),
      field_(field),
      line_(line)
{}

bool PeerTriplet::is_rational() const
{
  return std::all_of(c.begin(), c.end(), [](const ExactScalar& x) { return x.is_rational(); }) && A.is_rational() &&
         K.is_rational() && A0.is_rational() && K0.is_rational() && AN.is_rational() && KN.is_rational();
}

const std::vector<std::string>& builtin_triplet_names()
{
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < detail::kEmbeddedTripletCount; ++i) out.emplace_back(detail::kEmbeddedTriplets[i].name);
    return out;
  }();
  return names;
}

PeerTriplet load_triplet(std::string_view name)
{
  for (std::size_t i = 0; i < detail::kEmbeddedTripletCount; ++i)
    if (name == detail::kEmbeddedTriplets[i].name) return parse_triplet(detail::kEmbeddedTriplets[i].document);
  throw UnknownMethodError(std::string(name));
}

std::string triplet_to_text(const PeerTriplet& t)
{
  json doc = json::object();
  doc["name"] = t.name;
  doc["s"] = t.s;
  doc["q1"] = t.q1;
  doc["q2"] = t.q2;
  doc["c"] = vector_to_json(t.c);
  doc["A0"] = matrix_to_json(t.A0);
  doc["K0"] = matrix_to_json(t.K0);
  doc["A"] = matrix_to_json(t.A);
  doc["K"] = matrix_to_json(t.K);
  doc["AN"] = matrix_to_json(t.AN);
  doc["KN"] = matrix_to_json(t.KN);
  return doc.dump(2) + "\n";
}

PeerTriplet parse_triplet(std::string_view text)
{
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw TripletParseError("", e.what(), line_of(text, e.byte));
  }
  if (!doc.is_object()) throw TripletParseError("", "document must be an object", 1);

  PeerTriplet t;
  if (!doc.contains("name") || !doc.at("name").is_string()) throw TripletParseError("name", "missing or not a string");
  t.name = doc.at("name").get<std::string>();
  t.s = parse_int(doc, "s", text);
  if (t.s < 2) throw TripletParseError("s", "stage count must be >= 2", field_line(text, "s"));
  t.q1 = parse_int(doc, "q1", text);
  t.q2 = parse_int(doc, "q2", text);
  t.c = parse_vector(doc, "c", t.s, text);
  t.A0 = parse_matrix(doc, "A0", t.s, text);
  t.K0 = parse_matrix(doc, "K0", t.s, text);
  t.A = parse_matrix(doc, "A", t.s, text);
  t.K = parse_matrix(doc, "K", t.s, text);
  t.AN = parse_matrix(doc, "AN", t.s, text);
  t.KN = parse_matrix(doc, "KN", t.s, text);
  return t;
}

}  // namespace peeroc
