// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace protomon {

/// A scalar field value: string, number or boolean. Atoms compare by exact
/// value; strings are case-sensitive.
using Atom = std::variant<std::string, double, bool>;

/// Ordered list of atoms. Encodes a functor chain such as ['answer','result'].
using ValueList = std::vector<Atom>;

struct Value;

/// Keyed record. Keys are non-empty; a key holds exactly one value.
using Record = std::map<std::string, Value, std::less<>>;

struct Value {
  std::variant<Atom, ValueList, Record> data;

  Value() = default;
  Value(Atom a) : data(std::move(a)) {}
  Value(std::string s) : data(Atom{std::move(s)}) {}
  Value(const char* s) : data(Atom{std::string(s)}) {}
  Value(ValueList l) : data(std::move(l)) {}
  Value(Record r) : data(std::move(r)) {}

  const Atom* atom() const { return std::get_if<Atom>(&data); }
  const ValueList* list() const { return std::get_if<ValueList>(&data); }
  const Record* record() const { return std::get_if<Record>(&data); }

  bool operator==(const Value&) const = default;
};

/// Variable name -> bound atom. A variable is never rebound once set.
using Binding = std::map<std::string, Atom, std::less<>>;

class EventError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An observed inter-agent message.
class Event {
 public:
  Event() = default;
  /// Throws EventError unless performative, sender and receiver are present
  /// as non-empty strings.
  explicit Event(Record fields);

  const Record& fields() const { return fields_; }
  const std::string& performative() const;
  const std::string& sender() const;
  const std::string& receiver() const;

  bool operator==(const Event&) const = default;

 private:
  Record fields_;
};

// Quoted form for strings ('x'), plain for numbers and booleans.
std::string to_source(const Atom& atom);
std::string to_display(const Atom& atom);

/// Atom `k` of a field viewed positionally: an atom is a one-element list,
/// a record has no positional elements.
std::optional<Atom> element_at(const Value& value, std::size_t index);

// JSON wire encoding. Integral doubles are written as integers.
nlohmann::json to_json(const Atom& atom);
nlohmann::json to_json(const Value& value);
nlohmann::json to_json(const Event& event);
Value value_from_json(const nlohmann::json& j);
Event event_from_json(const nlohmann::json& j);
Event event_from_json_text(std::string_view text);

}  // namespace protomon
