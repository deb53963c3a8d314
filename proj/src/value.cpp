// SPDX-License-Identifier: Apache-2.0

#include "protomon/value.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace protomon {

namespace {

const std::string& required_string(const Record& fields, std::string_view key) {
  auto it = fields.find(key);
  if (it == fields.end()) {
    throw EventError("event is missing required key '" + std::string(key) + "'");
  }
  const Atom* a = it->second.atom();
  const std::string* s = a ? std::get_if<std::string>(a) : nullptr;
  if (!s || s->empty()) {
    throw EventError("event key '" + std::string(key) + "' must be a non-empty string");
  }
  return *s;
}

std::string format_number(double d) {
  if (std::isfinite(d) && std::floor(d) == d && std::fabs(d) < 1e15) {
    return std::to_string(static_cast<long long>(d));
  }
  std::ostringstream out;
  out.precision(std::numeric_limits<double>::max_digits10);
  out << d;
  return out.str();
}

Atom atom_from_json(const nlohmann::json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number()) return j.get<double>();
  throw EventError("expected a string, number or boolean, got " + std::string(j.type_name()));
}

}  // namespace

Event::Event(Record fields) : fields_(std::move(fields)) {
  for (const auto& [key, _] : fields_) {
    if (key.empty()) throw EventError("event record has an empty key");
  }
  required_string(fields_, "performative");
  required_string(fields_, "sender");
  required_string(fields_, "receiver");
  if (auto it = fields_.find("content"); it != fields_.end() && !it->second.record()) {
    throw EventError("event key 'content' must be an object");
  }
}

const std::string& Event::performative() const { return required_string(fields_, "performative"); }
const std::string& Event::sender() const { return required_string(fields_, "sender"); }
const std::string& Event::receiver() const { return required_string(fields_, "receiver"); }

std::string to_source(const Atom& atom) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::string>) {
          std::string out = "'";
          for (char c : v) {
            if (c == '\\' || c == '\'') out += '\\';
            out += c;
          }
          return out + "'";
        } else if constexpr (std::is_same_v<T, bool>) {
          return v ? "true" : "false";
        } else {
          return format_number(v);
        }
      },
      atom);
}

std::string to_display(const Atom& atom) {
  if (const auto* s = std::get_if<std::string>(&atom)) return *s;
  return to_source(atom);
}

std::optional<Atom> element_at(const Value& value, std::size_t index) {
  if (const Atom* a = value.atom()) {
    if (index == 0) return *a;
    return std::nullopt;
  }
  if (const ValueList* l = value.list()) {
    if (index < l->size()) return (*l)[index];
  }
  return std::nullopt;
}

nlohmann::json to_json(const Atom& atom) {
  return std::visit(
      [](const auto& v) -> nlohmann::json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          if (std::isfinite(v) && std::floor(v) == v && std::fabs(v) < 1e15) {
            return static_cast<long long>(v);
          }
          return v;
        } else {
          return v;
        }
      },
      atom);
}

nlohmann::json to_json(const Value& value) {
  if (const Atom* a = value.atom()) return to_json(*a);
  if (const ValueList* l = value.list()) {
    auto arr = nlohmann::json::array();
    for (const auto& a : *l) arr.push_back(to_json(a));
    return arr;
  }
  auto obj = nlohmann::json::object();
  for (const auto& [k, v] : *value.record()) obj[k] = to_json(v);
  return obj;
}

nlohmann::json to_json(const Event& event) { return to_json(Value(event.fields())); }

Value value_from_json(const nlohmann::json& j) {
  if (j.is_object()) {
    Record rec;
    for (const auto& [k, v] : j.items()) {
      if (k.empty()) throw EventError("record keys must be non-empty");
      rec.emplace(k, value_from_json(v));
    }
    return rec;
  }
  if (j.is_array()) {
    ValueList list;
    for (const auto& v : j) {
      if (v.is_array() || v.is_object()) {
        throw EventError("list elements must be strings, numbers or booleans");
      }
      list.push_back(atom_from_json(v));
    }
    return list;
  }
  return atom_from_json(j);
}

Event event_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw EventError("event must be a JSON object");
  Value v = value_from_json(j);
  return Event(std::move(std::get<Record>(v.data)));
}

Event event_from_json_text(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw EventError(std::string("invalid JSON: ") + e.what());
  }
  return event_from_json(j);
}

}  // namespace protomon
