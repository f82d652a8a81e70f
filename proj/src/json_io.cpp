#include "json_io.hpp"

#include <algorithm>

namespace reg::json_io {

void expect_keys(const json& j, std::string_view context,
                 std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) {
    fail(ErrorKind::kParse, std::string(context) + ": expected an object");
  }
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      fail(ErrorKind::kParse, "unknown field '" + where(context, key) + "'");
    }
  }
}

const json& field(const json& j, std::string_view key,
                  std::string_view context) {
  auto it = j.find(key);
  if (it == j.end()) {
    fail(ErrorKind::kParse, "missing field '" + where(context, key) + "'");
  }
  return *it;
}

std::string string_field(const json& j, std::string_view key,
                         std::string_view context) {
  const json& v = field(j, key, context);
  if (!v.is_string()) {
    fail(ErrorKind::kParse, "'" + where(context, key) + "' must be a string");
  }
  return v.get<std::string>();
}

double number_field(const json& j, std::string_view key,
                    std::string_view context) {
  const json& v = field(j, key, context);
  if (!v.is_number()) {
    fail(ErrorKind::kParse, "'" + where(context, key) + "' must be a number");
  }
  return v.get<double>();
}

long long integer_field(const json& j, std::string_view key,
                        std::string_view context) {
  const json& v = field(j, key, context);
  if (!v.is_number_integer()) {
    fail(ErrorKind::kParse,
         "'" + where(context, key) + "' must be an integer");
  }
  return v.get<long long>();
}

json parse(std::string_view text, std::string_view what) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    fail(ErrorKind::kParse,
         "malformed " + std::string(what) + " document: " + e.what());
  }
}

json content_to_json(const DescriptionContent& content) {
  json attrs = json::array();
  for (const auto& [name, value] : content.attributes) {
    attrs.push_back(json::array({name, value}));
  }
  json out = json::object();
  out["attributes"] = std::move(attrs);
  if (content.has_relation()) {
    out["relation"] = {{"label", content.relation_label()},
                       {"landmark", content_to_json(content.landmark())}};
  } else {
    out["relation"] = nullptr;
  }
  return out;
}

DescriptionContent content_from_json(const json& j, std::string_view context) {
  expect_keys(j, context, {"attributes", "relation"});
  DescriptionContent content;
  const json& attrs = field(j, "attributes", context);
  if (!attrs.is_array()) {
    fail(ErrorKind::kParse, where(context, "attributes") + " must be an array");
  }
  for (const json& pair : attrs) {
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() ||
        !pair[1].is_string()) {
      fail(ErrorKind::kParse, where(context, "attributes") +
                                  ": entries must be [name, value] pairs");
    }
    auto name = pair[0].get<std::string>();
    auto value = pair[1].get<std::string>();
    if (value.empty()) {
      fail(ErrorKind::kValidation,
           std::string(context) + ": empty value for '" + name + "'");
    }
    if (!content.attributes.emplace(name, value).second) {
      fail(ErrorKind::kValidation, std::string(context) + ": attribute '" +
                                       name + "' appears twice in one level");
    }
  }
  auto rel = j.find("relation");
  if (rel != j.end() && !rel->is_null()) {
    std::string rel_ctx = where(context, "relation");
    expect_keys(*rel, rel_ctx, {"label", "landmark"});
    std::string label = string_field(*rel, "label", rel_ctx);
    content.set_relation(
        label, content_from_json(field(*rel, "landmark", rel_ctx),
                                 where(rel_ctx, "landmark")));
  }
  return content;
}

}  // namespace reg::json_io
