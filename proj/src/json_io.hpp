#pragma once

// Shared helpers for the strict JSON documents (corpus, model, run record).

#include <initializer_list>
#include <string>
#include <string_view>

#include "json.hpp"
#include "reg/corpus.hpp"
#include "reg/error.hpp"

namespace reg::json_io {

using nlohmann::json;

inline std::string where(std::string_view context, std::string_view key) {
  return std::string(context) + "." + std::string(key);
}

// Rejects any key outside `allowed`, and requires the value to be an object.
void expect_keys(const json& j, std::string_view context,
                 std::initializer_list<std::string_view> allowed);

const json& field(const json& j, std::string_view key, std::string_view context);

std::string string_field(const json& j, std::string_view key,
                         std::string_view context);
double number_field(const json& j, std::string_view key,
                    std::string_view context);
long long integer_field(const json& j, std::string_view key,
                        std::string_view context);

json parse(std::string_view text, std::string_view what);

json content_to_json(const DescriptionContent& content);
DescriptionContent content_from_json(const json& j, std::string_view context);

}  // namespace reg::json_io
