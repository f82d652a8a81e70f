#pragma once

#include "json.hpp"
#include "reg/regmodel.hpp"

namespace reg::json_io {

nlohmann::json grid_record_to_json(const GridRecord& record);

}  // namespace reg::json_io
