#pragma once

#include <string>

#include <json.hpp>

#include "pbt/mat.hpp"
#include "pbt/tensor_space.hpp"

namespace pbt {

// Wire format for matrices:
//   {"dims": [2,2,2], "labels": ["A1","A2","B"], "re": [[...]], "im": [[...]]}
// dims multiply to the row count; matrices are square.
nlohmann::json matrix_to_json(const CMat& m, const TensorSpace& space);
CMat matrix_from_json(const nlohmann::json& j, TensorSpace* space_out = nullptr);

nlohmann::json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace pbt
