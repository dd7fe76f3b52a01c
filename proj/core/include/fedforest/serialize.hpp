#pragma once

#include <string>

#include "fedforest/forest.hpp"

namespace fedforest {

// JSON round-trip of a trained model. The document layout is described
// in docs/model-format.md; numbers survive a round trip bit for bit.
std::string model_to_json(const Forest& forest);
Forest model_from_json(const std::string& text);

}  // namespace fedforest
