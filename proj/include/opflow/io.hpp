#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "opflow/core.hpp"

namespace opflow {

using Json = nlohmann::ordered_json;

/// {"jobs":[{"release":0,"ops":[4,2,4]}, ...]}. Unknown top-level keys (such as
/// a generator "metadata" block) are ignored on read.
Json to_json(const Instance& instance);
Instance instance_from_json(const Json& j);

Instance read_instance(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);

/// Canonical serialization used for every file we emit: 2-space indent,
/// trailing newline, keys in insertion order.
std::string dump(const Json& j);

}  // namespace opflow
