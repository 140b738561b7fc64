#pragma once

// JSON-level loaders shared by io.cpp and pipeline.cpp; not installed.

#include "json_util.hpp"

#include "entropy_engine/io.hpp"

namespace entropy_engine::detail {

CompoundState compound_from_json(const json& v, const std::string& ctx);
RelationSpec relation_from_json(const json& v, const std::string& ctx);
SimpleSystemModel model_from_json(const json& v, const std::string& ctx);
StatePoint point_from_json(const json& v, const std::string& ctx);
GraphSpec graph_from_json(const json& v, const std::string& ctx, const std::string& base_dir);

}  // namespace entropy_engine::detail
