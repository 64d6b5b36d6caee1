#pragma once

#include <string>
#include <vector>

#include "spelke/common.hpp"

#include <json.hpp>

namespace spelke {

// Small structural validator covering the JSON-Schema subset the project's
// report schemas use: "type", "required", "properties", "items",
// "minItems". Returns a list of violations ("" path = document root).
inline void validate_json_schema(const nlohmann::json& doc, const nlohmann::json& schema,
                                 const std::string& path, std::vector<std::string>& errors) {
    if (schema.contains("type")) {
        const std::string type = schema["type"].get<std::string>();
        const bool ok = (type == "object" && doc.is_object()) ||
                        (type == "array" && doc.is_array()) ||
                        (type == "string" && doc.is_string()) ||
                        (type == "number" && doc.is_number()) ||
                        (type == "integer" && doc.is_number_integer()) ||
                        (type == "boolean" && doc.is_boolean());
        if (!ok) {
            errors.push_back(path + ": expected " + type);
            return;
        }
    }
    if (schema.contains("required")) {
        for (const auto& key : schema["required"]) {
            if (!doc.contains(key.get<std::string>()))
                errors.push_back(path + ": missing required key '" + key.get<std::string>() + "'");
        }
    }
    if (schema.contains("properties") && doc.is_object()) {
        for (const auto& [key, sub] : schema["properties"].items()) {
            if (doc.contains(key))
                validate_json_schema(doc[key], sub, path + "/" + key, errors);
        }
    }
    if (schema.contains("minItems") && doc.is_array()) {
        if (doc.size() < schema["minItems"].get<std::size_t>())
            errors.push_back(path + ": fewer than minItems elements");
    }
    if (schema.contains("items") && doc.is_array()) {
        for (std::size_t i = 0; i < doc.size(); ++i)
            validate_json_schema(doc[i], schema["items"], path + "[" + std::to_string(i) + "]",
                                 errors);
    }
}

inline std::vector<std::string> validate_json_schema(const nlohmann::json& doc,
                                                     const nlohmann::json& schema) {
    std::vector<std::string> errors;
    validate_json_schema(doc, schema, "", errors);
    return errors;
}

}  // namespace spelke
