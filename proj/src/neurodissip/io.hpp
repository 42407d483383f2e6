// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The neurodissip Authors

#pragma once

#include <span>
#include <string>
#include <initializer_list>
#include <string_view>

#include <json.hpp>

namespace neurodissip {

/// Shortest decimal that round-trips to the same double; "nan"/"inf"/"-inf"
/// for non-finite values.
std::string format_double(double v);

/// Space-free JSON array of round-trip doubles, used inside CSV fields.
std::string format_array(std::span<const double> values);

/// Writes atomically enough for our purposes: truncates and writes the whole
/// file, creating parent directories. Throws IoError.
void write_text_file(const std::string& path, std::string_view content);
void write_json_file(const std::string& path, const nlohmann::json& j);

std::string read_text_file(const std::string& path);
nlohmann::json read_json_file(const std::string& path);

/// Creates the directory and its parents. Throws IoError.
void ensure_directory(const std::string& path);

std::string join_path(const std::string& dir, const std::string& name);

/// Throws ConfigError unless j is an object whose keys all appear in `keys`.
void require_known_keys(const nlohmann::json& j, std::initializer_list<std::string_view> keys,
                        const std::string& context);

}  // namespace neurodissip
