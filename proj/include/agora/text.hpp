#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace agora {

std::string_view trim(std::string_view s);

bool is_blank(std::string_view s);

/// Replaces every run of CR/LF with a single space.
std::string flatten_newlines(std::string_view s);

std::vector<std::string> split_lines(std::string_view s);

std::string read_file(const std::string& path);

/// Writes via a temporary sibling and rename, so readers never see a
/// partially written file.
void write_file_atomic(const std::string& path, std::string_view contents);

}  // namespace agora
