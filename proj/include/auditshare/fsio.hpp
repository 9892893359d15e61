#pragma once

#include <filesystem>
#include <string>

#include "auditshare/bytes.hpp"

namespace auditshare {

Bytes read_file(const std::filesystem::path& p);
std::string read_text_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, BytesView data);
void write_text_file(const std::filesystem::path& p, std::string_view text);
void append_file(const std::filesystem::path& p, BytesView data);

}  // namespace auditshare
