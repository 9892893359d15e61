#include "auditshare/fsio.hpp"

#include <fstream>

#include "auditshare/errors.hpp"

namespace auditshare {

Bytes read_file(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) fail(Err::IoError, "cannot open " + p.string());
    Bytes data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return data;
}

std::string read_text_file(const std::filesystem::path& p) {
    Bytes b = read_file(p);
    return std::string(b.begin(), b.end());
}

void write_file(const std::filesystem::path& p, BytesView data) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) fail(Err::IoError, "cannot write " + p.string());
    f.write(reinterpret_cast<const char*>(data.data()), std::streamsize(data.size()));
    if (!f) fail(Err::IoError, "short write to " + p.string());
}

void write_text_file(const std::filesystem::path& p, std::string_view text) {
    write_file(p, BytesView(reinterpret_cast<const uint8_t*>(text.data()), text.size()));
}

void append_file(const std::filesystem::path& p, BytesView data) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary | std::ios::app);
    if (!f) fail(Err::IoError, "cannot append to " + p.string());
    f.write(reinterpret_cast<const char*>(data.data()), std::streamsize(data.size()));
    if (!f) fail(Err::IoError, "short write to " + p.string());
}

}  // namespace auditshare
