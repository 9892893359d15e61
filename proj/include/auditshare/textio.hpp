#pragma once

#include <filesystem>

#include "auditshare/data_model.hpp"

// Dataset text formats: comma-separated values with a schema header row, or
// newline-delimited JSON maps. The object store is newline-delimited JSON
// with fields object_id, kind, pii_key, entries.

namespace auditshare {

struct Table {
    std::vector<std::string> schema;
    std::vector<std::vector<std::string>> rows;
};

Table parse_csv(std::string_view text);
std::string to_csv(const Table& table);

std::vector<DataEntry> entries_from_table(const Table& table);

// .csv -> CSV with header, .jsonl/.ndjson/.json -> one JSON map per line
std::vector<DataEntry> load_entries(const std::filesystem::path& path);

void save_object_store(const std::filesystem::path& path, const std::vector<DataObject>& objects);
std::vector<DataObject> load_object_store(const std::filesystem::path& path);

// store directory metadata: schema, PII columns, counts, seed
struct StoreMeta {
    std::vector<std::string> schema;
    std::vector<std::string> pii_columns;
    uint64_t real_count = 0;
    uint64_t fake_count = 0;
    uint64_t seed = 0;
    bool seeded = true;
};

void save_store_meta(const std::filesystem::path& path, const StoreMeta& meta);
StoreMeta load_store_meta(const std::filesystem::path& path);

}  // namespace auditshare
