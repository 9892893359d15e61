#include "auditshare/textio.hpp"

#include <sstream>

#include <json.hpp>

#include "auditshare/errors.hpp"
#include "auditshare/fsio.hpp"

namespace auditshare {

using Json = nlohmann::ordered_json;

Table parse_csv(std::string_view text) {
    Table table;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool any_field = false;

    auto end_field = [&] {
        row.push_back(field);
        field.clear();
        any_field = true;
    };
    auto end_row = [&] {
        if (!any_field && row.empty() && field.empty()) return;  // skip blank lines
        end_field();
        if (table.schema.empty()) {
            table.schema = row;
        } else {
            if (row.size() != table.schema.size())
                fail(Err::IoError, "csv row has " + std::to_string(row.size()) +
                                       " fields, header has " +
                                       std::to_string(table.schema.size()));
            table.rows.push_back(row);
        }
        row.clear();
        any_field = false;
    };

    for (size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\n') {
            end_row();
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    if (in_quotes) fail(Err::IoError, "unterminated quote in csv");
    if (any_field || !field.empty()) end_row();
    return table;
}

static std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string to_csv(const Table& table) {
    std::ostringstream out;
    for (size_t c = 0; c < table.schema.size(); ++c)
        out << (c ? "," : "") << csv_escape(table.schema[c]);
    out << "\n";
    for (const auto& row : table.rows) {
        for (size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << csv_escape(row[c]);
        out << "\n";
    }
    return out.str();
}

std::vector<DataEntry> entries_from_table(const Table& table) {
    std::vector<DataEntry> out;
    out.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        DataEntry e;
        e.schema = table.schema;
        e.values = row;
        out.push_back(std::move(e));
    }
    return out;
}

static std::vector<DataEntry> load_jsonl_entries(const std::string& text) {
    std::vector<DataEntry> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        Json j = Json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            fail(Err::IoError, "expected one JSON map per line");
        DataEntry e;
        for (auto it = j.begin(); it != j.end(); ++it) {
            e.schema.push_back(it.key());
            e.values.push_back(it.value().is_string() ? it.value().get<std::string>()
                                                      : it.value().dump());
        }
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<DataEntry> load_entries(const std::filesystem::path& path) {
    std::string text = read_text_file(path);
    std::string ext = path.extension().string();
    if (ext == ".jsonl" || ext == ".ndjson" || ext == ".json") return load_jsonl_entries(text);
    return entries_from_table(parse_csv(text));
}

static Json object_to_json(const DataObject& o) {
    Json j;
    j["object_id"] = o.object_id;
    j["kind"] = o.kind == ObjectKind::Fake ? "fake" : "real";
    j["pii_key"] = o.pii_key;
    Json entries = Json::array();
    for (const auto& e : o.entries) {
        Json je;
        je["schema"] = e.schema;
        je["values"] = e.values;
        entries.push_back(std::move(je));
    }
    j["entries"] = std::move(entries);
    return j;
}

void save_object_store(const std::filesystem::path& path,
                       const std::vector<DataObject>& objects) {
    std::string out;
    for (const auto& o : objects) {
        out += object_to_json(o).dump();
        out += "\n";
    }
    write_text_file(path, out);
}

std::vector<DataObject> load_object_store(const std::filesystem::path& path) {
    std::string text = read_text_file(path);
    std::vector<DataObject> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Json j = Json::parse(line, nullptr, false);
        if (j.is_discarded()) fail(Err::IoError, "corrupt object store line");
        DataObject o;
        o.object_id = j.at("object_id").get<std::string>();
        o.kind = j.at("kind").get<std::string>() == "fake" ? ObjectKind::Fake : ObjectKind::Real;
        o.pii_key = j.at("pii_key").get<std::vector<std::string>>();
        for (const auto& je : j.at("entries")) {
            DataEntry e;
            e.schema = je.at("schema").get<std::vector<std::string>>();
            e.values = je.at("values").get<std::vector<std::string>>();
            o.entries.push_back(std::move(e));
        }
        out.push_back(std::move(o));
    }
    return out;
}

void save_store_meta(const std::filesystem::path& path, const StoreMeta& meta) {
    Json j;
    j["schema"] = meta.schema;
    j["pii_columns"] = meta.pii_columns;
    j["real_count"] = meta.real_count;
    j["fake_count"] = meta.fake_count;
    j["seed"] = meta.seed;
    j["seeded"] = meta.seeded;
    write_text_file(path, j.dump(2) + "\n");
}

StoreMeta load_store_meta(const std::filesystem::path& path) {
    Json j = Json::parse(read_text_file(path));
    StoreMeta meta;
    meta.schema = j.at("schema").get<std::vector<std::string>>();
    meta.pii_columns = j.at("pii_columns").get<std::vector<std::string>>();
    meta.real_count = j.at("real_count").get<uint64_t>();
    meta.fake_count = j.at("fake_count").get<uint64_t>();
    meta.seed = j.at("seed").get<uint64_t>();
    meta.seeded = j.at("seeded").get<bool>();
    return meta;
}

}  // namespace auditshare
