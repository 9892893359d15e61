#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "auditshare/preprocess.hpp"

namespace auditshare::testutil {

inline PIIKeySpec id_spec() {
    PIIKeySpec spec;
    spec.attribute_names = {"id"};
    return spec;
}

inline std::vector<DataObject> make_reals(size_t count) {
    std::vector<DataObject> out;
    for (size_t i = 0; i < count; ++i) {
        DataObject o;
        o.object_id = "real" + std::to_string(i);
        o.pii_key = {"rk" + std::to_string(i)};
        o.kind = ObjectKind::Real;
        DataEntry e;
        e.schema = {"id", "v"};
        e.values = {"rk" + std::to_string(i), "value" + std::to_string(i)};
        o.entries.push_back(std::move(e));
        out.push_back(std::move(o));
    }
    return out;
}

inline std::vector<DataObject> make_fakes(size_t count, uint64_t seed = 5) {
    return generate_fake_objects({"id", "v"}, id_spec(), count, seed, {});
}

inline std::filesystem::path fresh_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace auditshare::testutil
