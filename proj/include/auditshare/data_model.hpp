#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "auditshare/bytes.hpp"
#include "auditshare/serial.hpp"

namespace auditshare {

// Ordered list of column names that identify an individual. The order is
// fixed: the grouping key is the concatenation of these attribute values.
struct PIIKeySpec {
    std::vector<std::string> attribute_names;

    void validate() const;  // non-empty, unique names
};

struct DataEntry {
    std::vector<std::string> schema;
    std::vector<std::string> values;

    const std::string* value_of(const std::string& column) const;
};

enum class ObjectKind : uint8_t { Real = 0, Fake = 1 };

// The atomic sharing unit: every entry for one (real or synthetic)
// individual, keyed by the ordered PII attribute values.
struct DataObject {
    std::string object_id;
    std::vector<std::string> pii_key;
    std::vector<DataEntry> entries;
    ObjectKind kind = ObjectKind::Real;
};

// PII key values joined with 0x1F, which cannot occur in field text.
std::string join_pii_key(const std::vector<std::string>& values);

// Two OT messages for one transfer: both carry the same real objects, each
// carries one disjoint fake side.
struct ObjectPair {
    uint32_t pair_index = 0;
    std::vector<DataObject> real_part;
    std::vector<DataObject> fake0;
    std::vector<DataObject> fake1;
    Bytes m0_bytes;
    Bytes m1_bytes;
};

void serialize_object(Writer& w, const DataObject& o);
DataObject deserialize_object(Reader& r);

Bytes serialize_objects(const std::vector<DataObject>& objs);
std::vector<DataObject> deserialize_objects(BytesView payload);

}  // namespace auditshare
