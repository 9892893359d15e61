#include "auditshare/data_model.hpp"

#include <unordered_set>

#include "auditshare/errors.hpp"

namespace auditshare {

void PIIKeySpec::validate() const {
    if (attribute_names.empty()) fail(Err::SchemaEmpty, "no PII attributes designated");
    std::unordered_set<std::string> seen;
    for (const auto& name : attribute_names) {
        if (name.empty()) fail(Err::SchemaEmpty, "empty PII attribute name");
        if (!seen.insert(name).second)
            fail(Err::SchemaEmpty, "duplicate PII attribute: " + name);
    }
}

const std::string* DataEntry::value_of(const std::string& column) const {
    for (size_t i = 0; i < schema.size(); ++i) {
        if (schema[i] == column) return &values[i];
    }
    return nullptr;
}

std::string join_pii_key(const std::vector<std::string>& values) {
    std::string key;
    for (size_t i = 0; i < values.size(); ++i) {
        if (i > 0) key.push_back('\x1f');
        key += values[i];
    }
    return key;
}

void serialize_object(Writer& w, const DataObject& o) {
    w.str(o.object_id);
    w.u8(uint8_t(o.kind));
    w.u16(uint16_t(o.pii_key.size()));
    for (const auto& v : o.pii_key) w.str(v);
    w.u32(uint32_t(o.entries.size()));
    for (const auto& e : o.entries) {
        w.u16(uint16_t(e.schema.size()));
        for (const auto& c : e.schema) w.str(c);
        for (const auto& v : e.values) w.str(v);
    }
}

DataObject deserialize_object(Reader& r) {
    DataObject o;
    o.object_id = r.str();
    o.kind = ObjectKind(r.u8());
    uint16_t nkey = r.u16();
    o.pii_key.reserve(nkey);
    for (uint16_t i = 0; i < nkey; ++i) o.pii_key.push_back(r.str());
    uint32_t nent = r.u32();
    o.entries.reserve(nent);
    for (uint32_t i = 0; i < nent; ++i) {
        DataEntry e;
        uint16_t ncol = r.u16();
        e.schema.reserve(ncol);
        e.values.reserve(ncol);
        for (uint16_t c = 0; c < ncol; ++c) e.schema.push_back(r.str());
        for (uint16_t c = 0; c < ncol; ++c) e.values.push_back(r.str());
        o.entries.push_back(std::move(e));
    }
    return o;
}

Bytes serialize_objects(const std::vector<DataObject>& objs) {
    Writer w;
    w.u32(uint32_t(objs.size()));
    for (const auto& o : objs) serialize_object(w, o);
    return w.take();
}

std::vector<DataObject> deserialize_objects(BytesView payload) {
    Reader r(payload);
    uint32_t n = r.u32();
    std::vector<DataObject> out;
    out.reserve(n);
    for (uint32_t i = 0; i < n; ++i) out.push_back(deserialize_object(r));
    r.expect_done();
    return out;
}

}  // namespace auditshare
