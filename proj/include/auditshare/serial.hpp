#pragma once

#include <array>
#include <cstring>
#include <string>

#include "auditshare/bytes.hpp"
#include "auditshare/errors.hpp"

// Length-prefixed binary encoding used across wire frames, certificates and
// session record files. All integers are big-endian.

namespace auditshare {

class Writer {
  public:
    void u8(uint8_t v) { buf_.push_back(v); }

    void u16(uint16_t v) {
        buf_.push_back(uint8_t(v >> 8));
        buf_.push_back(uint8_t(v));
    }

    void u32(uint32_t v) {
        for (int i = 3; i >= 0; --i) buf_.push_back(uint8_t(v >> (8 * i)));
    }

    void u64(uint64_t v) {
        for (int i = 7; i >= 0; --i) buf_.push_back(uint8_t(v >> (8 * i)));
    }

    void raw(BytesView b) { buf_.insert(buf_.end(), b.begin(), b.end()); }

    void raw(const void* p, size_t n) {
        const uint8_t* q = static_cast<const uint8_t*>(p);
        buf_.insert(buf_.end(), q, q + n);
    }

    // u32 length prefix + bytes
    void blob(BytesView b) {
        u32(uint32_t(b.size()));
        raw(b);
    }

    void str(std::string_view s) {
        u32(uint32_t(s.size()));
        raw(s.data(), s.size());
    }

    const Bytes& bytes() const { return buf_; }
    Bytes take() { return std::move(buf_); }

  private:
    Bytes buf_;
};

class Reader {
  public:
    explicit Reader(BytesView b) : data_(b) {}
    // rvalue buffers are moved in so the view cannot dangle
    explicit Reader(Bytes&& b) : owned_(std::move(b)), data_(owned_) {}
    Reader(const Reader&) = delete;
    Reader& operator=(const Reader&) = delete;

    uint8_t u8() {
        need(1);
        return data_[pos_++];
    }

    uint16_t u16() {
        need(2);
        uint16_t v = uint16_t(data_[pos_] << 8) | data_[pos_ + 1];
        pos_ += 2;
        return v;
    }

    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v = (v << 8) | data_[pos_ + i];
        pos_ += 4;
        return v;
    }

    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v = (v << 8) | data_[pos_ + i];
        pos_ += 8;
        return v;
    }

    Bytes raw(size_t n) {
        need(n);
        Bytes out(data_.begin() + pos_, data_.begin() + pos_ + n);
        pos_ += n;
        return out;
    }

    template <size_t N>
    std::array<uint8_t, N> fixed() {
        need(N);
        std::array<uint8_t, N> out;
        std::memcpy(out.data(), data_.data() + pos_, N);
        pos_ += N;
        return out;
    }

    Bytes blob() {
        uint32_t n = u32();
        return raw(n);
    }

    std::string str() {
        uint32_t n = u32();
        need(n);
        std::string out(reinterpret_cast<const char*>(data_.data() + pos_), n);
        pos_ += n;
        return out;
    }

    size_t remaining() const { return data_.size() - pos_; }
    bool done() const { return pos_ == data_.size(); }

    void expect_done() const {
        if (!done()) fail(Err::IoError, "trailing bytes in record");
    }

  private:
    void need(size_t n) const {
        if (data_.size() - pos_ < n) fail(Err::IoError, "truncated record");
    }

    Bytes owned_;
    BytesView data_;
    size_t pos_ = 0;
};

}  // namespace auditshare
