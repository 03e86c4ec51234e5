#pragma once

#include <cstdint>
#include <cstdio>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "goose/core/message.hpp"
#include "goose/ingest/pcap.hpp"

// APDU layout carried after the Ethernet header (all integers big-endian):
//
//   appid        2 octets
//   then six TLV entries in this fixed order, each tag(1) length(2) value:
//     0x01 dataset_name  UTF-8
//     0x02 goid          UTF-8
//     0x03 st_num        4 octets
//     0x04 sq_num        4 octets
//     0x05 data1         1 octet, 0 or 1
//     0x06 data2         1 octet, 0 or 1
//
// Bytes after the last entry are Ethernet padding and ignored. dm/sm are the
// first three octets of the destination/source MAC; the encoder zero-fills the
// remaining three. Time fields are the capture timestamp's UTC time of day.

namespace goose::ingest {

class DecodeError : public std::runtime_error {
public:
    DecodeError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " at frame offset " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

enum class ApduTag : std::uint8_t { Dataset = 1, Goid = 2, StNum = 3, SqNum = 4, Data1 = 5, Data2 = 6 };

namespace detail {

inline std::uint8_t parse_hex_byte(std::string_view two) {
    auto nibble = [](char c) -> std::uint8_t {
        if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
        if (c >= 'a' && c <= 'f') return static_cast<std::uint8_t>(c - 'a' + 10);
        return static_cast<std::uint8_t>(c - 'A' + 10);
    };
    return static_cast<std::uint8_t>((nibble(two[0]) << 4) | nibble(two[1]));
}

inline std::string hex_triplet(std::span<const std::uint8_t> b) {
    char buf[9];
    std::snprintf(buf, sizeof buf, "%02x %02x %02x", b[0], b[1], b[2]);
    return buf;
}

inline void put_be16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

inline void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

inline void put_tlv(std::vector<std::uint8_t>& out, ApduTag tag, std::span<const std::uint8_t> value) {
    out.push_back(static_cast<std::uint8_t>(tag));
    put_be16(out, static_cast<std::uint16_t>(value.size()));
    out.insert(out.end(), value.begin(), value.end());
}

class ApduReader {
public:
    ApduReader(std::span<const std::uint8_t> frame, std::size_t offset) : frame_(frame), pos_(offset) {}

    std::uint16_t be16(const char* what) {
        need(2, what);
        const auto v = static_cast<std::uint16_t>((frame_[pos_] << 8) | frame_[pos_ + 1]);
        pos_ += 2;
        return v;
    }

    std::span<const std::uint8_t> tlv(ApduTag expected, const char* what) {
        need(1, what);
        if (frame_[pos_] != static_cast<std::uint8_t>(expected)) {
            throw DecodeError(std::string("unexpected tag for ") + what, pos_);
        }
        ++pos_;
        const std::uint16_t len = be16(what);
        need(len, what);
        auto value = frame_.subspan(pos_, len);
        pos_ += len;
        return value;
    }

    std::size_t position() const { return pos_; }

private:
    void need(std::size_t n, const char* what) const {
        if (pos_ + n > frame_.size()) throw DecodeError(std::string("truncated ") + what, pos_);
    }

    std::span<const std::uint8_t> frame_;
    std::size_t pos_;
};

inline std::uint32_t fixed_u32(ApduReader& r, ApduTag tag, const char* what) {
    const std::size_t at = r.position();
    auto v = r.tlv(tag, what);
    if (v.size() != 4) throw DecodeError(std::string(what) + " must be 4 octets", at);
    return (std::uint32_t{v[0]} << 24) | (std::uint32_t{v[1]} << 16) | (std::uint32_t{v[2]} << 8) | v[3];
}

inline std::uint8_t binary_octet(ApduReader& r, ApduTag tag, const char* what) {
    const std::size_t at = r.position();
    auto v = r.tlv(tag, what);
    if (v.size() != 1 || v[0] > 1) throw DecodeError(std::string(what) + " must be one octet 0 or 1", at);
    return v[0];
}

}  // namespace detail

inline GooseMessage decode_frame(const RawFrame& frame) {
    std::span<const std::uint8_t> b = frame.bytes;
    bool truncated = false;
    const std::size_t apdu = goose_payload_offset(b, truncated);
    if (apdu == 0) throw DecodeError(truncated ? "truncated Ethernet header" : "not a GOOSE frame", 0);
    if (frame.ts_usec < 0 || frame.ts_usec >= kMicrosPerSecond || frame.ts_sec < 0) {
        throw DecodeError("capture timestamp out of range", 0);
    }

    GooseMessage m;
    const std::int64_t secs_of_day = frame.ts_sec % 86'400;
    m.time_hour = secs_of_day / 3600;
    m.time_minute = (secs_of_day / 60) % 60;
    m.time_second = secs_of_day % 60;
    m.time_micro = frame.ts_usec;
    m.dm = detail::hex_triplet(b.subspan(0, 3));
    m.sm = detail::hex_triplet(b.subspan(6, 3));
    char type[5];
    std::snprintf(type, sizeof type, "%04x", detail::read_be16(b, apdu - 2));
    m.eth_type = type;

    detail::ApduReader r(b, apdu);
    m.appid = r.be16("appid");
    auto ds = r.tlv(ApduTag::Dataset, "dataset");
    m.dataset_name.assign(ds.begin(), ds.end());
    auto goid = r.tlv(ApduTag::Goid, "goid");
    m.goid.assign(goid.begin(), goid.end());
    m.st_num = detail::fixed_u32(r, ApduTag::StNum, "stnum");
    m.sq_num = detail::fixed_u32(r, ApduTag::SqNum, "sqnum");
    m.data1 = detail::binary_octet(r, ApduTag::Data1, "data1");
    m.data2 = detail::binary_octet(r, ApduTag::Data2, "data2");

    if (!structural_problems(m).empty()) throw DecodeError("decoded fields violate message invariants", apdu);
    return m;
}

struct EncodeOptions {
    bool vlan = false;
    std::uint16_t vlan_tci = 0;
};

// Capture timestamp lands on 1970-01-01 at the message's time of day.
inline RawFrame encode_frame(const GooseMessage& m, EncodeOptions opts = {}) {
    if (!is_valid_message(m)) throw std::domain_error("encode_frame: message violates its invariants");
    RawFrame f;
    f.ts_sec = (m.time_hour * 60 + m.time_minute) * 60 + m.time_second;
    f.ts_usec = m.time_micro;

    auto& out = f.bytes;
    out.reserve(64 + m.dataset_name.size() + m.goid.size());
    auto mac = [&out](const std::string& triplet) {
        for (std::size_t i = 0; i < 3; ++i) out.push_back(detail::parse_hex_byte(std::string_view(triplet).substr(i * 3, 2)));
        out.insert(out.end(), 3, 0);
    };
    mac(m.dm);
    mac(m.sm);
    if (opts.vlan) {
        detail::put_be16(out, kEtherTypeVlan);
        detail::put_be16(out, opts.vlan_tci);
    }
    out.push_back(detail::parse_hex_byte(std::string_view(m.eth_type).substr(0, 2)));
    out.push_back(detail::parse_hex_byte(std::string_view(m.eth_type).substr(2, 2)));

    detail::put_be16(out, static_cast<std::uint16_t>(m.appid));
    const auto text = [](const std::string& s) {
        return std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(s.data()), s.size());
    };
    detail::put_tlv(out, ApduTag::Dataset, text(m.dataset_name));
    detail::put_tlv(out, ApduTag::Goid, text(m.goid));
    std::vector<std::uint8_t> tmp;
    detail::put_be32(tmp, m.st_num);
    detail::put_tlv(out, ApduTag::StNum, tmp);
    tmp.clear();
    detail::put_be32(tmp, m.sq_num);
    detail::put_tlv(out, ApduTag::SqNum, tmp);
    const std::uint8_t d1 = m.data1, d2 = m.data2;
    detail::put_tlv(out, ApduTag::Data1, std::span<const std::uint8_t>(&d1, 1));
    detail::put_tlv(out, ApduTag::Data2, std::span<const std::uint8_t>(&d2, 1));
    return f;
}

}  // namespace goose::ingest
