#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace goose::ingest {

inline constexpr std::uint16_t kEtherTypeGoose = 0x88B8;
inline constexpr std::uint16_t kEtherTypeVlan = 0x8100;
inline constexpr std::size_t kEthernetHeaderSize = 14;
inline constexpr std::size_t kVlanTagSize = 4;

struct RawFrame {
    std::int64_t ts_sec = 0;
    std::int64_t ts_usec = 0;
    std::vector<std::uint8_t> bytes;

    friend bool operator==(const RawFrame&, const RawFrame&) = default;
};

class PcapError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::uint16_t read_be16(std::span<const std::uint8_t> b, std::size_t at) {
    return static_cast<std::uint16_t>((b[at] << 8) | b[at + 1]);
}

inline std::uint32_t read_u32(const unsigned char* p, bool swap) {
    std::uint32_t v;
    std::memcpy(&v, p, 4);
    if (swap) v = __builtin_bswap32(v);
    return v;
}

inline void write_le32(std::ostream& os, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline void write_le16(std::ostream& os, std::uint16_t v) {
    const unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
    os.write(reinterpret_cast<const char*>(b), 2);
}

}  // namespace detail

// Classic libpcap format, Ethernet link type. Accepts both byte orders and the
// nanosecond-resolution magic (timestamps are truncated to microseconds).
inline std::vector<RawFrame> read_pcap(std::istream& in) {
    unsigned char header[24];
    if (!in.read(reinterpret_cast<char*>(header), sizeof header)) {
        throw PcapError("pcap: missing global header");
    }
    std::uint32_t magic;
    std::memcpy(&magic, header, 4);
    bool swap = false;
    bool nanos = false;
    switch (magic) {
        case 0xa1b2c3d4: break;
        case 0xd4c3b2a1: swap = true; break;
        case 0xa1b23c4d: nanos = true; break;
        case 0x4d3cb2a1: swap = true; nanos = true; break;
        default: throw PcapError("pcap: unrecognized magic number");
    }
    const std::uint32_t linktype = detail::read_u32(header + 20, swap);
    if (linktype != 1) throw PcapError("pcap: link type " + std::to_string(linktype) + " is not Ethernet");

    std::vector<RawFrame> frames;
    unsigned char rec[16];
    while (in.read(reinterpret_cast<char*>(rec), sizeof rec)) {
        RawFrame f;
        f.ts_sec = detail::read_u32(rec, swap);
        const std::uint32_t frac = detail::read_u32(rec + 4, swap);
        f.ts_usec = nanos ? frac / 1000 : frac;
        const std::uint32_t incl = detail::read_u32(rec + 8, swap);
        if (incl > (1u << 24)) throw PcapError("pcap: implausible record length");
        f.bytes.resize(incl);
        if (incl > 0 && !in.read(reinterpret_cast<char*>(f.bytes.data()), incl)) {
            throw PcapError("pcap: truncated record " + std::to_string(frames.size()));
        }
        frames.push_back(std::move(f));
    }
    if (in.gcount() != 0) throw PcapError("pcap: truncated record header");
    return frames;
}

inline std::vector<RawFrame> read_pcap_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw PcapError("cannot open " + path);
    return read_pcap(in);
}

inline void write_pcap(std::ostream& out, std::span<const RawFrame> frames) {
    detail::write_le32(out, 0xa1b2c3d4);
    detail::write_le16(out, 2);
    detail::write_le16(out, 4);
    detail::write_le32(out, 0);       // thiszone
    detail::write_le32(out, 0);       // sigfigs
    detail::write_le32(out, 65535);   // snaplen
    detail::write_le32(out, 1);       // Ethernet
    for (const RawFrame& f : frames) {
        detail::write_le32(out, static_cast<std::uint32_t>(f.ts_sec));
        detail::write_le32(out, static_cast<std::uint32_t>(f.ts_usec));
        detail::write_le32(out, static_cast<std::uint32_t>(f.bytes.size()));
        detail::write_le32(out, static_cast<std::uint32_t>(f.bytes.size()));
        out.write(reinterpret_cast<const char*>(f.bytes.data()), static_cast<std::streamsize>(f.bytes.size()));
    }
}

inline void write_pcap_file(const std::string& path, std::span<const RawFrame> frames) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw PcapError("cannot write " + path);
    write_pcap(out, frames);
}

// Offset of the GOOSE APDU, or 0 if the frame is not GOOSE. Throws nothing;
// `truncated` is set when the header itself is cut short.
inline std::size_t goose_payload_offset(std::span<const std::uint8_t> b, bool& truncated) {
    truncated = false;
    if (b.size() < kEthernetHeaderSize) {
        truncated = true;
        return 0;
    }
    std::uint16_t type = detail::read_be16(b, 12);
    std::size_t offset = kEthernetHeaderSize;
    if (type == kEtherTypeVlan) {
        if (b.size() < kEthernetHeaderSize + kVlanTagSize) {
            truncated = true;
            return 0;
        }
        type = detail::read_be16(b, 16);
        offset += kVlanTagSize;
    }
    return type == kEtherTypeGoose ? offset : 0;
}

struct FilterResult {
    std::vector<RawFrame> frames;
    std::size_t dropped = 0;
    std::size_t truncated = 0;
};

// Keeps frames whose EtherType is 0x88B8, directly or behind one 802.1Q tag.
inline FilterResult filter_goose(std::span<const RawFrame> frames) {
    FilterResult out;
    for (const RawFrame& f : frames) {
        bool truncated = false;
        if (goose_payload_offset(f.bytes, truncated) != 0) {
            out.frames.push_back(f);
        } else if (truncated) {
            ++out.truncated;
        } else {
            ++out.dropped;
        }
    }
    return out;
}

}  // namespace goose::ingest
