#ifndef CELLSCOPE_STORE_FORMAT_HPP
#define CELLSCOPE_STORE_FORMAT_HPP

#include "../error.hpp"

#include <zlib.h>

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

/**
 * @file format.hpp
 *
 * @brief Byte layout of the store file.
 *
 * All integers and floats are little-endian. The file is a fixed 160-byte
 * header followed by five sections, each starting on an 8-byte boundary:
 *
 * | offset | size | field                                            |
 * |--------|------|--------------------------------------------------|
 * | 0      | 4    | magic `CRVO`                                     |
 * | 4      | 4    | u32 format version (1)                           |
 * | 8      | 8    | u64 cell count                                   |
 * | 16     | 8    | u64 gene count                                   |
 * | 24     | 4    | u32 flags (bit 0: marker section present)        |
 * | 28     | 4    | u32 section count (5)                            |
 * | 32     | 120  | 5 x {u64 offset, u64 length, u32 crc32, u32 0}   |
 * | 152    | 4    | u32 crc32 of bytes [0, 152)                      |
 * | 156    | 4    | zero padding                                     |
 *
 * Sections, in order, are described in `SectionId`. Strings are a u32 byte
 * length followed by the bytes, unterminated.
 */

namespace cellscope::store {

static_assert(std::endian::native == std::endian::little, "store I/O assumes a little-endian host");

inline constexpr std::array<char, 4> store_magic{'C', 'R', 'V', 'O'};
inline constexpr std::uint32_t store_format_version = 1;
inline constexpr std::size_t header_size = 160;
inline constexpr std::uint32_t flag_has_markers = 1u;

/**
 * Section identifiers, which double as the section table slots.
 *
 * - GeneIndex: u64 n; n strings; pad to 4; u32 order[n] listing gene indices
 *   sorted by (lower-cased name, name, index).
 * - Expression: u64 nnz; u64 colptr[n_genes + 1]; f64 max_value[n_genes];
 *   u32 cell_index[nnz]; pad to 8; f64 value[nnz].
 * - Annotations: u32 count; per column: name; u32 n_categories; categories;
 *   pad to 8; u64 n_cells; i32 codes[n_cells].
 * - Embeddings: u32 count; u32 default index (0xFFFFFFFF when none); per
 *   embedding: name; u32 source dims (2 or 3); u32 padded flag; pad to 8;
 *   u64 n_cells; f32 xyz[n_cells * 3]. 2-D embeddings carry z = 0.
 * - Markers: u32 count; per entry: annotation; category; u8 skipped; reason;
 *   u32 n_records; per record u32 gene, f64 t, f64 df, f64 p, f64 lfc.
 *   Zero length when the header flag is clear.
 */
enum class SectionId : std::uint32_t { GeneIndex = 0, Expression = 1, Annotations = 2, Embeddings = 3, Markers = 4 };
inline constexpr std::size_t section_count = 5;

inline constexpr std::uint32_t no_default_embedding = 0xFFFFFFFFu;

struct SectionEntry {
    std::uint64_t offset = 0;
    std::uint64_t length = 0;
    std::uint32_t crc = 0;

    bool operator==(const SectionEntry&) const = default;
};

struct StoreHeader {
    std::uint32_t format_version = store_format_version;
    std::uint64_t n_cells = 0;
    std::uint64_t n_genes = 0;
    std::uint32_t flags = 0;
    std::array<SectionEntry, section_count> sections{};

    bool has_markers() const { return (flags & flag_has_markers) != 0; }
    const SectionEntry& section(SectionId id) const { return sections[static_cast<std::size_t>(id)]; }
    SectionEntry& section(SectionId id) { return sections[static_cast<std::size_t>(id)]; }

    bool operator==(const StoreHeader&) const = default;
};

inline std::uint32_t crc32_update(std::uint32_t crc, const void* data, std::size_t len) {
    const auto* p = static_cast<const Bytef*>(data);
    while (len > 0) {
        const auto chunk = static_cast<uInt>(std::min<std::size_t>(len, 1u << 30));
        crc = static_cast<std::uint32_t>(::crc32(crc, p, chunk));
        p += chunk;
        len -= chunk;
    }
    return crc;
}

inline std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
    return crc32_update(0, bytes.data(), bytes.size());
}

template<typename T>
void put(std::vector<std::uint8_t>& out, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
    out.insert(out.end(), p, p + sizeof(T));
}

inline std::vector<std::uint8_t> encode_header(const StoreHeader& h) {
    std::vector<std::uint8_t> out;
    out.reserve(header_size);
    out.insert(out.end(), store_magic.begin(), store_magic.end());
    put(out, h.format_version);
    put(out, h.n_cells);
    put(out, h.n_genes);
    put(out, h.flags);
    put(out, static_cast<std::uint32_t>(section_count));
    for (const auto& s : h.sections) {
        put(out, s.offset);
        put(out, s.length);
        put(out, s.crc);
        put(out, std::uint32_t{0});
    }
    put(out, crc32_of(out));
    put(out, std::uint32_t{0});
    return out;
}

/**
 * Bounds-checked little-endian cursor over a byte span. Overruns raise
 * CorruptSection.
 */
class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes, std::string_view what = "section") : bytes_(bytes), what_(what) {}

    template<typename T>
    T get() {
        static_assert(std::is_trivially_copyable_v<T>);
        need(sizeof(T));
        T value;
        std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return value;
    }

    std::string get_string() {
        const auto len = get<std::uint32_t>();
        need(len);
        std::string out(reinterpret_cast<const char*>(bytes_.data() + pos_), len);
        pos_ += len;
        return out;
    }

    /// View `count` elements of T in place; the current position must be aligned for T.
    template<typename T>
    std::span<const T> get_array(std::size_t count) {
        if (count > (bytes_.size() - pos_) / sizeof(T)) {
            overrun();
        }
        const auto* start = bytes_.data() + pos_;
        if (reinterpret_cast<std::uintptr_t>(start) % alignof(T) != 0) {
            throw Error(ErrorKind::CorruptSection, std::string(what_) + ": misaligned array");
        }
        pos_ += count * sizeof(T);
        return {reinterpret_cast<const T*>(start), count};
    }

    void align(std::size_t to) {
        const auto rem = pos_ % to;
        if (rem) {
            need(to - rem);
            pos_ += to - rem;
        }
    }

    std::size_t position() const { return pos_; }
    bool at_end() const { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n) const {
        if (n > bytes_.size() - pos_) {
            overrun();
        }
    }
    [[noreturn]] void overrun() const {
        throw Error(ErrorKind::CorruptSection, std::string(what_) + ": read past end of section");
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
    std::string_view what_;
};

inline StoreHeader decode_header(std::span<const std::uint8_t> bytes, std::uint64_t file_size) {
    if (bytes.size() < header_size) {
        throw Error(ErrorKind::CorruptSection, "file too small for a store header");
    }
    if (!std::equal(store_magic.begin(), store_magic.end(), bytes.begin())) {
        throw Error(ErrorKind::CorruptSection, "bad magic, not a store file");
    }
    Reader r(bytes.first(header_size), "header");
    r.get<std::uint32_t>();
    StoreHeader h;
    h.format_version = r.get<std::uint32_t>();
    if (h.format_version != store_format_version) {
        throw Error(ErrorKind::CorruptSection, "unsupported store format version " + std::to_string(h.format_version));
    }
    h.n_cells = r.get<std::uint64_t>();
    h.n_genes = r.get<std::uint64_t>();
    h.flags = r.get<std::uint32_t>();
    if (r.get<std::uint32_t>() != section_count) {
        throw Error(ErrorKind::CorruptSection, "unexpected section count");
    }
    for (auto& s : h.sections) {
        s.offset = r.get<std::uint64_t>();
        s.length = r.get<std::uint64_t>();
        s.crc = r.get<std::uint32_t>();
        r.get<std::uint32_t>();
    }
    const auto stored_crc = r.get<std::uint32_t>();
    if (stored_crc != crc32_of(bytes.first(152))) {
        throw Error(ErrorKind::CorruptSection, "header checksum mismatch");
    }
    for (std::size_t i = 0; i < section_count; ++i) {
        const auto& s = h.sections[i];
        if (s.offset < header_size || s.offset > file_size || s.length > file_size - s.offset || s.offset % 8 != 0) {
            throw Error(ErrorKind::CorruptSection, "section " + std::to_string(i) + " lies outside the file");
        }
    }
    return h;
}

/**
 * Sequential writer that tracks the absolute offset and a running CRC for the
 * section currently being written.
 */
class SectionWriter {
public:
    explicit SectionWriter(std::ofstream& out) : out_(out) {}

    void begin(SectionEntry& entry) {
        pad_to(8);
        entry.offset = offset_;
        crc_ = 0;
        start_ = offset_;
    }

    void end(SectionEntry& entry) {
        entry.length = offset_ - start_;
        entry.crc = crc_;
    }

    void write(const void* data, std::size_t len) {
        if (len == 0) {
            return;
        }
        out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(len));
        if (!out_) {
            throw Error(ErrorKind::IoFailure, "write failed");
        }
        crc_ = crc32_update(crc_, data, len);
        offset_ += len;
    }

    template<typename T>
    void put(T value) {
        static_assert(std::is_trivially_copyable_v<T>);
        write(&value, sizeof(T));
    }

    void put_string(std::string_view s) {
        put(static_cast<std::uint32_t>(s.size()));
        write(s.data(), s.size());
    }

    template<typename T>
    void put_array(std::span<const T> values) {
        write(values.data(), values.size_bytes());
    }

    void pad_to(std::size_t alignment) {
        static const std::array<std::uint8_t, 8> zeros{};
        const auto rem = offset_ % alignment;
        if (rem) {
            write(zeros.data(), alignment - rem);
        }
    }

    std::uint64_t offset() const { return offset_; }
    void skip_header() {
        const std::vector<char> zeros(header_size, 0);
        out_.write(zeros.data(), header_size);
        offset_ = header_size;
    }

private:
    std::ofstream& out_;
    std::uint64_t offset_ = 0;
    std::uint64_t start_ = 0;
    std::uint32_t crc_ = 0;
};

}

#endif
