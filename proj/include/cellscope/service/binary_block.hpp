#ifndef CELLSCOPE_SERVICE_BINARY_BLOCK_HPP
#define CELLSCOPE_SERVICE_BINARY_BLOCK_HPP

#include "../error.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>

/**
 * @file binary_block.hpp
 *
 * @brief Little-endian container for bulk numeric payloads.
 *
 *     offset  size  field
 *     0       4     magic "CSBK"
 *     4       2     u16 version (1)
 *     6       2     u16 dtype: 1 = u16, 2 = f32, 3 = i32
 *     8       4     u32 components per row
 *     12      4     u32 meta_length, bytes of UTF-8 JSON metadata
 *     16      8     u64 rows
 *     24      ...   metadata JSON, then zero padding to a multiple of 8
 *     ...     ...   rows * components values, row-major
 */

namespace cellscope::service {

inline constexpr char block_magic[4] = {'C', 'S', 'B', 'K'};
inline constexpr std::uint16_t block_version = 1;
inline constexpr std::size_t block_header_size = 24;

enum class BlockType : std::uint16_t { U16 = 1, F32 = 2, I32 = 3 };

inline std::size_t element_size(BlockType t) {
    return t == BlockType::U16 ? 2 : 4;
}

namespace detail {

template<class T>
void put_le(std::string& out, T v) {
    static_assert(std::is_unsigned_v<T>);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
}

template<class T>
T get_le(std::string_view in, std::size_t at) {
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        v |= static_cast<T>(static_cast<unsigned char>(in[at + i])) << (8 * i);
    }
    return v;
}

}

/**
 * Encode a block. `data` holds rows * components native values of the
 * dtype, written out little-endian.
 */
template<class T>
std::string encode_block(BlockType type, std::uint32_t components, std::span<const T> data, const nlohmann::json& meta) {
    static_assert(sizeof(T) == 2 || sizeof(T) == 4);
    if (sizeof(T) != element_size(type) || components == 0 || data.size() % components != 0) {
        throw Error(ErrorKind::InvalidData, "block data does not match its declared shape");
    }
    const auto meta_text = meta.dump();
    std::string out;
    out.reserve(block_header_size + meta_text.size() + 8 + data.size() * sizeof(T));
    out.append(block_magic, 4);
    detail::put_le<std::uint16_t>(out, block_version);
    detail::put_le<std::uint16_t>(out, static_cast<std::uint16_t>(type));
    detail::put_le<std::uint32_t>(out, components);
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(meta_text.size()));
    detail::put_le<std::uint64_t>(out, data.size() / components);
    out += meta_text;
    out.append((8 - out.size() % 8) % 8, '\0');
    using U = std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint32_t>;
    for (const auto& v : data) {
        U bits;
        std::memcpy(&bits, &v, sizeof(U));
        detail::put_le<U>(out, bits);
    }
    return out;
}

struct DecodedBlock {
    BlockType type = BlockType::U16;
    std::uint32_t components = 0;
    std::uint64_t rows = 0;
    nlohmann::json meta;
    /// Raw little-endian payload bytes.
    std::string_view data;

    template<class T>
    T at(std::size_t i) const {
        using U = std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint32_t>;
        const U bits = detail::get_le<U>(data, i * sizeof(U));
        T v;
        std::memcpy(&v, &bits, sizeof(T));
        return v;
    }
};

inline DecodedBlock decode_block(std::string_view bytes) {
    if (bytes.size() < block_header_size || bytes.substr(0, 4) != std::string_view(block_magic, 4)) {
        throw Error(ErrorKind::InvalidData, "not a binary block");
    }
    if (detail::get_le<std::uint16_t>(bytes, 4) != block_version) {
        throw Error(ErrorKind::InvalidData, "unsupported block version");
    }
    DecodedBlock b;
    const auto dtype = detail::get_le<std::uint16_t>(bytes, 6);
    if (dtype < 1 || dtype > 3) {
        throw Error(ErrorKind::InvalidData, "unknown block dtype");
    }
    b.type = static_cast<BlockType>(dtype);
    b.components = detail::get_le<std::uint32_t>(bytes, 8);
    const auto meta_length = detail::get_le<std::uint32_t>(bytes, 12);
    b.rows = detail::get_le<std::uint64_t>(bytes, 16);
    const std::size_t data_start = (block_header_size + meta_length + 7) / 8 * 8;
    const std::uint64_t data_bytes = b.rows * b.components * element_size(b.type);
    if (bytes.size() != data_start + data_bytes) {
        throw Error(ErrorKind::InvalidData, "block length does not match its header");
    }
    b.meta = nlohmann::json::parse(bytes.substr(block_header_size, meta_length), nullptr, false);
    if (b.meta.is_discarded()) {
        throw Error(ErrorKind::InvalidData, "block metadata is not JSON");
    }
    b.data = bytes.substr(data_start);
    return b;
}

}

#endif
