#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "kwsum/errors.hpp"
#include "kwsum/model.hpp"

namespace kwsum {

// Sectioned binary checkpoint:
//   magic "KWSUM1"
//   u32 vocab_size, max_len, n_layers, n_heads, d_model, d_ff; u64 seed
//   per tensor: u32 name_len, name bytes, u32 rows, u32 cols,
//               rows*cols little-endian f32
// Tensor order follows tensor_refs(). Values are stored as f32.

namespace detail {

inline void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

inline void put_u64(std::ostream& out, std::uint64_t v) {
    put_u32(out, static_cast<std::uint32_t>(v));
    put_u32(out, static_cast<std::uint32_t>(v >> 32));
}

inline void put_f32(std::ostream& out, float f) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put_u32(out, bits);
}

inline std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
           static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
}

inline std::uint64_t get_u64(std::istream& in) {
    const std::uint64_t lo = get_u32(in);
    const std::uint64_t hi = get_u32(in);
    return lo | hi << 32;
}

inline float get_f32(std::istream& in) {
    const std::uint32_t bits = get_u32(in);
    float f;
    std::memcpy(&f, &bits, 4);
    return f;
}

} // namespace detail

inline constexpr char checkpoint_magic[6] = {'K', 'W', 'S', 'U', 'M', '1'};

inline void save_checkpoint(const ModelParams& params, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint: " + path);
    out.write(checkpoint_magic, 6);
    const ModelConfig& c = params.config;
    detail::put_u32(out, static_cast<std::uint32_t>(c.vocab_size));
    detail::put_u32(out, static_cast<std::uint32_t>(c.max_len));
    detail::put_u32(out, static_cast<std::uint32_t>(c.n_layers));
    detail::put_u32(out, static_cast<std::uint32_t>(c.n_heads));
    detail::put_u32(out, static_cast<std::uint32_t>(c.d_model));
    detail::put_u32(out, static_cast<std::uint32_t>(c.d_ff));
    detail::put_u64(out, c.seed);
    for (const auto& ref : tensor_refs(const_cast<ModelParams&>(params))) {
        detail::put_u32(out, static_cast<std::uint32_t>(ref.name.size()));
        out.write(ref.name.data(), static_cast<std::streamsize>(ref.name.size()));
        detail::put_u32(out, static_cast<std::uint32_t>(ref.rows));
        detail::put_u32(out, static_cast<std::uint32_t>(ref.cols));
        for (size_t i = 0; i < ref.size; ++i) {
            detail::put_f32(out, static_cast<float>(ref.data[i]));
        }
    }
    if (!out) throw DataError("write failed for checkpoint: " + path);
}

inline ModelParams load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint: " + path);
    char magic[6];
    in.read(magic, 6);
    if (!in || std::memcmp(magic, checkpoint_magic, 6) != 0) {
        throw DataError("not a checkpoint file: " + path);
    }
    ModelConfig c;
    c.vocab_size = static_cast<int>(detail::get_u32(in));
    c.max_len = static_cast<int>(detail::get_u32(in));
    c.n_layers = static_cast<int>(detail::get_u32(in));
    c.n_heads = static_cast<int>(detail::get_u32(in));
    c.d_model = static_cast<int>(detail::get_u32(in));
    c.d_ff = static_cast<int>(detail::get_u32(in));
    c.seed = detail::get_u64(in);
    if (!in) throw DataError("truncated checkpoint header: " + path);

    ModelParams params = make_params_shell(c);
    for (auto& ref : tensor_refs(params)) {
        const auto name_len = detail::get_u32(in);
        if (!in || name_len > 256) {
            throw DataError("corrupt checkpoint tensor header: " + path);
        }
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        const auto rows = detail::get_u32(in);
        const auto cols = detail::get_u32(in);
        if (!in || name != ref.name || rows != static_cast<std::uint32_t>(ref.rows) ||
            cols != static_cast<std::uint32_t>(ref.cols)) {
            throw DataError("checkpoint tensor mismatch at '" + ref.name + "': " + path);
        }
        for (size_t i = 0; i < ref.size; ++i) {
            ref.data[i] = static_cast<double>(detail::get_f32(in));
        }
        if (!in) throw DataError("truncated checkpoint tensor '" + ref.name + "': " + path);
    }
    return params;
}

} // namespace kwsum
