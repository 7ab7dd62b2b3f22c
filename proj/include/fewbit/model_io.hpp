#pragma once

#include <bit>
#include <cstdint>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "fewbit/tensor.hpp"

namespace fewbit {

// Flat binary model container, little-endian:
//   magic "FCMP" | version u16 | dtype u8 (4=f32, 8=f64) | count u32
//   then per tensor: name_len u32, name bytes, ndim u32, dims u64..., values.
// Loading matches tensors by name and requires identical shapes.

namespace io {

inline void put_bytes(std::vector<std::uint8_t>& out, const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out.insert(out.end(), b, b + n);
}

template <class U>
void put_le(std::vector<std::uint8_t>& out, U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i)
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
  public:
    Reader(const std::uint8_t* p, std::size_t n, std::string what)
        : p_(p), n_(n), what_(std::move(what)) {}

    template <class U>
    U get_le() {
        need(sizeof(U));
        U v = 0;
        for (std::size_t i = 0; i < sizeof(U); ++i)
            v |= static_cast<U>(p_[pos_ + i]) << (8 * i);
        pos_ += sizeof(U);
        return v;
    }

    std::string get_string(std::size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(p_ + pos_), n);
        pos_ += n;
        return s;
    }

    void need(std::size_t n) const {
        if (pos_ + n > n_)
            throw std::runtime_error(what_ + ": truncated, expected " + std::to_string(pos_ + n) +
                                     " bytes, got " + std::to_string(n_) + " (at offset " +
                                     std::to_string(pos_) + ")");
    }

    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return n_ - pos_; }

  private:
    const std::uint8_t* p_;
    std::size_t n_;
    std::size_t pos_ = 0;
    std::string what_;
};

}  // namespace io

template <class T>
using NamedTensors = std::vector<std::pair<std::string, Tensor<T>*>>;

template <class T>
std::vector<std::uint8_t> serialize_model(const NamedTensors<T>& tensors) {
    std::vector<std::uint8_t> out;
    io::put_bytes(out, "FCMP", 4);
    io::put_le<std::uint16_t>(out, 1);
    out.push_back(static_cast<std::uint8_t>(sizeof(T)));
    io::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& [name, tensor] : tensors) {
        io::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
        io::put_bytes(out, name.data(), name.size());
        io::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(tensor->shape.size()));
        for (auto d : tensor->shape) io::put_le<std::uint64_t>(out, d);
        for (const T& x : tensor->v) {
            if constexpr (sizeof(T) == 4)
                io::put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(x));
            else
                io::put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(x));
        }
    }
    return out;
}

template <class T>
void deserialize_model(const std::vector<std::uint8_t>& bytes, const NamedTensors<T>& tensors) {
    io::Reader r(bytes.data(), bytes.size(), "model file");
    if (r.get_string(4) != "FCMP") throw std::runtime_error("model file: bad magic");
    const auto version = r.get_le<std::uint16_t>();
    if (version != 1)
        throw std::runtime_error("model file: unsupported version " + std::to_string(version));
    const auto dtype = r.get_le<std::uint8_t>();
    if (dtype != sizeof(T))
        throw std::runtime_error("model file: dtype width " + std::to_string(dtype) +
                                 " does not match expected " + std::to_string(sizeof(T)));
    const auto count = r.get_le<std::uint32_t>();
    if (count != tensors.size())
        throw std::runtime_error("model file: has " + std::to_string(count) +
                                 " tensors, model expects " + std::to_string(tensors.size()));
    for (const auto& [name, tensor] : tensors) {
        const auto name_len = r.get_le<std::uint32_t>();
        const std::string got = r.get_string(name_len);
        if (got != name)
            throw std::runtime_error("model file: expected tensor '" + name + "', found '" +
                                     got + "'");
        const auto ndim = r.get_le<std::uint32_t>();
        Shape shape(ndim);
        for (auto& d : shape) d = r.get_le<std::uint64_t>();
        if (shape != tensor->shape)
            throw std::runtime_error("model file: tensor '" + name + "' has shape " +
                                     shape_str(shape) + ", model expects " +
                                     shape_str(tensor->shape));
        for (T& x : tensor->v) {
            if constexpr (sizeof(T) == 4)
                x = std::bit_cast<T>(r.get_le<std::uint32_t>());
            else
                x = std::bit_cast<T>(r.get_le<std::uint64_t>());
        }
    }
}

inline void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (!f) throw std::runtime_error("write failed for " + path);
}

inline std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary | std::ios::ate);
    if (!f) throw std::runtime_error("cannot read " + path);
    const auto size = f.tellg();
    f.seekg(0);
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
    f.read(reinterpret_cast<char*>(bytes.data()), size);
    if (!f) throw std::runtime_error("read failed for " + path);
    return bytes;
}

}  // namespace fewbit
