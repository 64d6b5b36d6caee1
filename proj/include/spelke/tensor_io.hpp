#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "spelke/common.hpp"
#include "spelke/fields.hpp"

#include <json.hpp>

namespace spelke {

// Binary tensor format: one newline-terminated JSON header line
// {"dtype":"f32","shape":[...]} followed by the payload as little-endian
// IEEE-754 f32, row-major.
struct Tensor {
    std::vector<std::uint32_t> shape;
    std::vector<float> data;

    std::size_t element_count() const {
        std::size_t n = 1;
        for (auto d : shape) n *= d;
        return n;
    }
};

inline void write_tensor(const std::filesystem::path& path, const Tensor& tensor) {
    if (tensor.data.size() != tensor.element_count())
        throw io_error("tensor payload does not match its shape");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open " + path.string() + " for writing");
    std::string header = "{\"dtype\":\"f32\",\"shape\":[";
    for (std::size_t i = 0; i < tensor.shape.size(); ++i) {
        if (i) header += ',';
        header += std::to_string(tensor.shape[i]);
    }
    header += "]}\n";
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    for (float v : tensor.data) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        const unsigned char bytes[4] = {
            static_cast<unsigned char>(bits & 0xFF),
            static_cast<unsigned char>((bits >> 8) & 0xFF),
            static_cast<unsigned char>((bits >> 16) & 0xFF),
            static_cast<unsigned char>((bits >> 24) & 0xFF)};
        out.write(reinterpret_cast<const char*>(bytes), 4);
    }
    if (!out) throw io_error("short write to " + path.string());
}

inline Tensor read_tensor(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open " + path.string());
    std::string header;
    if (!std::getline(in, header)) throw io_error("missing tensor header in " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(header);
    } catch (const nlohmann::json::exception& e) {
        throw io_error("bad tensor header in " + path.string() + ": " + e.what());
    }
    if (j.value("dtype", "") != "f32")
        throw io_error("unsupported tensor dtype in " + path.string());
    Tensor tensor;
    for (const auto& d : j.at("shape")) tensor.shape.push_back(d.get<std::uint32_t>());
    tensor.data.resize(tensor.element_count());
    std::vector<unsigned char> raw(tensor.data.size() * 4);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size())
        throw io_error("tensor payload truncated in " + path.string());
    if (in.peek() != std::char_traits<char>::eof())
        throw io_error("trailing bytes after tensor payload in " + path.string());
    for (std::size_t i = 0; i < tensor.data.size(); ++i) {
        const std::uint32_t bits = static_cast<std::uint32_t>(raw[4 * i]) |
                                   (static_cast<std::uint32_t>(raw[4 * i + 1]) << 8) |
                                   (static_cast<std::uint32_t>(raw[4 * i + 2]) << 16) |
                                   (static_cast<std::uint32_t>(raw[4 * i + 3]) << 24);
        std::memcpy(&tensor.data[i], &bits, sizeof(float));
    }
    return tensor;
}

// --- conversions to/from the map types ------------------------------------

inline Tensor tensor_from_scalar_map(const GridShape& grid, const std::vector<double>& values) {
    Tensor t;
    t.shape = {grid.height, grid.width};
    t.data.reserve(values.size());
    for (double v : values) t.data.push_back(static_cast<float>(v));
    return t;
}

inline Tensor tensor_from_vector_map(const GridShape& grid,
                                     const std::vector<FlowVector>& vectors) {
    Tensor t;
    t.shape = {grid.height, grid.width, 2};
    t.data.reserve(vectors.size() * 2);
    for (const auto& v : vectors) {
        t.data.push_back(static_cast<float>(v.dx));
        t.data.push_back(static_cast<float>(v.dy));
    }
    return t;
}

inline Tensor tensor_from_distribution_field(const DistributionField& field) {
    const std::uint32_t f =
        field.distributions.empty()
            ? 0
            : static_cast<std::uint32_t>(field.distributions.front().probabilities.size());
    Tensor t;
    t.shape = {field.grid.height, field.grid.width, f};
    t.data.reserve(static_cast<std::size_t>(field.grid.locations()) * f);
    for (const auto& dist : field.distributions)
        for (double p : dist.probabilities) t.data.push_back(static_cast<float>(p));
    return t;
}

}  // namespace spelke
