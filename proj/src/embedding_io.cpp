#include "poolmatch/embedding_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace poolmatch {

namespace {

std::uint32_t read_u32_le(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw std::runtime_error("embedding file: truncated header");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_u32_le(std::ostream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                                static_cast<unsigned char>((v >> 8) & 0xff),
                                static_cast<unsigned char>((v >> 16) & 0xff),
                                static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

float read_f32_le(std::istream& in) {
    const std::uint32_t bits = read_u32_le(in);
    float f;
    std::memcpy(&f, &bits, 4);
    return f;
}

void write_f32_le(std::ostream& out, float f) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    write_u32_le(out, bits);
}

}  // namespace

std::vector<Eigen::VectorXd> load_embeddings_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("embedding file: cannot open " + path);
    const std::uint32_t count = read_u32_le(in);
    const std::uint32_t dim = read_u32_le(in);
    if (dim == 0) throw std::runtime_error("embedding file: zero dimension");
    std::vector<Eigen::VectorXd> rows;
    rows.reserve(count);
    for (std::uint32_t r = 0; r < count; ++r) {
        Eigen::VectorXd v(dim);
        for (std::uint32_t c = 0; c < dim; ++c) v[static_cast<int>(c)] = read_f32_le(in);
        rows.push_back(std::move(v));
    }
    return rows;
}

void save_embeddings_binary(const std::string& path, const std::vector<Eigen::VectorXd>& rows) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("embedding file: cannot write " + path);
    const std::uint32_t count = static_cast<std::uint32_t>(rows.size());
    const std::uint32_t dim = rows.empty() ? 0u : static_cast<std::uint32_t>(rows.front().size());
    write_u32_le(out, count);
    write_u32_le(out, dim);
    for (const auto& v : rows) {
        if (static_cast<std::uint32_t>(v.size()) != dim)
            throw std::invalid_argument("embedding file: ragged rows");
        for (int c = 0; c < v.size(); ++c) write_f32_le(out, static_cast<float>(v[c]));
    }
}

std::vector<Eigen::VectorXd> load_embeddings_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("embedding file: cannot open " + path);
    std::vector<Eigen::VectorXd> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> values;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) values.push_back(std::stod(cell));
        if (!rows.empty() && values.size() != static_cast<std::size_t>(rows.front().size()))
            throw std::runtime_error("embedding file: ragged CSV rows");
        Eigen::VectorXd v(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) v[static_cast<int>(i)] = values[i];
        rows.push_back(std::move(v));
    }
    return rows;
}

void save_embeddings_csv(const std::string& path, const std::vector<Eigen::VectorXd>& rows) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("embedding file: cannot write " + path);
    out.precision(17);
    for (const auto& v : rows) {
        for (int c = 0; c < v.size(); ++c) {
            if (c) out << ',';
            out << v[c];
        }
        out << '\n';
    }
}

}  // namespace poolmatch
