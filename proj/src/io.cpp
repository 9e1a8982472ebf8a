#include "cycsig/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "cycsig/errors.hpp"

namespace cycsig::io {

namespace fs = std::filesystem;

fs::path meta_path(const fs::path& csv) {
    auto p = csv;
    p += ".meta.json";
    return p;
}

void write_trajectory(const fs::path& csv, const systems::LiftedSeries& lifted, const nlohmann::json& meta) {
    const std::size_t d = lifted.dim;
    std::string out;
    out.reserve(lifted.size() * d * 2 * 24);
    for (std::size_t c = 0; c < d; ++c) out += (c ? ",x" : "x") + std::to_string(c);
    for (std::size_t c = 0; c < d; ++c) out += ",v" + std::to_string(c);
    out += '\n';
    char buf[32];
    for (std::size_t i = 0; i < lifted.size(); ++i) {
        auto p = lifted.point(i);
        auto v = lifted.tangent(i);
        for (std::size_t c = 0; c < 2 * d; ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", c < d ? p[c] : v[c - d]);
            if (c) out += ',';
            out += buf;
        }
        out += '\n';
    }
    write_text(csv, out);
    auto m = meta;
    m["dim"] = d;
    m["points"] = lifted.size();
    write_json(meta_path(csv), m);
}

Trajectory read_trajectory(const fs::path& csv) {
    Trajectory t;
    t.meta = read_json(meta_path(csv));
    const auto d = t.meta.at("dim").get<std::size_t>();
    const auto n = t.meta.at("points").get<std::size_t>();
    std::ifstream in(csv);
    if (!in) throw Error("cannot open trajectory " + csv.string());
    std::string line;
    std::getline(in, line);
    t.lifted.dim = d;
    t.lifted.points.reserve(n * d);
    t.lifted.tangents.reserve(n * d);
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const char* s = line.c_str();
        for (std::size_t c = 0; c < 2 * d; ++c) {
            char* end = nullptr;
            const double v = std::strtod(s, &end);
            if (end == s) throw Error("trajectory row " + std::to_string(row + 1) + " is malformed");
            (c < d ? t.lifted.points : t.lifted.tangents).push_back(v);
            s = *end == ',' ? end + 1 : end;
        }
        ++row;
    }
    if (row != n) throw Error("trajectory has " + std::to_string(row) + " rows, metadata says " + std::to_string(n));
    return t;
}

nlohmann::json read_json(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw Error("cannot open " + file.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(file.string() + ": " + e.what());
    }
}

void write_json(const fs::path& file, const nlohmann::json& j) { write_text(file, j.dump(2) + "\n"); }

void write_text(const fs::path& file, const std::string& text) {
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::binary);
    if (!out) throw Error("cannot write " + file.string());
    out << text;
    if (!out) throw Error("write failed for " + file.string());
}

std::string read_text(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error("cannot open " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string sha256_file(const fs::path& file) { return sha256(read_text(file)); }

std::string sha256(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

}  // namespace cycsig::io
