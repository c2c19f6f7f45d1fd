#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dts/common.hpp"

namespace dts {

enum class FeatureKind { ScopDt, LbpTop, External };

inline std::string feature_kind_tag(FeatureKind k) {
    switch (k) {
        case FeatureKind::ScopDt: return "SCOPDT";
        case FeatureKind::LbpTop: return "LBPTOP";
        case FeatureKind::External: return "EXTERNAL";
    }
    fail("DimensionMismatch", "unhandled feature kind");
}

inline FeatureKind feature_kind_from_string(std::string s) {
    for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (s == "SCOPDT") return FeatureKind::ScopDt;
    if (s == "LBPTOP") return FeatureKind::LbpTop;
    if (s == "EXTERNAL") return FeatureKind::External;
    fail("UnreadableFile", "unknown feature kind '" + s + "'");
}

// Fixed-length real feature vector for one video, tagged by extractor kind.
struct Descriptor {
    FeatureKind kind = FeatureKind::External;
    std::vector<double> values;

    int dim() const { return static_cast<int>(values.size()); }
};

// id -> descriptor; std::map keeps iteration deterministic.
using FeatureTable = std::map<std::string, Descriptor>;

// Feature file ("DTFEAT"): text header "DTFEAT 1 <kind> <dim>\n" followed by
// one "<id> v1 ... vdim" line per video. The binary variant appends a
// "binary" token to the header; records are [u32 LE id length][id bytes]
// [dim little-endian f32]. Layouts in docs/FORMATS.md.

inline void write_feature_file(const std::string& path, const FeatureTable& table, FeatureKind kind, int dim,
                               bool binary = false) {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), "UnreadableFile", "cannot write '" + path + "'");
    out << "DTFEAT 1 " << feature_kind_tag(kind) << " " << dim << (binary ? " binary" : "") << "\n";
    for (const auto& [id, d] : table) {
        require(d.dim() == dim, "DimensionMismatch", "descriptor for '" + id + "' has dim " +
                                                         std::to_string(d.dim()) + ", file dim " + std::to_string(dim));
        if (binary) {
            const std::uint32_t len = static_cast<std::uint32_t>(id.size());
            out.write(reinterpret_cast<const char*>(&len), 4);
            out.write(id.data(), static_cast<std::streamsize>(id.size()));
            for (double v : d.values) {
                const float f = static_cast<float>(v);
                out.write(reinterpret_cast<const char*>(&f), 4);
            }
        } else {
            out << id;
            char buf[40];
            for (double v : d.values) {
                std::snprintf(buf, sizeof(buf), " %.17g", v);
                out << buf;
            }
            out << "\n";
        }
    }
    require(out.good(), "UnreadableFile", "short write to '" + path + "'");
}

inline FeatureTable read_feature_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), "UnreadableFile", "cannot open '" + path + "'");
    std::string header;
    std::getline(in, header);
    std::istringstream hs(header);
    std::string magic, kind_tag, enc;
    int version = 0, dim = 0;
    hs >> magic >> version >> kind_tag >> dim;
    require(magic == "DTFEAT" && version == 1, "UnreadableFile", "'" + path + "' is not a DTFEAT 1 file");
    require(dim >= 1, "DimensionMismatch", "'" + path + "' declares dim " + std::to_string(dim));
    const FeatureKind kind = feature_kind_from_string(kind_tag);
    hs >> enc;
    const bool binary = enc == "binary";

    FeatureTable table;
    if (binary) {
        while (true) {
            std::uint32_t len = 0;
            in.read(reinterpret_cast<char*>(&len), 4);
            if (!in) break;
            std::string id(len, '\0');
            in.read(id.data(), len);
            Descriptor d;
            d.kind = kind;
            d.values.resize(static_cast<std::size_t>(dim));
            for (int i = 0; i < dim; ++i) {
                float f = 0;
                in.read(reinterpret_cast<char*>(&f), 4);
                d.values[static_cast<std::size_t>(i)] = f;
            }
            require(static_cast<bool>(in), "UnreadableFile", "'" + path + "' truncated binary record");
            require(!table.count(id), "DuplicateId", "id '" + id + "' appears twice in '" + path + "'");
            table.emplace(std::move(id), std::move(d));
        }
    } else {
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            std::istringstream ls(line);
            std::string id;
            ls >> id;
            Descriptor d;
            d.kind = kind;
            double v;
            while (ls >> v) d.values.push_back(v);
            require(d.dim() == dim, "DimensionMismatch",
                    "row '" + id + "' in '" + path + "' has " + std::to_string(d.dim()) + " values, expected " +
                        std::to_string(dim));
            require(!table.count(id), "DuplicateId", "id '" + id + "' appears twice in '" + path + "'");
            table.emplace(std::move(id), std::move(d));
        }
    }
    return table;
}

// Precomputed external features (the generic deep-feature stand-in).
// Accepts either a DTFEAT file or bare "<id> v1 ... vdim" rows.
inline FeatureTable ingest_external(const std::string& path, int expected_dim) {
    std::ifstream probe(path, std::ios::binary);
    require(probe.good(), "UnreadableFile", "cannot open '" + path + "'");
    std::string first;
    std::getline(probe, first);
    probe.close();

    FeatureTable table;
    if (first.rfind("DTFEAT", 0) == 0) {
        table = read_feature_file(path);
    } else {
        std::ifstream in(path);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            std::istringstream ls(line);
            std::string id;
            ls >> id;
            Descriptor d;
            double v;
            while (ls >> v) d.values.push_back(v);
            require(!table.count(id), "DuplicateId", "id '" + id + "' appears twice in '" + path + "'");
            table.emplace(std::move(id), std::move(d));
        }
    }
    for (auto& [id, d] : table) {
        d.kind = FeatureKind::External;
        require(d.dim() == expected_dim, "DimensionMismatch",
                "external row '" + id + "' has dim " + std::to_string(d.dim()) + ", expected " +
                    std::to_string(expected_dim));
    }
    return table;
}

} // namespace dts
