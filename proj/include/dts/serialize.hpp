#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dts/common.hpp"

// Versioned structured-text model files. Doubles are written as C hexfloats
// so that serialize -> parse round-trips are bit-exact.

namespace dts {

inline std::string hexfloat(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%a", v);
    return buf;
}

inline double parse_double(const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    require(end != s.c_str() && end != nullptr && *end == '\0', "CorruptModel", "bad number '" + s + "'");
    return v;
}

class TextWriter {
public:
    void line(const std::string& s) { out_ << s << "\n"; }

    void kv(const std::string& key, const std::string& value) { out_ << key << " " << value << "\n"; }
    void kv(const std::string& key, int value) { out_ << key << " " << value << "\n"; }
    void kv(const std::string& key, std::uint64_t value) { out_ << key << " " << value << "\n"; }
    void kv(const std::string& key, double value) { out_ << key << " " << hexfloat(value) << "\n"; }

    void vec(const std::string& key, const std::vector<double>& v) {
        out_ << key;
        for (double x : v) out_ << " " << hexfloat(x);
        out_ << "\n";
    }

    std::string str() const { return out_.str(); }

    void save(const std::string& path) const {
        std::ofstream f(path, std::ios::binary);
        require(f.good(), "UnreadableFile", "cannot write '" + path + "'");
        f << out_.str();
        require(f.good(), "UnreadableFile", "short write to '" + path + "'");
    }

private:
    std::ostringstream out_;
};

// Line/token reader with one-token lookahead over whitespace-separated text.
class TextReader {
public:
    explicit TextReader(std::string text) : in_(std::move(text)) {}

    static TextReader from_file(const std::string& path) {
        std::ifstream f(path, std::ios::binary);
        require(f.good(), "UnreadableFile", "cannot open '" + path + "'");
        std::ostringstream ss;
        ss << f.rdbuf();
        return TextReader(ss.str());
    }

    std::string token() {
        std::string t;
        require(static_cast<bool>(in_ >> t), "CorruptModel", "unexpected end of model text");
        return t;
    }

    std::string expect_key(const std::string& key) {
        const std::string t = token();
        require(t == key, "CorruptModel", "expected '" + key + "', found '" + t + "'");
        return t;
    }

    std::string kv_str(const std::string& key) {
        expect_key(key);
        return token();
    }
    int kv_int(const std::string& key) { return std::stoi(kv_str(key)); }
    std::uint64_t kv_u64(const std::string& key) { return std::stoull(kv_str(key)); }
    double kv_double(const std::string& key) { return parse_double(kv_str(key)); }

    std::vector<double> kv_vec(const std::string& key, int count) {
        expect_key(key);
        std::vector<double> v(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i) v[static_cast<std::size_t>(i)] = parse_double(token());
        return v;
    }

    bool peek_is(const std::string& key) {
        const auto pos = in_.tellg();
        std::string t;
        if (!(in_ >> t)) {
            in_.clear();
            in_.seekg(pos);
            return false;
        }
        in_.clear();
        in_.seekg(pos);
        return t == key;
    }

    bool at_end() {
        const auto pos = in_.tellg();
        std::string t;
        if (in_ >> t) {
            in_.clear();
            in_.seekg(pos);
            return false;
        }
        in_.clear();
        return true;
    }

private:
    std::istringstream in_;
};

} // namespace dts
