#include "bubblelab/io/output.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "bubblelab/error.hpp"

#ifndef BUBBLELAB_VERSION
#define BUBBLELAB_VERSION "0.0.0"
#endif

namespace bubblelab::io {

std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
    if (header_.empty()) throw InvalidArgument("CSV header must be nonempty");
}

void CsvTable::add_row(std::vector<Cell> row) {
    if (row.size() != header_.size()) throw InvalidArgument("CSV row width does not match the header");
    rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
    std::string s;
    for (std::size_t i = 0; i < header_.size(); ++i) s += (i ? "," : "") + header_[i];
    s += "\n";
    for (const auto& row : rows_) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) s += ",";
            if (const double* d = std::get_if<double>(&row[i]))
                s += format_real(*d);
            else if (const long long* k = std::get_if<long long>(&row[i]))
                s += std::to_string(*k);
            else
                s += std::get<std::string>(row[i]);
        }
        s += "\n";
    }
    return s;
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr))
        throw Error("SHA-256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::string RunManifest::json() const {
    nlohmann::ordered_json j;
    j["experiment"] = experiment;
    j["artifact_version"] = version;
    j["config_sha256"] = config_hash;
    j["pass"] = pass;
    j["failed"] = failed;
    j["files"] = nlohmann::ordered_json::array();
    for (const auto& f : files)
        j["files"].push_back({{"name", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    j["steps"] = nlohmann::ordered_json::array();
    for (const auto& t : timings) j["steps"].push_back(t.step);
    j["timings_file"] = "timings.json";
    return j.dump(2) + "\n";
}

std::string RunManifest::timings_json() const {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& t : timings) j[t.step] = t.seconds;
    return j.dump(2) + "\n";
}

const char* artifact_version() { return BUBBLELAB_VERSION; }

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << content;
    if (!out) throw Error("write to '" + path + "' failed");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace bubblelab::io
