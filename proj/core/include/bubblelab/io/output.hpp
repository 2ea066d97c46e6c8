#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace bubblelab::io {

/// %.17g; nan and inf spelled as such.
std::string format_real(double v);

using Cell = std::variant<double, long long, std::string>;

/// Fixed-header CSV; rows must match the header width.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);
    void add_row(std::vector<Cell> row);
    std::size_t rows() const { return rows_.size(); }
    const std::vector<std::string>& header() const { return header_; }
    std::string str() const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<Cell>> rows_;
};

std::string sha256_hex(const std::string& bytes);

struct FileRecord {
    std::string name;
    std::string sha256;
    std::size_t bytes = 0;
};

struct StepTiming {
    std::string step;
    double seconds = 0.0;
};

/// Everything in the manifest is a function of config and version; wall-clock
/// timings live in a separate sidecar so manifests stay byte-identical.
struct RunManifest {
    std::string experiment;
    std::string config_hash;
    std::string version;
    bool pass = false;
    bool failed = false;  // a module raised; outputs are partial
    std::vector<FileRecord> files;
    std::vector<StepTiming> timings;

    std::string json() const;
    std::string timings_json() const;
};

const char* artifact_version();

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace bubblelab::io
