#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace sepmix {

inline constexpr const char* kVersion = "sepmix 0.1.0";

// Shortest decimal that reads back to the same double.
std::string fmt_double(double v);

std::uint64_t fnv1a(std::string_view s);
std::string hex64(std::uint64_t v);

// Writes through a temporary file in the same directory, then renames.
void write_atomic(const std::string& path, const std::string& content);

class CsvWriter {
public:
    CsvWriter(const std::string& config_hash, const std::vector<std::string>& header);
    CsvWriter& cell(double v);
    CsvWriter& cell(long long v);
    CsvWriter& cell(int v) { return cell(static_cast<long long>(v)); }
    CsvWriter& cell(const std::string& s);
    void end_row();
    const std::string& str() const { return out_; }

private:
    std::string out_;
    bool fresh_ = true;
};

}  // namespace sepmix
