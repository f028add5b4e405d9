#include "sepmix/format.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <system_error>

#include "sepmix/errors.hpp"

namespace sepmix {

std::string fmt_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void write_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Error(ErrorKind::InvalidArgument, "cannot open " + tmp.string() + " for writing");
        f << content;
        if (!f) throw Error(ErrorKind::InvalidArgument, "write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw Error(ErrorKind::InvalidArgument, "rename to " + target.string() + " failed: " + ec.message());
}

CsvWriter::CsvWriter(const std::string& config_hash, const std::vector<std::string>& header) {
    out_ = "# config_hash=" + config_hash + " version=" + kVersion + "\n";
    for (const auto& h : header) cell(h);
    end_row();
}

CsvWriter& CsvWriter::cell(double v) { return cell(fmt_double(v)); }

CsvWriter& CsvWriter::cell(long long v) { return cell(std::to_string(v)); }

CsvWriter& CsvWriter::cell(const std::string& s) {
    if (!fresh_) out_ += ',';
    out_ += s;
    fresh_ = false;
    return *this;
}

void CsvWriter::end_row() {
    out_ += '\n';
    fresh_ = true;
}

}  // namespace sepmix
