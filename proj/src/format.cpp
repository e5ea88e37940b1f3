#include "evoprune/format.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "evoprune/errors.hpp"

namespace evoprune {

void check_format(const nlohmann::json& j, std::string_view expected) {
    if (!j.is_object() || !j.contains("format") || !j["format"].is_string())
        throw FormatError("missing format tag, expected " + std::string(expected));
    const auto tag = j["format"].get<std::string>();
    if (tag != expected) throw FormatError("format tag '" + tag + "' but expected '" + std::string(expected) + "'");
}

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw FormatError("cannot write " + tmp.string());
        out << contents;
        if (!out.flush()) throw FormatError("write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
}

}  // namespace evoprune
