#include "pinlab/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pinlab/error.hpp"

namespace pinlab {

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    // to_chars gives the shortest round-trip form and ignores the locale
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

CsvTable::Row& CsvTable::Row::operator<<(double x) {
    cells_.push_back(format_number(x));
    return *this;
}

CsvTable::Row& CsvTable::Row::operator<<(std::int64_t x) {
    cells_.push_back(std::to_string(x));
    return *this;
}

CsvTable::Row& CsvTable::Row::operator<<(bool x) {
    cells_.push_back(x ? "true" : "false");
    return *this;
}

CsvTable::Row& CsvTable::Row::operator<<(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        cells_.push_back(s);
        return *this;
    }
    std::string quoted = "\"";
    for (char c : s) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    cells_.push_back(quoted + "\"");
    return *this;
}

CsvTable::Row CsvTable::row() {
    rows_.emplace_back();
    return Row(rows_.back());
}

std::string CsvTable::str() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    line(header_);
    for (const auto& r : rows_) {
        if (r.size() != header_.size()) throw Error("csv: row width differs from the header");
        line(r);
    }
    return out;
}

void CsvTable::write(const std::filesystem::path& path) const { write_text(path, str()); }

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    f << text;
    if (!f) throw Error("write failed for " + path.string());
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    const std::string text = ss.str();
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::ostringstream os;
        os << path.string() << ":" << line << ":" << col << ": invalid JSON (" << e.what() << ")";
        throw ConfigError(os.str());
    }
}

}  // namespace pinlab
