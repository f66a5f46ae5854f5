#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace pinlab {

/// Shortest text that reads back to the same double ("%.17g" trimmed),
/// independent of the global locale.
std::string format_number(double x);

/// Small CSV table; cells are stored as text and written with '\n' endings.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    class Row {
    public:
        Row& operator<<(double x);
        Row& operator<<(std::int64_t x);
        Row& operator<<(int x) { return *this << static_cast<std::int64_t>(x); }
        Row& operator<<(std::size_t x) { return *this << static_cast<std::int64_t>(x); }
        Row& operator<<(bool x);
        Row& operator<<(const std::string& s);
        Row& operator<<(const char* s) { return *this << std::string(s); }

    private:
        friend class CsvTable;
        explicit Row(std::vector<std::string>& cells) : cells_(cells) {}
        std::vector<std::string>& cells_;
    };

    Row row();
    std::size_t rows() const { return rows_.size(); }
    const std::vector<std::string>& header() const { return header_; }
    std::string str() const;
    void write(const std::filesystem::path& path) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

/// Parses a JSON file; syntax errors come back as ConfigError with line and column.
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace pinlab
