#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace selftrain {

// %.17g formatting; enough digits to round-trip a double exactly.
std::string format_g17(double v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

// UTF-8, LF line endings, header row first.
void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace selftrain
