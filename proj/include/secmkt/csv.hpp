#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace secmkt {

/// Fixed 6-decimal rendering used for every numeric output so golden files stay stable.
std::string fmt_num(double value);

/// Minimal CSV writer. Cells are written verbatim; callers avoid commas in text fields.
class CsvWriter {
public:
    explicit CsvWriter(const std::filesystem::path& path);

    void header(std::initializer_list<std::string_view> names);
    void header(const std::vector<std::string>& names);
    CsvWriter& cell(std::string_view text);
    CsvWriter& cell(double value);
    CsvWriter& cell(int value);
    CsvWriter& cell(long long value);
    CsvWriter& cell(std::size_t value);
    void end_row();

private:
    void sep();

    std::ofstream out_;
    bool row_started_ = false;
};

}  // namespace secmkt
