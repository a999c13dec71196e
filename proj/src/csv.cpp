#include "secmkt/csv.hpp"

#include <cmath>
#include <cstdio>

#include "secmkt/error.hpp"

namespace secmkt {

std::string fmt_num(double value) {
    if (std::abs(value) < 5e-7) value = 0.0;  // avoid "-0.000000"
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", value);
    return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path) : out_(path) {
    if (!out_) throw Error("cannot open " + path.string() + " for writing");
}

void CsvWriter::header(std::initializer_list<std::string_view> names) {
    for (auto n : names) cell(n);
    end_row();
}

void CsvWriter::header(const std::vector<std::string>& names) {
    for (const auto& n : names) cell(n);
    end_row();
}

void CsvWriter::sep() {
    if (row_started_) out_ << ',';
    row_started_ = true;
}

CsvWriter& CsvWriter::cell(std::string_view text) {
    sep();
    out_ << text;
    return *this;
}

CsvWriter& CsvWriter::cell(double value) {
    sep();
    out_ << fmt_num(value);
    return *this;
}

CsvWriter& CsvWriter::cell(int value) {
    sep();
    out_ << value;
    return *this;
}

CsvWriter& CsvWriter::cell(long long value) {
    sep();
    out_ << value;
    return *this;
}

CsvWriter& CsvWriter::cell(std::size_t value) {
    sep();
    out_ << value;
    return *this;
}

void CsvWriter::end_row() {
    out_ << '\n';
    row_started_ = false;
}

}  // namespace secmkt
