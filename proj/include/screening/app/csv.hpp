#pragma once

#include <charconv>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace screening::app {

/// Shortest decimal text that parses back to the same double.
inline std::string format_number(double x)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    if (res.ec != std::errc{}) throw std::runtime_error("number formatting failed");
    return {buf, res.ptr};
}

inline double parse_number(std::string_view s)
{
    double x = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw std::invalid_argument("not a number: " + std::string(s));
    return x;
}

class CsvWriter {
public:
    CsvWriter(std::ostream& out, std::vector<std::string> header) : out_(out), width_(header.size())
    {
        row(header);
    }

    void row(const std::vector<std::string>& cells)
    {
        if (cells.size() != width_) throw std::logic_error("CSV row width does not match header");
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

private:
    std::ostream& out_;
    std::size_t width_;
};

inline std::vector<std::string> split_csv_line(std::string_view line)
{
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        cells.emplace_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

} // namespace screening::app
