#pragma once

/** @file csv.hpp
 *  @brief CSV tables with a one-line comment header and fixed column order.
 */

#include "errors.hpp"

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <type_traits>
#include <string>
#include <vector>

namespace heatchain {

class CsvTable {
public:
    CsvTable(std::string comment, std::vector<std::string> columns)
        : comment_(std::move(comment)), cols_(std::move(columns)) {}

    /// Appends a row; values are formatted with %.17g so files round-trip exactly.
    template <class... Ts>
    void row(const Ts&... v)
    {
        std::vector<std::string> r;
        (r.push_back(cell(v)), ...);
        require(r.size() == cols_.size(), "CSV row has the wrong number of columns");
        rows_.push_back(std::move(r));
    }

    void row_strings(std::vector<std::string> r)
    {
        require(r.size() == cols_.size(), "CSV row has the wrong number of columns");
        rows_.push_back(std::move(r));
    }

    std::string str() const
    {
        std::ostringstream os;
        os << "# " << comment_ << '\n';
        for (std::size_t i = 0; i < cols_.size(); ++i)
            os << (i ? "," : "") << cols_[i];
        os << '\n';
        for (const auto& r : rows_) {
            for (std::size_t i = 0; i < r.size(); ++i)
                os << (i ? "," : "") << r[i];
            os << '\n';
        }
        return os.str();
    }

    void write(const std::string& path) const
    {
        std::ofstream out(path, std::ios::binary);
        require(bool(out), "cannot write '" + path + "'");
        out << str();
    }

    std::size_t size() const { return rows_.size(); }

    static std::string cell(double v)
    {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    }
    static std::string cell(const std::string& s) { return s; }
    static std::string cell(const char* s) { return s; }
    static std::string cell(bool b) { return b ? "true" : "false"; }
    template <class I, class = std::enable_if_t<std::is_integral_v<I>>>
    static std::string cell(I v)
    {
        return std::to_string(v);
    }

private:
    std::string comment_;
    std::vector<std::string> cols_;
    std::vector<std::vector<std::string>> rows_;
};

} // namespace heatchain
