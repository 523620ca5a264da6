#include "asbf/csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace asbf {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        // Trim surrounding whitespace and a possible trailing CR.
        auto b = cell.find_first_not_of(" \t\r");
        auto e = cell.find_last_not_of(" \t\r");
        cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& col) {
    double v = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc{} || res.ptr != end) {
        std::ostringstream msg;
        msg << "cannot parse number '" << cell << "' at data row " << row << ", column "
            << col;
        throw ValidationError(msg.str());
    }
    return v;
}

}  // namespace

int CsvTable::col(const std::string& name) const {
    auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

CsvTable read_csv(std::istream& in) {
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("empty CSV input");
    table.header = split_line(line);
    std::size_t rownum = 0;
    while (std::getline(in, line)) {
        ++rownum;
        if (line.empty() || line == "\r") continue;
        auto cells = split_line(line);
        if (cells.size() != table.header.size()) {
            std::ostringstream msg;
            msg << "CSV row " << rownum << " has " << cells.size() << " cells, expected "
                << table.header.size();
            throw ValidationError(msg.str());
        }
        table.rows.push_back(std::move(cells));
    }
    if (table.rows.empty()) throw ValidationError("CSV has a header but no data rows");
    return table;
}

CsvTable read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open CSV file: " + path);
    return read_csv(in);
}

ParsedCsv parse_dataset_csv(const CsvTable& table, const std::string& group_by) {
    // Covariate columns are named x1..xd and must form a contiguous range.
    std::vector<std::pair<int, int>> x_cols;  // (covariate index, column)
    int y_col = -1, a_col = -1, g_col = -1;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        const std::string& name = table.header[c];
        if (name == "y") {
            y_col = static_cast<int>(c);
        } else if (name == "a") {
            a_col = static_cast<int>(c);
        } else if (!group_by.empty() && name == group_by) {
            g_col = static_cast<int>(c);
        } else if (name.size() >= 2 && name[0] == 'x' &&
                   name.find_first_not_of("0123456789", 1) == std::string::npos) {
            x_cols.emplace_back(std::stoi(name.substr(1)), static_cast<int>(c));
        } else {
            throw ValidationError("unrecognized CSV column '" + name +
                                  "' (expected x1..xd, y, a, or the --group-by column)");
        }
    }
    if (y_col < 0) throw ValidationError("CSV is missing the response column 'y'");
    if (!group_by.empty() && g_col < 0) {
        throw ValidationError("CSV is missing the group column '" + group_by + "'");
    }
    if (x_cols.empty()) throw ValidationError("CSV has no covariate columns x1..xd");
    std::sort(x_cols.begin(), x_cols.end());
    for (std::size_t t = 0; t < x_cols.size(); ++t) {
        if (x_cols[t].first != static_cast<int>(t) + 1) {
            throw ValidationError("covariate columns must be named x1..xd without gaps");
        }
    }

    ParsedCsv out;
    out.d = static_cast<int>(x_cols.size());
    const int n = static_cast<int>(table.rows.size());
    out.x.resize(n, out.d);
    out.y.resize(n);
    if (a_col >= 0) out.a = Eigen::VectorXi(n);
    if (g_col >= 0) out.group.resize(n);
    for (int i = 0; i < n; ++i) {
        const auto& row = table.rows[i];
        for (int j = 0; j < out.d; ++j) {
            out.x(i, j) = parse_cell(row[x_cols[j].second], i, table.header[x_cols[j].second]);
        }
        out.y(i) = parse_cell(row[y_col], i, "y");
        if (a_col >= 0) {
            const double av = parse_cell(row[a_col], i, "a");
            if (av != 0.0 && av != 1.0) {
                std::ostringstream msg;
                msg << "treatment value at data row " << i << " is not 0/1";
                throw ValidationError(msg.str());
            }
            (*out.a)(i) = static_cast<int>(av);
        }
        if (g_col >= 0) out.group[i] = row[g_col];
    }
    return out;
}

Dataset dataset_from_parsed(const ParsedCsv& parsed, bool rescale) {
    Eigen::MatrixXd x = rescale ? minmax_rescale(parsed.x) : parsed.x;
    return make_dataset(std::move(x), parsed.y, parsed.a);
}

Eigen::MatrixXd parse_query_csv(const CsvTable& table, int expected_d, bool clamp) {
    ParsedCsv parsed;
    // Accept either bare covariate files or full dataset files; extra roles
    // are ignored for prediction.
    std::vector<std::pair<int, int>> x_cols;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        const std::string& name = table.header[c];
        if (name.size() >= 2 && name[0] == 'x' &&
            name.find_first_not_of("0123456789", 1) == std::string::npos) {
            x_cols.emplace_back(std::stoi(name.substr(1)), static_cast<int>(c));
        }
    }
    std::sort(x_cols.begin(), x_cols.end());
    if (static_cast<int>(x_cols.size()) != expected_d) {
        std::ostringstream msg;
        msg << "query dimension " << x_cols.size() << " does not match forest dimension "
            << expected_d;
        throw ValidationError(msg.str());
    }
    const int n = static_cast<int>(table.rows.size());
    Eigen::MatrixXd x(n, expected_d);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < expected_d; ++j) {
            double v = parse_cell(table.rows[i][x_cols[j].second], i,
                                  table.header[x_cols[j].second]);
            if (clamp) v = std::clamp(v, 0.0, 1.0);
            x(i, j) = v;
        }
    }
    return x;
}

}  // namespace asbf
