#pragma once
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "asbf/dataset.hpp"

namespace asbf {

/// Comma-separated, header row, '.' decimal, UTF-8.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int col(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

/// Dataset columns resolved by header roles: covariates x1..xd (contiguous,
/// any column order), response y, optional treatment a, plus an optional
/// group label column consumed verbatim.
struct ParsedCsv {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    std::optional<Eigen::VectorXi> a;
    std::vector<std::string> group;  // empty when no group column requested
    int d = 0;
};

ParsedCsv parse_dataset_csv(const CsvTable& table, const std::string& group_by = "");

/// Assembles (and validates) a Dataset, optionally min-max rescaling x.
Dataset dataset_from_parsed(const ParsedCsv& parsed, bool rescale);

/// Query-point matrix from a CSV with x1..xd columns only.
Eigen::MatrixXd parse_query_csv(const CsvTable& table, int expected_d, bool clamp);

}  // namespace asbf
