#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace hetfj {

class ReportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ReportOutput {
    std::vector<std::filesystem::path> files;  // relative to the output directory
    std::vector<std::string> warnings;
};

/// Reshapes every run CSV in `csv_dir` into whitespace-separated plot files
///
///   <out>/<scenario>/latency_vs_<x>[_<series><value>].dat
///   <out>/<scenario>/efficiency_vs_<x>[_<series><value>].dat
///
/// plus <out>/index.tsv listing them. Rows that did not run (status other
/// than ok) are skipped. Scenarios whose rows carry more than one seed are
/// split into <scenario>_seed<N> groups with a warning.
ReportOutput sweep_report(const std::filesystem::path& csv_dir, const std::filesystem::path& out_dir);

/// Splits one CSV record, honouring double-quoted fields.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace hetfj
