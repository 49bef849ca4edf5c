#include "msgh/csv.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace msgh {

namespace {

std::vector<std::string> split_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        // trim spaces and a trailing CR from windows line endings
        std::size_t a = field.find_first_not_of(" \t\r");
        std::size_t b = field.find_last_not_of(" \t\r");
        out.push_back(a == std::string::npos ? std::string()
                                             : field.substr(a, b - a + 1));
    }
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

bool parse_double(const std::string& s, double& out)
{
    if (s.empty()) return false;
    const char* begin = s.data();
    const char* end = begin + s.size();
    const auto res = std::from_chars(begin, end, out);
    return res.ec == std::errc() && res.ptr == end && std::isfinite(out);
}

std::string format_double(double v)
{
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

Dataset read_csv(const std::string& path, const std::vector<std::string>& cols,
                 bool header)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);

    std::string line;
    std::vector<std::string> names;
    std::vector<std::vector<double>> rows;
    std::size_t dropped = 0;
    bool first = true;
    std::size_t width = 0;

    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::vector<std::string> fields = split_line(line);
        if (first) {
            first = false;
            width = fields.size();
            if (header) {
                names = fields;
                continue;
            }
            names.resize(width);
            for (std::size_t j = 0; j < width; ++j)
                names[j] = "c" + std::to_string(j);
        }
        if (fields.size() != width) {
            ++dropped;
            continue;
        }
        std::vector<double> row(width);
        bool ok = true;
        for (std::size_t j = 0; j < width && ok; ++j)
            ok = parse_double(fields[j], row[j]);
        if (!ok) {
            ++dropped;
            continue;
        }
        rows.push_back(std::move(row));
    }
    if (width == 0) throw std::runtime_error(path + ": no data rows");

    // column selection
    std::vector<std::size_t> keep;
    if (cols.empty()) {
        for (std::size_t j = 0; j < width; ++j) keep.push_back(j);
    } else {
        for (const auto& want : cols) {
            bool found = false;
            for (std::size_t j = 0; j < width; ++j) {
                if (names[j] == want) {
                    keep.push_back(j);
                    found = true;
                    break;
                }
            }
            if (!found)
                throw std::runtime_error(path + ": no column named '" + want + "'");
        }
    }

    Dataset ds;
    ds.source = path;
    ds.dropped_rows = dropped;
    for (const std::size_t j : keep) ds.columns.push_back(names[j]);
    ds.values.resize(rows.size(), keep.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < keep.size(); ++j)
            ds.values(i, j) = rows[i][keep[j]];
    return ds;
}

void write_file_atomic(const std::string& path, const std::string& contents)
{
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << contents;
        if (!out) throw std::runtime_error("short write to " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("cannot rename " + tmp + " onto " + path);
}

void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const Eigen::MatrixXd& values)
{
    if (static_cast<Eigen::Index>(columns.size()) != values.cols())
        throw std::invalid_argument("write_csv: header width mismatch");
    std::string out;
    for (std::size_t j = 0; j < columns.size(); ++j) {
        if (j) out += ',';
        out += columns[j];
    }
    out += '\n';
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        for (Eigen::Index j = 0; j < values.cols(); ++j) {
            if (j) out += ',';
            out += format_double(values(i, j));
        }
        out += '\n';
    }
    write_file_atomic(path, out);
}

}  // namespace msgh
