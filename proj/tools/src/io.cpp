#include "wbkm_cli/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace wbkm::cli {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> out;
    std::string token;
    for (char c : line) {
        if (c == ',' || c == ';' || c == ' ' || c == '\t' || c == '\r') {
            if (!token.empty()) out.push_back(std::move(token));
            token.clear();
        } else {
            token.push_back(c);
        }
    }
    if (!token.empty()) out.push_back(std::move(token));
    return out;
}

bool parse_double(const std::string& s, double& out) {
    const char* begin = s.data();
    const char* end = begin + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc{} && ptr == end;
}

struct NumericTable {
    std::vector<Vec> rows;
    std::vector<std::size_t> lines;  // 1-based source line per row
};

NumericTable read_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("io: cannot open '" + path + "'");
    NumericTable table;
    std::string line;
    std::size_t lineno = 0;
    bool header_allowed = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        auto tokens = tokenize(line);
        if (tokens.empty()) continue;

        Vec row;
        row.reserve(tokens.size());
        bool numeric = true;
        for (const auto& t : tokens) {
            double v;
            if (!parse_double(t, v)) {
                numeric = false;
                break;
            }
            row.push_back(v);
        }
        if (!numeric) {
            if (header_allowed) {
                header_allowed = false;
                continue;  // a single leading header line is fine
            }
            throw std::invalid_argument("io: " + path + ":" + std::to_string(lineno) +
                                        ": non-numeric value");
        }
        header_allowed = false;
        if (!table.rows.empty() && row.size() != table.rows.front().size())
            throw std::invalid_argument("io: " + path + ":" + std::to_string(lineno) +
                                        ": expected " + std::to_string(table.rows.front().size()) +
                                        " columns, found " + std::to_string(row.size()));
        table.rows.push_back(std::move(row));
        table.lines.push_back(lineno);
    }
    if (table.rows.empty())
        throw std::invalid_argument("io: '" + path + "' holds no data rows");
    return table;
}

}  // namespace

WeightedDataset ingest(const std::string& path) {
    NumericTable table = read_table(path);
    const std::size_t cols = table.rows.front().size();
    if (cols < 2)
        throw std::invalid_argument("io: '" + path +
                                    "' needs at least one coordinate column plus a weight column");
    const std::size_t n = table.rows.size(), d = cols - 1;

    Matrix points(n, d);
    Vec weights(n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) points(r, c) = table.rows[r][c];
        weights[r] = table.rows[r][d];
        if (weights[r] <= 0.0)
            throw std::invalid_argument("io: " + path + ":" + std::to_string(table.lines[r]) +
                                        ": weight must be positive");
    }
    // Duplicate scan with file line numbers before the dataset re-validates.
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) {
            bool same = true;
            for (std::size_t c = 0; c < d && same; ++c) same = points(a, c) == points(b, c);
            if (same)
                throw std::invalid_argument(
                    "io: " + path + ":" + std::to_string(table.lines[b]) + ": duplicates line " +
                    std::to_string(table.lines[a]) +
                    "; merge them into one point with the summed weight");
        }
    return WeightedDataset(std::move(points), std::move(weights));
}

std::string format_double(double v) {
    char buf[64];
    for (int precision = 1; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, v);
        double back;
        if (parse_double(buf, back) && back == v) break;
    }
    return buf;
}

void serialize_dataset(const WeightedDataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("io: cannot write '" + path + "'");
    for (std::size_t j = 0; j < data.size(); ++j) {
        auto x = data.point(j);
        for (double c : x) out << format_double(c) << ' ';
        out << format_double(data.weight(j)) << '\n';
    }
}

Matrix read_matrix(const std::string& path, std::size_t expected_cols) {
    NumericTable table = read_table(path);
    const std::size_t cols = table.rows.front().size();
    if (expected_cols != 0 && cols != expected_cols)
        throw std::invalid_argument("io: '" + path + "' has " + std::to_string(cols) +
                                    " columns, expected " + std::to_string(expected_cols));
    Matrix m(table.rows.size(), cols);
    for (std::size_t r = 0; r < table.rows.size(); ++r)
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = table.rows[r][c];
    return m;
}

void write_assignment(const Assignment& assignment, const std::string& path, double zero_tol) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("io: cannot write '" + path + "'");
    out << "cluster,point,value\n";
    for (std::size_t i = 0; i < assignment.clusters(); ++i)
        for (std::size_t j = 0; j < assignment.points(); ++j)
            if (assignment(i, j) > zero_tol)
                out << i << ',' << j << ',' << format_double(assignment(i, j)) << '\n';
}

Assignment read_assignment(const std::string& path, std::size_t clusters, std::size_t points) {
    NumericTable table = read_table(path);
    Matrix y(clusters, points);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        if (table.rows[r].size() != 3)
            throw std::invalid_argument("io: " + path + ":" + std::to_string(table.lines[r]) +
                                        ": expected cluster,point,value");
        const double iv = table.rows[r][0], jv = table.rows[r][1];
        const std::size_t i = static_cast<std::size_t>(iv), j = static_cast<std::size_t>(jv);
        if (iv != static_cast<double>(i) || jv != static_cast<double>(j) || i >= clusters ||
            j >= points)
            throw std::invalid_argument("io: " + path + ":" + std::to_string(table.lines[r]) +
                                        ": cluster/point index out of range");
        y(i, j) = table.rows[r][2];
    }
    return Assignment(std::move(y));
}

}  // namespace wbkm::cli
