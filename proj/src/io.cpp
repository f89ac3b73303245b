#include "pkb/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "pkb/error.hpp"

namespace pkb {

namespace {

std::string strip_cr(std::string line) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    return line;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

bool parse_finite_double(const std::string& field, double& out) {
    const char* begin = field.data();
    const char* end = begin + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc{} && ptr == end && std::isfinite(out);
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path.string());
    return in;
}

std::ofstream create_or_throw(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write file: " + path.string());
    return out;
}

// Generic numeric table: header row of column ids, optional leading id column.
struct CsvTable {
    std::vector<std::string> col_ids;
    std::vector<std::string> row_ids;  // synthesized when the file has none
    Eigen::MatrixXd values;
};

CsvTable read_csv_table(const std::filesystem::path& path, const std::string& row_prefix) {
    std::ifstream in = open_or_throw(path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file");
    std::vector<std::string> header = split(strip_cr(line), ',');

    // Layout detection: an empty first header field always marks an id
    // column; otherwise a first data row one field wider than the header
    // does. Anything else means the file carries bare values.
    bool has_row_ids = !header.empty() && header.front().empty();
    std::vector<std::vector<std::string>> raw_rows;
    while (std::getline(in, line)) {
        std::string stripped = strip_cr(line);
        if (stripped.empty()) continue;
        raw_rows.push_back(split(stripped, ','));
    }
    if (!raw_rows.empty() && raw_rows.front().size() == header.size() + 1) {
        has_row_ids = true;
    }

    CsvTable table;
    table.col_ids.assign(header.begin() + (header.front().empty() ? 1 : 0), header.end());
    const std::size_t n_cols = table.col_ids.size();
    if (n_cols == 0) throw ParseError(path.string() + ": header has no column ids");

    const std::size_t expected_fields = n_cols + (has_row_ids ? 1 : 0);
    table.values.resize(static_cast<Eigen::Index>(raw_rows.size()),
                        static_cast<Eigen::Index>(n_cols));
    for (std::size_t r = 0; r < raw_rows.size(); ++r) {
        const auto& fields = raw_rows[r];
        if (fields.size() != expected_fields) {
            throw ParseError(path.string() + ": row " + std::to_string(r + 1) + " has " +
                             std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(expected_fields));
        }
        const std::size_t offset = has_row_ids ? 1 : 0;
        if (has_row_ids) {
            table.row_ids.push_back(fields[0]);
        } else {
            table.row_ids.push_back(row_prefix + std::to_string(r + 1));
        }
        for (std::size_t c = 0; c < n_cols; ++c) {
            double v = 0.0;
            if (!parse_finite_double(fields[c + offset], v)) {
                throw ParseError(path.string() + ": cannot parse '" + fields[c + offset] +
                                 "' as a finite number (row " + std::to_string(r + 1) +
                                 ", column " + std::to_string(c + 1) + ")");
            }
            table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
        }
    }
    return table;
}

}  // namespace

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
    if (ec != std::errc{}) throw Error("number formatting failed");
    return std::string(buf, ptr);
}

ExpressionDataset load_expression_csv(const std::filesystem::path& path,
                                      bool samples_as_rows,
                                      bool allow_empty) {
    CsvTable table = read_csv_table(path, samples_as_rows ? "s" : "g");

    ExpressionDataset ds;
    if (samples_as_rows) {
        ds.values = std::move(table.values);
        ds.gene_ids = std::move(table.col_ids);
        ds.sample_ids = std::move(table.row_ids);
    } else {
        ds.values = table.values.transpose();
        ds.gene_ids = std::move(table.row_ids);
        ds.sample_ids = std::move(table.col_ids);
    }
    if (ds.n_genes() == 0 || (!allow_empty && ds.n_samples() == 0)) {
        throw ParseError(path.string() + ": empty expression matrix");
    }
    ds.validate();
    return ds;
}

void write_expression_csv(const ExpressionDataset& dataset, const std::filesystem::path& path) {
    std::ofstream out = create_or_throw(path);
    for (const auto& g : dataset.gene_ids) out << ',' << g;
    out << '\n';
    for (Eigen::Index i = 0; i < dataset.n_samples(); ++i) {
        out << dataset.sample_ids[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < dataset.n_genes(); ++j) {
            out << ',' << format_double(dataset.values(i, j));
        }
        out << '\n';
    }
}

PathwayCollection load_gmt(const std::filesystem::path& path,
                           const ExpressionDataset& dataset,
                           std::size_t* n_dropped) {
    std::ifstream in = open_or_throw(path);

    std::unordered_map<std::string, Eigen::Index> gene_to_col;
    gene_to_col.reserve(dataset.gene_ids.size());
    for (std::size_t j = 0; j < dataset.gene_ids.size(); ++j) {
        gene_to_col.emplace(dataset.gene_ids[j], static_cast<Eigen::Index>(j));
    }

    PathwayCollection collection;
    std::size_t dropped = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string stripped = strip_cr(line);
        if (stripped.empty()) continue;
        std::vector<std::string> fields = split(stripped, '\t');
        if (fields.size() < 2) {
            throw ParseError(path.string() + ": line " + std::to_string(line_no) +
                             " needs at least name and description fields");
        }
        Pathway pw;
        pw.name = fields[0];
        std::unordered_set<Eigen::Index> seen;
        for (std::size_t k = 2; k < fields.size(); ++k) {
            if (fields[k].empty()) continue;
            auto it = gene_to_col.find(fields[k]);
            if (it == gene_to_col.end()) continue;  // symbol absent from the dataset
            if (seen.insert(it->second).second) pw.gene_indices.push_back(it->second);
        }
        if (pw.gene_indices.empty()) {
            ++dropped;
            continue;
        }
        collection.pathways.push_back(std::move(pw));
    }
    if (n_dropped != nullptr) *n_dropped = dropped;
    if (collection.pathways.empty()) {
        throw InvalidInput(path.string() + ": no pathway maps to any dataset gene");
    }
    collection.validate(dataset.n_genes());
    return collection;
}

void write_gmt(const PathwayCollection& pathways,
               const ExpressionDataset& dataset,
               const std::filesystem::path& path) {
    std::ofstream out = create_or_throw(path);
    for (const auto& pw : pathways.pathways) {
        out << pw.name << "\tna";
        for (Eigen::Index g : pw.gene_indices) {
            out << '\t' << dataset.gene_ids[static_cast<std::size_t>(g)];
        }
        out << '\n';
    }
}

LabelVector load_labels(const std::filesystem::path& path, const ExpressionDataset& dataset) {
    std::ifstream in = open_or_throw(path);

    auto parse_label = [](const std::string& field, double& out) {
        if (field == "1" || field == "+1") {
            out = 1.0;
        } else if (field == "-1" || field == "0") {
            out = -1.0;
        } else {
            return false;
        }
        return true;
    };

    std::unordered_map<std::string, double> by_sample;
    std::string line;
    std::size_t line_no = 0;
    bool first_data_line = true;
    while (std::getline(in, line)) {
        ++line_no;
        std::string stripped = strip_cr(line);
        if (stripped.empty()) continue;
        std::vector<std::string> fields = split(stripped, ',');
        if (fields.size() != 2) {
            throw ParseError(path.string() + ": line " + std::to_string(line_no) +
                             " must have exactly two fields (sample_id,label)");
        }
        double label = 0.0;
        if (!parse_label(fields[1], label)) {
            // A non-numeric first line is treated as an optional header;
            // numeric values outside the accepted sets are real errors.
            double numeric = 0.0;
            if (first_data_line && !parse_finite_double(fields[1], numeric)) {
                first_data_line = false;
                continue;
            }
            throw ParseError(path.string() + ": line " + std::to_string(line_no) + ": label '" +
                             fields[1] + "' is not in {1,-1} or {0,1}");
        }
        first_data_line = false;
        if (!by_sample.emplace(fields[0], label).second) {
            throw InvalidInput(path.string() + ": duplicate label for sample '" + fields[0] + "'");
        }
    }

    LabelVector labels;
    labels.y.resize(dataset.n_samples());
    for (Eigen::Index i = 0; i < dataset.n_samples(); ++i) {
        const std::string& id = dataset.sample_ids[static_cast<std::size_t>(i)];
        auto it = by_sample.find(id);
        if (it == by_sample.end()) {
            throw InvalidInput(path.string() + ": missing label for sample '" + id + "'");
        }
        labels.y[i] = it->second;
    }
    for (const auto& [id, _] : by_sample) {
        if (std::find(dataset.sample_ids.begin(), dataset.sample_ids.end(), id) ==
            dataset.sample_ids.end()) {
            throw InvalidInput(path.string() + ": label for unknown sample '" + id + "'");
        }
    }
    labels.validate();
    return labels;
}

void write_labels(const LabelVector& labels,
                  const ExpressionDataset& dataset,
                  const std::filesystem::path& path) {
    std::ofstream out = create_or_throw(path);
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        out << dataset.sample_ids[static_cast<std::size_t>(i)] << ','
            << (labels.y[i] > 0 ? "1" : "-1") << '\n';
    }
}

}  // namespace pkb
