#pragma once

#include "seqdml/common.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace seqdml {

// Two-period observational panel. Treatments are dense integer ids
// (0..n_treat-1) with a label table; the decision variable for dynamic
// policies is the x1 column flagged by y1_col. Instances are immutable after
// construction and safe to share across worker threads.
struct PanelDataset {
    Matrix x0;  // N x p0 pre-treatment covariates
    IntVector d1;
    Matrix x1;  // N x p1 end-of-period-1 covariates
    IntVector d2;
    Vector y;
    std::optional<IntVector> z0;  // group labels for GATEs
    std::optional<int> y1_col;    // x1 column holding the binary intermediate outcome

    int n_treat1 = 0;
    int n_treat2 = 0;
    std::vector<std::string> d1_labels;
    std::vector<std::string> d2_labels;
    std::vector<std::string> x0_names;
    std::vector<std::string> x1_names;
    std::vector<std::string> z0_labels;  // empty when z0 came in numeric

    int n() const { return static_cast<int>(y.size()); }
    int p0() const { return static_cast<int>(x0.cols()); }
    int p1() const { return static_cast<int>(x1.cols()); }

    // Covariate block (X0, X1) used by second-period nuisance models.
    Matrix full_history() const {
        Matrix h(n(), p0() + p1());
        h << x0, x1;
        return h;
    }

    void validate(int z0_max_cardinality = 20) const {
        if (n() <= 0) throw ValidationError("dataset is empty");
        if (x0.rows() != n() || x1.rows() != n() || d1.size() != n() || d2.size() != n())
            throw ValidationError("dataset blocks disagree on row count");
        if (n_treat1 <= 0 || n_treat2 <= 0) throw ValidationError("treatment counts must be positive");
        for (int i = 0; i < n(); ++i) {
            if (d1(i) < 0 || d1(i) >= n_treat1)
                throw ValidationError("d1 value " + std::to_string(d1(i)) + " out of range at row " +
                                      std::to_string(i));
            if (d2(i) < 0 || d2(i) >= n_treat2)
                throw ValidationError("d2 value " + std::to_string(d2(i)) + " out of range at row " +
                                      std::to_string(i));
        }
        if (!x0.allFinite() || !x1.allFinite() || !y.allFinite())
            throw ValidationError("dataset contains non-finite values");
        if (y1_col) {
            if (*y1_col < 0 || *y1_col >= p1())
                throw ValidationError("y1_col index " + std::to_string(*y1_col) + " outside x1");
            for (int i = 0; i < n(); ++i) {
                const double v = x1(i, *y1_col);
                if (v != 0.0 && v != 1.0)
                    throw ValidationError("intermediate outcome column must be binary; row " +
                                          std::to_string(i) + " holds " + std::to_string(v));
            }
        }
        if (z0) {
            std::set<int> levels;
            for (int i = 0; i < n(); ++i) levels.insert((*z0)(i));
            if (static_cast<int>(levels.size()) > z0_max_cardinality)
                throw ValidationError("z0 has " + std::to_string(levels.size()) +
                                      " distinct values, above the configured maximum of " +
                                      std::to_string(z0_max_cardinality));
        }
    }

    std::string d1_label(int id) const {
        return id < static_cast<int>(d1_labels.size()) ? d1_labels[static_cast<std::size_t>(id)]
                                                       : "d1=" + std::to_string(id);
    }
    std::string d2_label(int id) const {
        return id < static_cast<int>(d2_labels.size()) ? d2_labels[static_cast<std::size_t>(id)]
                                                       : "d2=" + std::to_string(id);
    }
};

// Column-role mapping for load_csv. Treatment label lists, when given, pin
// the treatment id ranges; otherwise the ranges are inferred from the data.
struct CsvSchema {
    std::vector<std::string> x0_cols;
    std::string d1_col;
    std::vector<std::string> x1_cols;
    std::string d2_col;
    std::string y_col;
    std::optional<std::string> y1_col;  // must name one of x1_cols
    std::optional<std::string> z0_col;
    std::vector<std::string> d1_labels;
    std::vector<std::string> d2_labels;
    int z0_max_cardinality = 20;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        std::size_t start = 0;
        while (start < cell.size() && cell[start] == ' ') ++start;
        cells.push_back(cell.substr(start));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

inline bool parse_double(const std::string& cell, double& out) {
    if (cell.empty()) return false;
    const char* begin = cell.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    return end == begin + cell.size();
}

inline bool is_missing(const std::string& cell) {
    return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan" || cell == "na";
}

struct RawColumn {
    std::string name;
    std::vector<std::string> cells;

    bool numeric() const {
        double v;
        for (const auto& c : cells)
            if (!parse_double(c, v)) return false;
        return true;
    }
};

// One-hot expansion of a categorical column. Category order is lexicographic
// so the encoding is stable across runs and platforms.
inline void expand_categorical(const RawColumn& col, std::vector<std::string>& names,
                               std::vector<std::vector<double>>& columns) {
    std::set<std::string> categories(col.cells.begin(), col.cells.end());
    for (const auto& cat : categories) {
        names.push_back(col.name + "=" + cat);
        std::vector<double> indicator(col.cells.size());
        for (std::size_t i = 0; i < col.cells.size(); ++i)
            indicator[i] = col.cells[i] == cat ? 1.0 : 0.0;
        columns.push_back(std::move(indicator));
    }
}

inline int parse_treatment(const std::string& cell, const std::string& col, std::size_t row) {
    double v;
    if (!parse_double(cell, v) || v != std::floor(v))
        throw ParseError("non-integer treatment id '" + cell + "' in column " + col + " at row " +
                         std::to_string(row));
    return static_cast<int>(v);
}

}  // namespace detail

// Loads and validates a panel CSV. String-valued covariate columns are
// one-hot encoded (lexicographic category order); missing values are
// rejected, not imputed.
inline PanelDataset load_csv(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open CSV file " + path);

    std::string line;
    if (!std::getline(in, line)) throw SchemaError("CSV file " + path + " is empty");
    const std::vector<std::string> header = detail::split_csv_line(line);

    std::map<std::string, std::size_t> col_index;
    for (std::size_t j = 0; j < header.size(); ++j) col_index[header[j]] = j;

    auto require = [&](const std::string& name) {
        auto it = col_index.find(name);
        if (it == col_index.end()) throw SchemaError("CSV is missing required column '" + name + "'");
        return it->second;
    };
    for (const auto& c : schema.x0_cols) require(c);
    for (const auto& c : schema.x1_cols) require(c);
    require(schema.d1_col);
    require(schema.d2_col);
    require(schema.y_col);
    if (schema.z0_col) require(*schema.z0_col);
    if (schema.y1_col &&
        std::find(schema.x1_cols.begin(), schema.x1_cols.end(), *schema.y1_col) == schema.x1_cols.end())
        throw SchemaError("y1_col '" + *schema.y1_col + "' is not listed among the x1 columns");

    std::vector<std::vector<std::string>> rows;
    std::size_t row_no = 0;
    while (std::getline(in, line)) {
        ++row_no;
        if (line.empty()) continue;
        auto cells = detail::split_csv_line(line);
        if (cells.size() != header.size())
            throw ParseError("row " + std::to_string(row_no) + " has " + std::to_string(cells.size()) +
                             " cells, header has " + std::to_string(header.size()));
        for (std::size_t j = 0; j < cells.size(); ++j)
            if (detail::is_missing(cells[j]))
                throw ValidationError("missing value in column '" + header[j] + "' at row " +
                                      std::to_string(row_no));
        rows.push_back(std::move(cells));
    }
    if (rows.empty()) throw ValidationError("CSV contains a header but no data rows");
    const std::size_t n = rows.size();

    auto raw_column = [&](const std::string& name) {
        detail::RawColumn col;
        col.name = name;
        col.cells.reserve(n);
        const std::size_t j = col_index.at(name);
        for (const auto& r : rows) col.cells.push_back(r[j]);
        return col;
    };

    // Covariate blocks: numeric columns pass through, string columns expand.
    auto build_block = [&](const std::vector<std::string>& wanted, std::vector<std::string>& out_names,
                           Matrix& out) {
        std::vector<std::vector<double>> columns;
        for (const auto& name : wanted) {
            detail::RawColumn col = raw_column(name);
            if (col.numeric()) {
                out_names.push_back(name);
                std::vector<double> values(n);
                for (std::size_t i = 0; i < n; ++i) detail::parse_double(col.cells[i], values[i]);
                columns.push_back(std::move(values));
            } else {
                detail::expand_categorical(col, out_names, columns);
            }
        }
        out.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(columns.size()));
        for (std::size_t j = 0; j < columns.size(); ++j)
            for (std::size_t i = 0; i < n; ++i)
                out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = columns[j][i];
    };

    PanelDataset ds;
    build_block(schema.x0_cols, ds.x0_names, ds.x0);
    build_block(schema.x1_cols, ds.x1_names, ds.x1);

    ds.d1.resize(static_cast<Eigen::Index>(n));
    ds.d2.resize(static_cast<Eigen::Index>(n));
    ds.y.resize(static_cast<Eigen::Index>(n));
    {
        detail::RawColumn cd1 = raw_column(schema.d1_col);
        detail::RawColumn cd2 = raw_column(schema.d2_col);
        detail::RawColumn cy = raw_column(schema.y_col);
        for (std::size_t i = 0; i < n; ++i) {
            ds.d1(static_cast<Eigen::Index>(i)) = detail::parse_treatment(cd1.cells[i], schema.d1_col, i + 1);
            ds.d2(static_cast<Eigen::Index>(i)) = detail::parse_treatment(cd2.cells[i], schema.d2_col, i + 1);
            double v;
            if (!detail::parse_double(cy.cells[i], v))
                throw ParseError("non-numeric outcome '" + cy.cells[i] + "' at row " + std::to_string(i + 1));
            ds.y(static_cast<Eigen::Index>(i)) = v;
        }
    }

    ds.d1_labels = schema.d1_labels;
    ds.d2_labels = schema.d2_labels;
    ds.n_treat1 = !schema.d1_labels.empty() ? static_cast<int>(schema.d1_labels.size())
                                            : ds.d1.maxCoeff() + 1;
    ds.n_treat2 = !schema.d2_labels.empty() ? static_cast<int>(schema.d2_labels.size())
                                            : ds.d2.maxCoeff() + 1;

    if (schema.y1_col) {
        // The flagged x1 column must have survived as a single numeric column.
        auto it = std::find(ds.x1_names.begin(), ds.x1_names.end(), *schema.y1_col);
        if (it == ds.x1_names.end())
            throw SchemaError("y1_col '" + *schema.y1_col + "' was not a numeric x1 column");
        ds.y1_col = static_cast<int>(it - ds.x1_names.begin());
    }

    if (schema.z0_col) {
        detail::RawColumn cz = raw_column(*schema.z0_col);
        IntVector z(static_cast<Eigen::Index>(n));
        if (cz.numeric()) {
            for (std::size_t i = 0; i < n; ++i) {
                double v;
                detail::parse_double(cz.cells[i], v);
                if (v != std::floor(v))
                    throw ParseError("non-integer group label '" + cz.cells[i] + "' at row " +
                                     std::to_string(i + 1));
                z(static_cast<Eigen::Index>(i)) = static_cast<int>(v);
            }
        } else {
            std::set<std::string> levels(cz.cells.begin(), cz.cells.end());
            std::map<std::string, int> ids;
            for (const auto& lvl : levels) {
                ids[lvl] = static_cast<int>(ds.z0_labels.size());
                ds.z0_labels.push_back(lvl);
            }
            for (std::size_t i = 0; i < n; ++i) z(static_cast<Eigen::Index>(i)) = ids[cz.cells[i]];
        }
        ds.z0 = std::move(z);
    }

    ds.validate(schema.z0_max_cardinality);
    return ds;
}

// Writes the validated (post-encoding) representation. Floating point cells
// use %.17g so that load_csv(save_csv(ds)) reproduces the dataset bit for bit.
inline void save_csv(const PanelDataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open " + path + " for writing");

    auto fmt = [](double v) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };

    for (const auto& name : ds.x0_names) out << name << ',';
    out << "d1,";
    for (const auto& name : ds.x1_names) out << name << ',';
    out << "d2,y";
    if (ds.z0) out << ",z0";
    out << '\n';

    for (int i = 0; i < ds.n(); ++i) {
        for (int j = 0; j < ds.p0(); ++j) out << fmt(ds.x0(i, j)) << ',';
        out << ds.d1(i) << ',';
        for (int j = 0; j < ds.p1(); ++j) out << fmt(ds.x1(i, j)) << ',';
        out << ds.d2(i) << ',' << fmt(ds.y(i));
        if (ds.z0) out << ',' << (*ds.z0)(i);
        out << '\n';
    }
}

// Schema that reads back a file produced by save_csv.
inline CsvSchema roundtrip_schema(const PanelDataset& ds) {
    CsvSchema schema;
    schema.x0_cols = ds.x0_names;
    schema.x1_cols = ds.x1_names;
    schema.d1_col = "d1";
    schema.d2_col = "d2";
    schema.y_col = "y";
    if (ds.y1_col) schema.y1_col = ds.x1_names[static_cast<std::size_t>(*ds.y1_col)];
    if (ds.z0) schema.z0_col = "z0";
    schema.d1_labels = ds.d1_labels;
    schema.d2_labels = ds.d2_labels;
    // Pin treatment id ranges even when no labels were supplied, so a rare
    // treatment missing from the data cannot shrink the range on reload.
    if (schema.d1_labels.empty())
        for (int t = 0; t < ds.n_treat1; ++t) schema.d1_labels.push_back("d1=" + std::to_string(t));
    if (schema.d2_labels.empty())
        for (int t = 0; t < ds.n_treat2; ++t) schema.d2_labels.push_back("d2=" + std::to_string(t));
    return schema;
}

}  // namespace seqdml
