#include "qmed/data.hpp"
#include "qmed/errors.hpp"
#include "qmed/stats.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace qmed {

MicrodataTable::MicrodataTable(std::vector<double> outcome,
                               std::vector<std::uint8_t> exposure,
                               std::vector<double> mediator,
                               std::vector<double> covariates_rowmajor,
                               std::vector<std::string> covariate_names)
    : y_(std::move(outcome)), x_(std::move(exposure)), m_(std::move(mediator)),
      w_(std::move(covariates_rowmajor)), names_(std::move(covariate_names)) {
    const std::size_t n = y_.size();
    if (x_.size() != n || m_.size() != n)
        throw ArgumentError("MicrodataTable: column lengths differ");
    if (w_.size() != n * names_.size())
        throw ArgumentError("MicrodataTable: covariate block has wrong size");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(std::isfinite(y_[i]) && y_[i] >= 0.0))
            throw ValidationError("outcome must be a finite nonnegative value at row " +
                                  std::to_string(i));
        if (x_[i] > 1)
            throw ValidationError("exposure must be 0 or 1 at row " + std::to_string(i));
        if (!std::isfinite(m_[i]))
            throw ValidationError("mediator must be finite at row " + std::to_string(i));
    }
    for (double v : w_)
        if (!std::isfinite(v))
            throw ValidationError("covariates must be finite");
}

std::vector<std::uint32_t> MicrodataTable::arm_rows(int x) const {
    std::vector<std::uint32_t> out;
    for (std::size_t i = 0; i < size(); ++i)
        if (x_[i] == x) out.push_back(static_cast<std::uint32_t>(i));
    return out;
}

std::uint64_t MicrodataTable::content_hash() const {
    std::uint64_t h = fnv1a64(y_.data(), y_.size() * sizeof(double));
    h = fnv1a64(x_.data(), x_.size(), h);
    h = fnv1a64(m_.data(), m_.size() * sizeof(double), h);
    h = fnv1a64(w_.data(), w_.size() * sizeof(double), h);
    for (const auto& name : names_) h = fnv1a64(name.data(), name.size(), h);
    return h;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

bool parse_double(const std::string& s, double* out) {
    const char* begin = s.c_str();
    char* end = nullptr;
    errno = 0;
    double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0' || errno == ERANGE) return false;
    *out = v;
    return true;
}

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace

MicrodataTable ingest_csv(std::istream& in, const ColumnSchema& schema,
                          IngestReport* report) {
    std::string line;
    if (!std::getline(in, line))
        throw SchemaError("input is empty; a header row is required");
    const auto header = split_csv_line(line);
    auto find_col = [&](const std::string& name) {
        for (std::size_t j = 0; j < header.size(); ++j)
            if (trim(header[j]) == name) return static_cast<std::ptrdiff_t>(j);
        return static_cast<std::ptrdiff_t>(-1);
    };
    const auto iy = find_col(schema.outcome);
    const auto ix = find_col(schema.exposure);
    const auto im = find_col(schema.mediator);
    if (iy < 0) throw SchemaError("missing outcome column '" + schema.outcome + "'");
    if (ix < 0) throw SchemaError("missing exposure column '" + schema.exposure + "'");
    if (im < 0) throw SchemaError("missing mediator column '" + schema.mediator + "'");
    std::vector<std::ptrdiff_t> iw;
    for (const auto& name : schema.covariates) {
        const auto j = find_col(name);
        if (j < 0) throw SchemaError("missing covariate column '" + name + "'");
        iw.push_back(j);
    }

    std::vector<double> y;
    std::vector<std::uint8_t> x;
    std::vector<double> m, w;
    IngestReport rep;
    std::size_t row = 0; // 1-based data row number for messages
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        ++row;
        ++rep.rows_read;
        const auto fields = split_csv_line(line);
        auto field = [&](std::ptrdiff_t j) -> std::string {
            if (j >= static_cast<std::ptrdiff_t>(fields.size())) return "";
            return trim(fields[static_cast<std::size_t>(j)]);
        };
        bool missing = field(iy).empty() || field(ix).empty() || field(im).empty();
        for (auto j : iw) missing = missing || field(j).empty();
        if (missing) {
            ++rep.rows_dropped;
            continue;
        }
        auto bad = [&](const std::string& what) -> ValidationError {
            return ValidationError("row " + std::to_string(row) + ": " + what);
        };
        double vy, vx, vm;
        if (!parse_double(field(iy), &vy)) throw bad("unparseable outcome '" + field(iy) + "'");
        if (!parse_double(field(ix), &vx)) throw bad("unparseable exposure '" + field(ix) + "'");
        if (!parse_double(field(im), &vm)) throw bad("unparseable mediator '" + field(im) + "'");
        if (!(std::isfinite(vy) && vy >= 0.0)) throw bad("outcome must be finite and nonnegative");
        if (vx != 0.0 && vx != 1.0) throw bad("exposure must be 0 or 1");
        if (!std::isfinite(vm)) throw bad("mediator must be finite");
        std::vector<double> wrow(iw.size());
        for (std::size_t k = 0; k < iw.size(); ++k) {
            if (!parse_double(field(iw[k]), &wrow[k]))
                throw bad("unparseable covariate '" + field(iw[k]) + "'");
            if (!std::isfinite(wrow[k])) throw bad("covariate must be finite");
        }
        y.push_back(vy);
        x.push_back(static_cast<std::uint8_t>(vx));
        m.push_back(vm);
        w.insert(w.end(), wrow.begin(), wrow.end());
        ++rep.rows_kept;
    }
    if (report) *report = rep;
    return MicrodataTable(std::move(y), std::move(x), std::move(m), std::move(w),
                          schema.covariates);
}

MicrodataTable ingest_csv_file(const std::string& path, const ColumnSchema& schema,
                               IngestReport* report) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open input file '" + path + "'");
    return ingest_csv(in, schema, report);
}

void write_csv(std::ostream& out, const MicrodataTable& table,
               const ColumnSchema& schema) {
    out << schema.outcome << ',' << schema.exposure << ',' << schema.mediator;
    for (const auto& name : schema.covariates) out << ',' << name;
    out << '\n';
    if (schema.covariates.size() != table.n_covariates())
        throw ArgumentError("write_csv: schema covariate count does not match table");
    for (std::size_t i = 0; i < table.size(); ++i) {
        out << format_double(table.outcome(i)) << ',' << table.exposure(i) << ','
            << format_double(table.mediator(i));
        for (std::size_t j = 0; j < table.n_covariates(); ++j)
            out << ',' << format_double(table.covariate(i, j));
        out << '\n';
    }
}

void write_csv_file(const std::string& path, const MicrodataTable& table,
                    const ColumnSchema& schema) {
    std::ofstream out(path);
    if (!out) throw SchemaError("cannot open output file '" + path + "'");
    write_csv(out, table, schema);
}

std::pair<MicrodataTable, MicrodataTable> split_by_exposure(const MicrodataTable& table) {
    std::vector<double> y0, y1, m0, m1, w0, w1;
    std::vector<std::uint8_t> x0, x1;
    const std::size_t p = table.n_covariates();
    for (std::size_t i = 0; i < table.size(); ++i) {
        const bool exposed = table.exposure(i) == 1;
        auto& y = exposed ? y1 : y0;
        auto& x = exposed ? x1 : x0;
        auto& m = exposed ? m1 : m0;
        auto& w = exposed ? w1 : w0;
        y.push_back(table.outcome(i));
        x.push_back(static_cast<std::uint8_t>(exposed));
        m.push_back(table.mediator(i));
        for (std::size_t j = 0; j < p; ++j) w.push_back(table.covariate(i, j));
    }
    if (y0.empty() || y1.empty())
        throw EstimationError("degenerate exposure arm: one arm is empty");
    return {MicrodataTable(std::move(y0), std::move(x0), std::move(m0), std::move(w0),
                           table.covariate_names()),
            MicrodataTable(std::move(y1), std::move(x1), std::move(m1), std::move(w1),
                           table.covariate_names())};
}

std::vector<CovariateProfile> distinct_profiles(const MicrodataTable& table,
                                                const std::vector<double>& weights) {
    if (!weights.empty() && weights.size() != table.size())
        throw ArgumentError("distinct_profiles: weight length mismatch");
    std::map<std::vector<double>, double> cells;
    const std::size_t p = table.n_covariates();
    for (std::size_t i = 0; i < table.size(); ++i) {
        std::vector<double> key(p);
        for (std::size_t j = 0; j < p; ++j) key[j] = table.covariate(i, j);
        cells[key] += weights.empty() ? 1.0 : weights[i];
    }
    std::vector<CovariateProfile> out;
    out.reserve(cells.size());
    for (auto& [key, wt] : cells) out.push_back(CovariateProfile{key, wt});
    return out;
}

std::vector<std::uint32_t> profile_assignment(const MicrodataTable& table,
                                              const std::vector<CovariateProfile>& profiles) {
    std::map<std::vector<double>, std::uint32_t> index;
    for (std::size_t k = 0; k < profiles.size(); ++k)
        index[profiles[k].values] = static_cast<std::uint32_t>(k);
    const std::size_t p = table.n_covariates();
    std::vector<std::uint32_t> out(table.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
        std::vector<double> key(p);
        for (std::size_t j = 0; j < p; ++j) key[j] = table.covariate(i, j);
        auto it = index.find(key);
        if (it == index.end())
            throw ArgumentError("profile_assignment: row has no matching profile");
        out[i] = it->second;
    }
    return out;
}

} // namespace qmed
