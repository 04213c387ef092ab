// Columnar microdata container and CSV ingest.
//
// The table is immutable after construction and validated on entry:
// exposure must be 0/1, outcome a finite nonnegative real (binary event
// indicators are the canonical case), mediator and covariates finite.
// Rows with *missing* (empty) fields are dropped and counted during ingest;
// rows with present-but-invalid values abort ingest with the row number.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace qmed {

struct ColumnSchema {
    std::string outcome = "y";
    std::string exposure = "x";
    std::string mediator = "m";
    std::vector<std::string> covariates;
};

struct IngestReport {
    std::size_t rows_read = 0;    // data rows seen (header excluded)
    std::size_t rows_kept = 0;
    std::size_t rows_dropped = 0; // dropped for missing fields
};

class MicrodataTable {
public:
    MicrodataTable(std::vector<double> outcome,
                   std::vector<std::uint8_t> exposure,
                   std::vector<double> mediator,
                   std::vector<double> covariates_rowmajor,
                   std::vector<std::string> covariate_names);

    std::size_t size() const { return y_.size(); }
    std::size_t n_covariates() const { return names_.size(); }

    double outcome(std::size_t i) const { return y_[i]; }
    int exposure(std::size_t i) const { return x_[i]; }
    double mediator(std::size_t i) const { return m_[i]; }
    double covariate(std::size_t i, std::size_t j) const {
        return w_[i * names_.size() + j];
    }
    const double* covariate_row(std::size_t i) const {
        return names_.empty() ? nullptr : &w_[i * names_.size()];
    }
    const std::vector<std::string>& covariate_names() const { return names_; }

    // Row indices with the given exposure arm, in original order.
    std::vector<std::uint32_t> arm_rows(int x) const;

    // FNV-1a hash over the numeric content, for provenance manifests.
    std::uint64_t content_hash() const;

private:
    std::vector<double> y_;
    std::vector<std::uint8_t> x_;
    std::vector<double> m_;
    std::vector<double> w_; // row-major, n_covariates() per row
    std::vector<std::string> names_;
};

MicrodataTable ingest_csv(std::istream& in, const ColumnSchema& schema,
                          IngestReport* report = nullptr);
MicrodataTable ingest_csv_file(const std::string& path, const ColumnSchema& schema,
                               IngestReport* report = nullptr);

// Write the table back out under the same schema.  Numbers use shortest
// round-trip formatting, so ingest(write(table)) reproduces the table
// bit for bit.
void write_csv(std::ostream& out, const MicrodataTable& table,
               const ColumnSchema& schema);
void write_csv_file(const std::string& path, const MicrodataTable& table,
                    const ColumnSchema& schema);

// Partition into (unexposed, exposed) subtables; an empty side is a
// degenerate-arm estimation error.
std::pair<MicrodataTable, MicrodataTable> split_by_exposure(const MicrodataTable& table);

// Distinct covariate rows ("profiles") with their frequency weights, ordered
// lexicographically for determinism.  A table without covariates yields one
// profile carrying the total weight.
struct CovariateProfile {
    std::vector<double> values;
    double weight = 0.0;
};
std::vector<CovariateProfile> distinct_profiles(const MicrodataTable& table,
                                                const std::vector<double>& weights);

// Assign each row its profile index in the list returned by distinct_profiles.
std::vector<std::uint32_t> profile_assignment(const MicrodataTable& table,
                                              const std::vector<CovariateProfile>& profiles);

} // namespace qmed
