#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace sgamp {

/// %.17g; "nan" for NaN, empty for a missing value.
std::string format_number(std::optional<double> v);

/// Quantile with linear interpolation between closest ranks (numpy "linear").
/// Sorts a copy; NaNs must be removed by the caller.
double quantile(std::span<const double> values, double q);

struct SummaryStats {
    std::size_t count = 0;  // finite samples
    std::size_t failed = 0; // NaN samples excluded
    double mean = 0.0;
    double median = 0.0;
    double p10 = 0.0;
    double p90 = 0.0;
};

SummaryStats summarize(std::span<const double> values);

/// "# key: value" lines preceding every CSV body.
struct CsvHeader {
    std::vector<std::pair<std::string, std::string>> entries;

    void add(std::string key, std::string value) { entries.emplace_back(std::move(key), std::move(value)); }
    void write(std::ostream& os) const;
};

std::string hex64(std::uint64_t v);

} // namespace sgamp
