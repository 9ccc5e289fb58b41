#include "sgamp/csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "sgamp/errors.hpp"
#include "sgamp/summation.hpp"

namespace sgamp {

std::string format_number(std::optional<double> v) {
    if (!v) return {};
    if (std::isnan(*v)) return "nan";
    if (std::isinf(*v)) return *v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", *v);
    return buf;
}

double quantile(std::span<const double> values, double q) {
    if (values.empty()) throw DomainError("quantile: empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw DomainError("quantile: q must lie in [0, 1]");
    std::vector<double> s(values.begin(), values.end());
    std::sort(s.begin(), s.end());
    const double pos = q * static_cast<double>(s.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, s.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return s[lo] + frac * (s[hi] - s[lo]);
}

SummaryStats summarize(std::span<const double> values) {
    SummaryStats st;
    std::vector<double> finite;
    finite.reserve(values.size());
    for (double v : values) {
        if (std::isnan(v))
            ++st.failed;
        else
            finite.push_back(v);
    }
    st.count = finite.size();
    if (finite.empty()) {
        st.mean = st.median = st.p10 = st.p90 = std::nan("");
        return st;
    }
    CompensatedSum sum;
    for (double v : finite) sum.add(v);
    st.mean = sum.value() / static_cast<double>(finite.size());
    st.median = quantile(finite, 0.5);
    st.p10 = quantile(finite, 0.1);
    st.p90 = quantile(finite, 0.9);
    return st;
}

void CsvHeader::write(std::ostream& os) const {
    for (const auto& [k, v] : entries) os << "# " << k << ": " << v << '\n';
}

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

} // namespace sgamp
