#include "nmchain/io.hpp"

#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <json.hpp>
#include <stdexcept>
#include <vector>

namespace nmchain {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    // fmt is locale-independent unless 'L' is requested.
    return fmt::format("{:.17g}", v);
}

std::string json_number(double v) {
    return std::isfinite(v) ? format_double(v) : "null";
}

std::string json_string(std::string_view s) {
    return nlohmann::json(std::string(s)).dump();
}

std::string complex_json(Complex z) {
    return "[" + json_number(z.real()) + "," + json_number(z.imag()) + "]";
}

std::string matrix_json(const ComplexMatrix& m) {
    std::string s = "[";
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        if (r) s += ',';
        s += '[';
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c) s += ',';
            s += complex_json(m(r, c));
        }
        s += ']';
    }
    s += ']';
    return s;
}

ComplexMatrix matrix_from_json(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(fmt::format("matrix: malformed JSON ({})", e.what()));
    }
    if (!doc.is_array() || doc.empty()) throw std::invalid_argument("matrix: expected a nonempty list of rows");
    const auto rows = static_cast<Eigen::Index>(doc.size());
    const auto cols = static_cast<Eigen::Index>(doc[0].is_array() ? doc[0].size() : 0);
    ComplexMatrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = doc[r];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw std::invalid_argument(fmt::format("matrix: row {} has the wrong length", r));
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            const auto& z = row[c];
            if (!z.is_array() || z.size() != 2 || !z[0].is_number() || !z[1].is_number()) {
                throw std::invalid_argument(fmt::format("matrix: entry ({}, {}) is not a [re, im] pair", r, c));
            }
            m(r, c) = Complex(z[0].get<double>(), z[1].get<double>());
        }
    }
    return m;
}

DensityMatrix parse_qubit_state(std::string_view spec, const std::string& label) {
    std::vector<double> v;
    std::size_t pos = 0;
    while (pos <= spec.size()) {
        const std::size_t comma = std::min(spec.find(',', pos), spec.size());
        std::string_view field = spec.substr(pos, comma - pos);
        while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
        while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
        double x = 0.0;
        const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), x);
        if (field.empty() || ec != std::errc{} || end != field.data() + field.size() || !std::isfinite(x)) {
            throw std::invalid_argument(
                fmt::format("state '{}': field {} ('{}') is not a finite number", spec, v.size() + 1, field));
        }
        v.push_back(x);
        pos = comma + 1;
    }
    if (v.size() != 4) {
        throw std::invalid_argument(fmt::format("state '{}': expected 4 fields p00,p11,re01,im01, got {}", spec, v.size()));
    }
    ComplexMatrix m(2, 2);
    m << v[0], Complex(v[2], v[3]),
         Complex(v[2], -v[3]), v[1];
    try {
        return DensityMatrix(std::move(m), {label});
    } catch (const std::exception& e) {
        throw std::invalid_argument(fmt::format("state '{}' is not a density matrix: {}", spec, e.what()));
    }
}

}  // namespace nmchain
