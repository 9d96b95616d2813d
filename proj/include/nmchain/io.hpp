// io.hpp: locale-independent text serialization. Doubles are written with 17
// significant digits, complex numbers as [re, im], matrices as row-major
// nested arrays of such pairs.

#pragma once

#include "nmchain/matcore.hpp"

#include <string>
#include <string_view>

namespace nmchain {

/// "%.17g" without locale; non-finite values become "nan", "inf", "-inf".
std::string format_double(double v);

/// As format_double, but non-finite values become null.
std::string json_number(double v);

std::string json_string(std::string_view s);

std::string complex_json(Complex z);

std::string matrix_json(const ComplexMatrix& m);

/// Inverse of matrix_json; throws std::invalid_argument on malformed input.
ComplexMatrix matrix_from_json(std::string_view text);

/// Parse "p00,p11,re01,im01" into a validated one-qubit state.
DensityMatrix parse_qubit_state(std::string_view spec, const std::string& label);

}  // namespace nmchain
