#pragma once

// Helpers for the line-oriented text model formats. Doubles are written with
// 17 significant digits so a save/load round trip is exact.

#include <iomanip>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ejcorr/errors.hpp"

namespace ejcorr::textio {

inline void write_values(std::ostream& os, std::span<const double> v) {
    os << std::setprecision(17);
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << v[i];
    os << '\n';
}

inline void expect(std::istream& is, const std::string& token) {
    std::string got;
    if (!(is >> got) || got != token)
        throw DataError("model file: expected '" + token + "', found '" + got + "'");
}

template <class T>
T read(std::istream& is, const char* what) {
    T v{};
    if (!(is >> v)) throw DataError(std::string("model file: cannot read ") + what);
    return v;
}

inline std::vector<double> read_values(std::istream& is, std::size_t n, const char* what) {
    std::vector<double> v(n);
    for (auto& x : v) x = read<double>(is, what);
    return v;
}

}  // namespace ejcorr::textio
