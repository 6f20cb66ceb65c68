#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sbt/error.hpp"
#include "sbt/format.hpp"

namespace sbt {

enum class Side { red, blue };
enum class Units { displacement, photocurrent };

constexpr std::string_view to_string(Side s) { return s == Side::red ? "red" : "blue"; }
constexpr std::string_view to_string(Units u) {
    return u == Units::displacement ? "displacement" : "photocurrent";
}

inline Side side_from_string(std::string_view s) {
    if (s == "red") return Side::red;
    if (s == "blue") return Side::blue;
    throw ParseError("unknown sideband '" + std::string(s) + "'");
}

inline Units units_from_string(std::string_view s) {
    if (s == "displacement") return Units::displacement;
    if (s == "photocurrent") return Units::photocurrent;
    throw ParseError("unknown units '" + std::string(s) + "'");
}

// Uniform grid of |omega|/2pi values.
struct FrequencyGrid {
    double start_hz = 0.0;
    double step_hz = 1.0;
    std::size_t count = 0;

    static FrequencyGrid from_range(double min_hz, double max_hz, double step_hz) {
        if (!(step_hz > 0.0)) throw ValidationError("grid_step_hz", "must be > 0");
        if (!(max_hz > min_hz)) throw ValidationError("grid_max_hz", "must exceed grid_min_hz");
        const auto n = static_cast<std::size_t>(std::floor((max_hz - min_hz) / step_hz + 1e-9)) + 1;
        return {min_hz, step_hz, n};
    }

    double operator[](std::size_t i) const { return start_hz + static_cast<double>(i) * step_hz; }

    std::vector<double> values() const {
        std::vector<double> v(count);
        for (std::size_t i = 0; i < count; ++i) v[i] = (*this)[i];
        return v;
    }
};

struct SidebandSpectrum {
    Side side = Side::red;
    std::vector<double> freqs_hz;
    std::vector<double> psd;
    int n_avg = 1;
    Units units = Units::displacement;
    std::map<std::string, std::string> metadata;  // extra header entries (seed, ...)

    std::size_t size() const { return freqs_hz.size(); }

    double step_hz() const {
        return freqs_hz.size() < 2 ? 0.0 : (freqs_hz.back() - freqs_hz.front()) / static_cast<double>(freqs_hz.size() - 1);
    }

    void validate() const {
        if (freqs_hz.size() != psd.size()) throw ValidationError("psd", "length differs from frequency grid");
        if (freqs_hz.size() < 2) throw ValidationError("freqs", "need at least two bins");
        if (n_avg < 1) throw ValidationError("n_avg", "must be >= 1");
        const double step = step_hz();
        if (!(step > 0.0)) throw ValidationError("freqs", "must be strictly increasing");
        for (std::size_t i = 1; i < freqs_hz.size(); ++i) {
            const double d = freqs_hz[i] - freqs_hz[i - 1];
            if (!(d > 0.0) || std::abs(d - step) > 1e-6 * step)
                throw ValidationError("freqs", "grid must be strictly increasing and uniform");
        }
        for (double v : psd)
            if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("psd", "values must be finite and >= 0");
    }
};

inline void write_csv(std::ostream& os, const SidebandSpectrum& s) {
    os << "# side: " << to_string(s.side) << '\n';
    os << "# units: " << to_string(s.units) << '\n';
    os << "# n_avg: " << s.n_avg << '\n';
    for (const auto& [k, v] : s.metadata) os << "# " << k << ": " << v << '\n';
    os << "freq_hz,psd\n";
    for (std::size_t i = 0; i < s.size(); ++i)
        os << format_double(s.freqs_hz[i]) << ',' << format_double(s.psd[i]) << '\n';
}

inline SidebandSpectrum read_csv(std::istream& is) {
    SidebandSpectrum s;
    bool have_side = false;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::string_view v = trim(line);
        if (v.empty()) continue;
        if (v.front() == '#') {
            v.remove_prefix(1);
            const auto colon = v.find(':');
            if (colon == std::string_view::npos) continue;
            const std::string key(trim(v.substr(0, colon)));
            const std::string val(trim(v.substr(colon + 1)));
            if (key == "side") {
                s.side = side_from_string(val);
                have_side = true;
            } else if (key == "units") {
                s.units = units_from_string(val);
            } else if (key == "n_avg") {
                s.n_avg = static_cast<int>(parse_integer(val, "n_avg"));
            } else {
                s.metadata[key] = val;
            }
            continue;
        }
        if (v == "freq_hz,psd") continue;
        const auto comma = v.find(',');
        if (comma == std::string_view::npos)
            throw ParseError("spectrum line " + std::to_string(lineno) + ": expected 'freq_hz,psd'");
        s.freqs_hz.push_back(parse_double(v.substr(0, comma), "freq_hz"));
        s.psd.push_back(parse_double(v.substr(comma + 1), "psd"));
    }
    if (!have_side) throw ParseError("spectrum is missing the '# side:' header");
    s.validate();
    return s;
}

inline void write_csv_file(const std::string& path, const SidebandSpectrum& s) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open '" + path + "' for writing");
    write_csv(os, s);
}

inline SidebandSpectrum read_csv_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ParseError("cannot open '" + path + "'");
    return read_csv(is);
}

}  // namespace sbt
