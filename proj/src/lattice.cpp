#include "stc/lattice.hpp"

#include <charconv>

namespace stc {

template class BasicMatrixLattice<double>;

namespace {

double parse_number(std::string_view text, const std::string& whole) {
    std::string s(text);
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw PreconditionError("malformed grid '" + whole + "'");
    }
    if (used != s.size()) throw PreconditionError("malformed grid '" + whole + "'");
    return v;
}

} // namespace

std::vector<double> parse_grid(const std::string& spec) {
    std::vector<std::string_view> parts;
    std::string_view rest(spec);
    while (true) {
        const auto pos = rest.find(':');
        parts.push_back(rest.substr(0, pos));
        if (pos == std::string_view::npos) break;
        rest.remove_prefix(pos + 1);
    }
    if (parts.size() == 1) return {parse_number(parts[0], spec)};
    if (parts.size() != 3) throw PreconditionError("grid must be 'lo:hi:step', got '" + spec + "'");
    const double lo = parse_number(parts[0], spec);
    const double hi = parse_number(parts[1], spec);
    const double step = parse_number(parts[2], spec);
    if (!(step > 0) || hi < lo) throw PreconditionError("grid '" + spec + "' needs lo <= hi and step > 0");
    std::vector<double> grid;
    // Index-based stepping keeps long grids free of accumulated drift.
    for (std::size_t i = 0;; ++i) {
        const double v = lo + double(i) * step;
        if (v > hi + 1e-9 * std::max(1.0, std::abs(hi))) break;
        grid.push_back(v);
    }
    return grid;
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw PreconditionError("fit_line needs two equally long series (n >= 2)");
    const double n = double(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0)) throw PreconditionError("fit_line: abscissae are all equal");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (x.size() > 2) {
        double ssr = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double e = y[i] - (fit.intercept + fit.slope * x[i]);
            ssr += e * e;
        }
        fit.slope_stderr = std::sqrt(ssr / (n - 2) / sxx);
    }
    return fit;
}

} // namespace stc
