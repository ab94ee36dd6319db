#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace stc {

template <typename Real>
using BasicComplexMatrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

using ComplexMatrix = BasicComplexMatrix<double>;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Integer coordinate vector of a lattice point over its basis.
using IntVector = std::vector<std::int64_t>;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller violated a documented precondition.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// An enumeration or code construction would exceed its configured size cap.
class BudgetExceeded : public Error {
public:
    using Error::Error;
};

inline constexpr std::size_t kDefaultEnumerationBudget = 10'000'000;
inline constexpr std::size_t kDefaultCodeSizeCap = 100'000;

/// Signed lexicographic order on coordinate vectors.
inline bool lex_less(std::span<const std::int64_t> a, std::span<const std::int64_t> b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// Parses "lo:hi:step" into an inclusive grid; a bare number yields a single value.
std::vector<double> parse_grid(const std::string& spec);

/// Ordinary least squares y ≈ intercept + slope·x.
struct LinearFit {
    double intercept = 0.0;
    double slope = 0.0;
    double slope_stderr = 0.0;
};

LinearFit fit_line(std::span<const double> x, std::span<const double> y);

} // namespace stc
