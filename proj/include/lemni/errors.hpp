#pragma once

#include <stdexcept>
#include <string>

namespace lemni {

/// Base class for failures of a numerical method (as opposed to misuse of
/// the API, which throws std::invalid_argument).
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// |p(z)| (or |p'(z)|) fell below the pole floor where a quotient is needed.
class pole_error : public numerical_error {
public:
    explicit pole_error(const std::string& msg) : numerical_error(msg) {}
};

/// Iterative root finding did not reach the requested residual.
class nonconvergence_error : public numerical_error {
public:
    explicit nonconvergence_error(const std::string& msg) : numerical_error(msg) {}
};

/// Seed search never bracketed the level |p| = 1 inside the search radius.
class bracket_error : public numerical_error {
public:
    explicit bracket_error(const std::string& msg) : numerical_error(msg) {}
};

/// Step controller hit the minimum step without the corrector converging.
class step_collapse_error : public numerical_error {
public:
    explicit step_collapse_error(const std::string& msg) : numerical_error(msg) {}
};

/// A traced curve failed to close within the step budget.
class non_closure_error : public numerical_error {
public:
    explicit non_closure_error(const std::string& msg) : numerical_error(msg) {}
};

/// Sturm chain degenerated (leading coefficients vanished); caller resamples.
class degenerate_line_error : public numerical_error {
public:
    explicit degenerate_line_error(const std::string& msg) : numerical_error(msg) {}
};

/// Sign-change counts kept disagreeing under sweep refinement.
class instability_error : public numerical_error {
public:
    explicit instability_error(const std::string& msg) : numerical_error(msg) {}
};

/// Lower bound on |grad u| could not be certified (gradient vanishes).
class r_verification_error : public numerical_error {
public:
    explicit r_verification_error(const std::string& msg) : numerical_error(msg) {}
};

/// Work budget ran out before the error target; carries the best value found.
class budget_exhausted_error : public numerical_error {
public:
    budget_exhausted_error(const std::string& msg, double value, double error_estimate)
        : numerical_error(msg), best_value(value), best_error(error_estimate) {}
    double best_value = 0.0;
    double best_error = 0.0;
};

} // namespace lemni
