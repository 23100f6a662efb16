#ifndef PATHOED_ERRORS_HPP
#define PATHOED_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pathoed {

// Malformed input text (edge lists, parameter files, tables). Carries the
// 1-based line number when one is known.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, long line = -1)
        : std::runtime_error(line >= 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
          line_(line) {}
    long line() const noexcept { return line_; }

private:
    long line_;
};

// Structurally invalid mesh (out-of-range endpoints, self-loops, empty grid).
class InvalidMeshError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Policy parameters violating their contract (range, degenerate groups,
// simplex constraint).
class InvalidParamsError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Contract violations on call arguments (length mismatch, bad config).
class ContractError : public std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A trajectory reached a vertex with no admissible successor.
class SamplingError : public std::runtime_error {
public:
    SamplingError(const std::string& msg, int vertex, int step)
        : std::runtime_error(msg), vertex_(vertex), step_(step) {}
    int vertex() const noexcept { return vertex_; }
    int step() const noexcept { return step_; }

private:
    int vertex_;
    int step_;
};

// Enumeration would exceed the configured cap.
class SupportTooLargeError : public std::runtime_error {
public:
    SupportTooLargeError(const std::string& msg, double count_estimate)
        : std::runtime_error(msg), count_estimate_(count_estimate) {}
    double count_estimate() const noexcept { return count_estimate_; }

private:
    double count_estimate_;
};

// Utility returned NaN/Inf; carries the offending path as 0-based indices.
class EvaluationError : public std::runtime_error {
public:
    EvaluationError(const std::string& msg, std::vector<int> path)
        : std::runtime_error(msg), path_(std::move(path)) {}
    const std::vector<int>& path() const noexcept { return path_; }

private:
    std::vector<int> path_;
};

// Optimal-baseline denominator vanished; callers fall back to b = 0.
class BaselineUndefinedError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Factorization or eigensolver failure.
class NumericalError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Gradient requested for a path outside the distribution support.
class UndefinedGradientError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace pathoed

#endif
