#pragma once

#include <stdexcept>
#include <string>

namespace ybl {

struct DimensionTooSmall : std::runtime_error {
    explicit DimensionTooSmall(const std::string& msg) : std::runtime_error(msg) {}
};

struct DomainEmpty : std::runtime_error {
    explicit DomainEmpty(const std::string& msg) : std::runtime_error(msg) {}
};

struct IndexOutOfRange : std::out_of_range {
    explicit IndexOutOfRange(const std::string& msg) : std::out_of_range(msg) {}
};

struct Divergent : std::runtime_error {
    explicit Divergent(const std::string& msg) : std::runtime_error(msg) {}
};

struct NoRealCriticalPoint : std::runtime_error {
    explicit NoRealCriticalPoint(const std::string& msg) : std::runtime_error(msg) {}
};

struct UnsupportedDegree : std::runtime_error {
    explicit UnsupportedDegree(const std::string& msg) : std::runtime_error(msg) {}
};

struct UnknownKind : std::runtime_error {
    explicit UnknownKind(const std::string& msg) : std::runtime_error(msg) {}
};

struct BadDensity : std::runtime_error {
    explicit BadDensity(const std::string& msg) : std::runtime_error(msg) {}
};

struct ToleranceNotMet : std::runtime_error {
    explicit ToleranceNotMet(const std::string& msg) : std::runtime_error(msg) {}
};

struct OracleBudgetExceeded : std::runtime_error {
    explicit OracleBudgetExceeded(const std::string& msg) : std::runtime_error(msg) {}
};

struct SingularMetric : std::runtime_error {
    explicit SingularMetric(const std::string& msg) : std::runtime_error(msg) {}
};

struct OutsideOmega : std::runtime_error {
    explicit OutsideOmega(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace ybl
