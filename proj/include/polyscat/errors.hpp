#pragma once

#include <stdexcept>
#include <string>

namespace polyscat {

/// Base of all library errors. The category drives CLI exit codes.
class Error : public std::runtime_error {
public:
    enum class Category { validation, parameter, domain, solver, routing, generation, fit, io };

    Error(Category category, const std::string &what) : std::runtime_error(what), category_(category) {}
    Category category() const noexcept { return category_; }

private:
    Category category_;
};

#define POLYSCAT_DEFINE_ERROR(Name, Cat)                                               \
    class Name : public Error {                                                        \
    public:                                                                            \
        explicit Name(const std::string &what) : Error(Category::Cat, what) {}         \
    };

POLYSCAT_DEFINE_ERROR(ValidationError, validation)
POLYSCAT_DEFINE_ERROR(ParameterError, parameter)
POLYSCAT_DEFINE_ERROR(DomainError, domain)
POLYSCAT_DEFINE_ERROR(SolverError, solver)
POLYSCAT_DEFINE_ERROR(RoutingError, routing)
POLYSCAT_DEFINE_ERROR(GenerationError, generation)
POLYSCAT_DEFINE_ERROR(FitError, fit)
POLYSCAT_DEFINE_ERROR(IoError, io)

#undef POLYSCAT_DEFINE_ERROR

}  // namespace polyscat
