#pragma once

#include <stdexcept>
#include <string>

namespace oqk {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define OQK_ERROR(Name)                          \
    struct Name : Error {                        \
        explicit Name(const std::string& what)   \
            : Error(#Name ": " + what) {}        \
    }

OQK_ERROR(ParseError);
OQK_ERROR(InversionOfZero);
OQK_ERROR(ExpOfNonpositiveValuation);
OQK_ERROR(DivergentSeries);
OQK_ERROR(NotWeaklyBounding);
OQK_ERROR(NotHigherOrderDeformation);
OQK_ERROR(ConstraintViolation);
OQK_ERROR(InvalidStructure);
OQK_ERROR(UnstableType);
OQK_ERROR(NotEssential);
OQK_ERROR(UnmatchedFakeStratum);
OQK_ERROR(TailNotForgettable);
OQK_ERROR(RootOnBoundary);
OQK_ERROR(HypothesesFailed);
OQK_ERROR(InvalidFan);

#undef OQK_ERROR

}
