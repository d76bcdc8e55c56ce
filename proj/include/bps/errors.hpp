#pragma once

#include <stdexcept>
#include <string>

namespace bps {

/// Base class for all domain errors. Every error carries a stable
/// machine-readable code (used verbatim by the CLI error envelope)
/// in addition to the human-readable message.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

#define BPS_DEFINE_ERROR(Name)                                   \
    struct Name : Error {                                        \
        explicit Name(const std::string& w) : Error(#Name, w) {} \
    }

// cpoly
BPS_DEFINE_ERROR(NonConvergence);
BPS_DEFINE_ERROR(DivByNonUnit);
BPS_DEFINE_ERROR(OrderTooLow);
BPS_DEFINE_ERROR(CompositionConstantTerm);

// hyperelliptic
BPS_DEFINE_ERROR(InvalidCurve);
BPS_DEFINE_ERROR(PointNotOnCurve);
BPS_DEFINE_ERROR(WeierstrassChart);
BPS_DEFINE_ERROR(InfinityChart);
BPS_DEFINE_ERROR(ZeroDifferential);
BPS_DEFINE_ERROR(ZeroForm);
BPS_DEFINE_ERROR(UnsupportedSupport);
BPS_DEFINE_ERROR(InvalidDivisor);
BPS_DEFINE_ERROR(UnstableExpansion);
BPS_DEFINE_ERROR(DegreeBound);

// beltrami
BPS_DEFINE_ERROR(InvalidChart);
BPS_DEFINE_ERROR(InvalidProfile);
BPS_DEFINE_ERROR(InvalidMove);
BPS_DEFINE_ERROR(NonInjectiveIsotopy);
BPS_DEFINE_ERROR(BranchPointSingularity);
BPS_DEFINE_ERROR(GridTooCoarse);

// sl2
BPS_DEFINE_ERROR(ZeroTheta);
BPS_DEFINE_ERROR(InvalidPath);
BPS_DEFINE_ERROR(StepFailure);
BPS_DEFINE_ERROR(SheetMismatch);

// critical
BPS_DEFINE_ERROR(InvalidConfig);
BPS_DEFINE_ERROR(DegenerateConfig);
BPS_DEFINE_ERROR(UnexpectedKernelDim);

// io / cli
BPS_DEFINE_ERROR(ParseError);

#undef BPS_DEFINE_ERROR

} // namespace bps
