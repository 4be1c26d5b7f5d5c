#pragma once

#include <stdexcept>
#include <string>

namespace loctime {

// Error taxonomy. `validation` failures are caller mistakes (bad inputs,
// bad files); `numerical` failures mean the run itself went wrong (audit
// violation, unresolved regime). The CLI maps these to exit codes 1 and 2.
enum class ErrorKind {
    invalid_parameter,
    insufficient_data,
    centering,
    arbitrage_violation,
    unsupported_measure,
    degenerate_measure,
    truncated_profile,
    cap_required,
    tangent_mismatch,
    audit_failure,
    superhedge_violation,
    invalid_cost,
    invalid_start,
    unresolved_regime,
    io,
};

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    bool is_numerical() const noexcept {
        return kind_ == ErrorKind::audit_failure ||
               kind_ == ErrorKind::superhedge_violation ||
               kind_ == ErrorKind::unresolved_regime;
    }

  private:
    ErrorKind kind_;
};

inline const char* to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::invalid_parameter: return "invalid-parameter";
        case ErrorKind::insufficient_data: return "insufficient-data";
        case ErrorKind::centering: return "centering";
        case ErrorKind::arbitrage_violation: return "arbitrage-violation";
        case ErrorKind::unsupported_measure: return "unsupported-measure";
        case ErrorKind::degenerate_measure: return "degenerate-measure";
        case ErrorKind::truncated_profile: return "truncated-profile";
        case ErrorKind::cap_required: return "cap-required";
        case ErrorKind::tangent_mismatch: return "tangent-mismatch";
        case ErrorKind::audit_failure: return "audit-failure";
        case ErrorKind::superhedge_violation: return "superhedge-violation";
        case ErrorKind::invalid_cost: return "invalid-cost";
        case ErrorKind::invalid_start: return "invalid-start";
        case ErrorKind::unresolved_regime: return "unresolved-regime";
        case ErrorKind::io: return "io";
    }
    return "unknown";
}

}  // namespace loctime
