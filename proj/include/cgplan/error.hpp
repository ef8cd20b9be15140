#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cgplan {

// Error taxonomy shared by all modules; the CLI maps codes to exit statuses.
enum class ErrorCode {
    invalid_geometry,
    unsupported_geometry,
    degenerate_hull,
    no_contact,
    invalid_mass,
    graph_integrity,
    action_precondition,
    schema,
    node_set_mismatch,
    inconsistent_goal,
    goal_infeasible,
    layer_infeasible,
    plan_not_found,
};

class CgError : public std::runtime_error {
public:
    CgError(ErrorCode code, const std::string& msg)
        : std::runtime_error(msg), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

// Carries diagnostic payloads (residual losses, violation strings, search traces).
class InfeasibleError : public CgError {
public:
    InfeasibleError(ErrorCode code, const std::string& msg,
                    std::vector<std::string> details = {})
        : CgError(code, msg), details_(std::move(details)) {}
    const std::vector<std::string>& details() const { return details_; }

private:
    std::vector<std::string> details_;
};

}  // namespace cgplan
