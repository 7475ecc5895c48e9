#include "facepsy/error.hpp"

#include <sstream>

namespace facepsy {

namespace {

std::string join_violations(const std::vector<std::string>& violations) {
    std::ostringstream out;
    for (std::size_t i = 0; i < violations.size(); ++i) {
        if (i > 0) out << "; ";
        out << violations[i];
    }
    return out.str();
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> violations)
    : std::runtime_error(join_violations(violations)), violations_(std::move(violations)) {}

ParseError::ParseError(const std::string& source, std::size_t line, const std::string& what)
    : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : std::string{}) + ": " + what),
      line_(line) {}

}  // namespace facepsy
