#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace fnm::csv {

// shortest round-trip decimal form
std::string num(double x);
std::string num(const std::optional<double>& x);  // empty field when absent

void write_row(std::ostream& os, const std::vector<std::string>& fields);

}  // namespace fnm::csv
