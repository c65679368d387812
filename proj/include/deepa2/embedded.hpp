#pragma once

#include <string_view>

namespace deepa2::embedded {

// Contents of a file from data/, compiled into the library. Empty when unknown.
std::string_view lookup(std::string_view name);

}  // namespace deepa2::embedded
