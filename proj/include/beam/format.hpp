#pragma once

#include <string>

namespace beam {

/// Shortest "%.17g" rendering; all CSV/JSON numbers go through here so that
/// identical runs produce byte-identical files.
std::string format_real(double x);

}  // namespace beam
