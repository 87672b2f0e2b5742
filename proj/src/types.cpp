#include "rppg/types.hpp"

#include "rppg/error.hpp"

namespace rppg {

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kGreen: return "green";
    case Method::kIca: return "ica";
    case Method::kChrom: return "chrom";
    case Method::kPos: return "pos";
    case Method::kPbv: return "pbv";
    case Method::kLgi: return "lgi";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (Method m : kAllMethods) {
    if (to_string(m) == name) return m;
  }
  fail(ErrorCode::kConfigInvalid, "unknown method '" + std::string(name) + "'");
}

}  // namespace rppg
