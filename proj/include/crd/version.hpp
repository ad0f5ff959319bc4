#ifndef CRD_VERSION_HPP
#define CRD_VERSION_HPP

#include <string_view>

namespace crd {

inline constexpr std::string_view kEngineVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

}  // namespace crd

#endif  // CRD_VERSION_HPP
