#ifndef PLATOONLAB_VERSION_HPP
#define PLATOONLAB_VERSION_HPP

namespace platoon {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace platoon

#endif
