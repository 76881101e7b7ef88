#include "shadowlab/shadowing.hpp"

namespace shadowlab {

std::string to_string(ShadowVerdict v) {
  switch (v) {
    case ShadowVerdict::Shadowed: return "shadowed";
    case ShadowVerdict::NotShadowedInFamily: return "not-shadowed-in-family";
    case ShadowVerdict::Refuted: return "refuted";
  }
  return "?";
}

}  // namespace shadowlab
