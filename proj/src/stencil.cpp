#include "st24/stencil.hpp"

namespace st24 {

const char* to_string(Shape s) { return s == Shape::Box ? "box" : "star"; }

Shape parse_shape(const std::string& s) {
  if (s == "box" || s == "Box") return Shape::Box;
  if (s == "star" || s == "Star") return Shape::Star;
  throw Error("unknown stencil shape '" + s + "' (expected box|star)");
}

}  // namespace st24
