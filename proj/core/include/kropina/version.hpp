#ifndef KROPINA_VERSION_HPP_
#define KROPINA_VERSION_HPP_

#include <string>

namespace kropina {

std::string engine_version();

}  // namespace kropina

#endif  // KROPINA_VERSION_HPP_
