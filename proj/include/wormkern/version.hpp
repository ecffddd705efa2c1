#pragma once

#define WORMKERN_VERSION "0.1.0"

namespace wormkern {
inline const char* version() { return WORMKERN_VERSION; }
}
