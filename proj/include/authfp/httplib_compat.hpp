#pragma once

// httplib pulls in <resolv.h>, whose historic `_res` macro breaks any
// later-included header using _res as an identifier (Eigen does, in its
// product kernels). Include httplib through this wrapper instead.
#include <httplib.h>

#ifdef _res
#undef _res
#endif
