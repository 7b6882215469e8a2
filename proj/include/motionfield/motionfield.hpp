#pragma once

// Everything except the HTTP service (motionfield/service.hpp), which pulls
// in cpp-httplib.

#include "motionfield/compose.hpp"
#include "motionfield/densify.hpp"
#include "motionfield/error.hpp"
#include "motionfield/flow_color.hpp"
#include "motionfield/grid.hpp"
#include "motionfield/hints.hpp"
#include "motionfield/io/flo.hpp"
#include "motionfield/io/gif.hpp"
#include "motionfield/io/hints_json.hpp"
#include "motionfield/io/png.hpp"
#include "motionfield/io/project_json.hpp"
#include "motionfield/pipeline.hpp"
#include "motionfield/scheduler.hpp"
#include "motionfield/spline.hpp"
#include "motionfield/warp.hpp"
