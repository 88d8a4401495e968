#pragma once

#include <string>

#include "ttc/warp.hpp"

namespace ttc {

// The three binary tasks share one backbone; each owns an output head and is
// driven by one kind of warp on the second frame's features.
enum class Task { ttc = 0, flow_u = 1, flow_v = 2 };

inline Task task_for(WarpKind kind) {
  switch (kind) {
    case WarpKind::scale:
      return Task::ttc;
    case WarpKind::shift_h:
      return Task::flow_u;
    case WarpKind::shift_v:
      return Task::flow_v;
  }
  return Task::ttc;
}

inline std::string to_string(Task task) {
  switch (task) {
    case Task::ttc:
      return "ttc";
    case Task::flow_u:
      return "flow_u";
    case Task::flow_v:
      return "flow_v";
  }
  return "unknown";
}

}  // namespace ttc
