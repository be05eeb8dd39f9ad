#pragma once

#include <stdexcept>

namespace finetype {

// File-system problems: missing paths, unreadable or unwritable files.
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input content: corpus lines, config fields, checkpoint documents.
struct format_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace finetype
