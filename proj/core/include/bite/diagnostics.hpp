#pragma once

#include <functional>
#include <string_view>

namespace bite {

using WarningHandler = std::function<void(std::string_view)>;

/// Installs a process-wide warning sink and returns the previous one.
/// The default handler writes "warning: ..." lines to stderr.
WarningHandler set_warning_handler(WarningHandler handler);

void warn(std::string_view message);

/// Captures warnings for the lifetime of the object, restoring the previous handler afterwards.
class ScopedWarningCapture {
 public:
  explicit ScopedWarningCapture(std::function<void(std::string_view)> sink);
  ~ScopedWarningCapture();
  ScopedWarningCapture(const ScopedWarningCapture&) = delete;
  ScopedWarningCapture& operator=(const ScopedWarningCapture&) = delete;

 private:
  WarningHandler previous_;
};

}  // namespace bite
