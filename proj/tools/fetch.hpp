#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

namespace orgnet::tools {

/// Downloads `url` to `dest` (through a temporary file, renamed on success).
/// Supports every scheme libcurl was built with, including file://.
/// Throws IoError on transfer or HTTP failure.
void download(const std::string& url, const std::filesystem::path& dest);

/// Fetches the four gzip IDX files of MNIST from `base_url` into `dir` and
/// checks that each one parses. Files that already parse are kept unless
/// `force` is set. Returns the number of files downloaded.
int fetch_mnist(const std::string& base_url, const std::filesystem::path& dir, bool force,
                std::ostream& log);

}  // namespace orgnet::tools
