#pragma once

// Append-only line-delimited JSON log with durable appends. A torn final
// line left by a crash mid-write is dropped (and truncated away) on open.

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <filesystem>
#include <mutex>
#include <string>
#include <vector>

#include "rsbench/corpus.hpp"
#include "rsbench/error.hpp"

namespace rsbench {

class AppendLog {
 public:
  /// Opens (creating if needed) the log at `path` and returns its records.
  explicit AppendLog(std::filesystem::path path) : path_(std::move(path)) {
    std::string content;
    if (std::filesystem::exists(path_)) content = detail::read_file(path_.string());
    std::size_t keep = content.size();
    if (!content.empty() && content.back() != '\n') {
      // Torn tail: keep it only if it is a complete record.
      std::size_t start = content.rfind('\n');
      start = start == std::string::npos ? 0 : start + 1;
      std::string tail = content.substr(start);
      bool complete = Json::accept(tail);
      if (complete) {
        content += '\n';
        repair_ = "\n";
      } else {
        keep = start;
        content.resize(start);
      }
    }
    detail::for_each_jsonl(content, path_.string(), [&](const Json& obj, const detail::LineContext&) {
      records_.push_back(obj);
    });
    fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0) throw DataError(path_.string() + ": cannot open log: " + std::strerror(errno));
    if (keep < std::filesystem::file_size(path_) && ::ftruncate(fd_, static_cast<off_t>(keep)) != 0)
      throw DataError(path_.string() + ": cannot truncate torn record");
    if (!repair_.empty()) write_all(repair_);
  }

  AppendLog(const AppendLog&) = delete;
  AppendLog& operator=(const AppendLog&) = delete;

  ~AppendLog() {
    if (fd_ >= 0) ::close(fd_);
  }

  /// Records present when the log was opened, in file order.
  const std::vector<Json>& replayed() const { return records_; }

  /// Appends one record and returns after it is on stable storage.
  void append(const Json& record) {
    std::lock_guard lock(mu_);
    write_all(record.dump() + "\n");
    if (::fsync(fd_) != 0) throw DataError(path_.string() + ": fsync failed");
  }

  const std::filesystem::path& path() const { return path_; }

 private:
  void write_all(const std::string& s) {
    std::size_t off = 0;
    while (off < s.size()) {
      ssize_t n = ::write(fd_, s.data() + off, s.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw DataError(path_.string() + ": write failed: " + std::strerror(errno));
      }
      off += static_cast<std::size_t>(n);
    }
  }

  std::filesystem::path path_;
  std::vector<Json> records_;
  std::string repair_;
  int fd_ = -1;
  std::mutex mu_;
};

}  // namespace rsbench
