//
// Copyright 2026 The shuffle-audit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
#include "shuffleaudit/score_buffer.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <random>
#include <stdexcept>

namespace shuffleaudit {

namespace {

std::filesystem::path make_spill_dir(const std::string& requested) {
  std::filesystem::path base = requested.empty()
                                   ? std::filesystem::temp_directory_path()
                                   : std::filesystem::path(requested);
  std::random_device rd;
  for (int attempt = 0; attempt < 64; ++attempt) {
    std::filesystem::path dir =
        base / ("shuffleaudit-spill-" + std::to_string(rd()));
    std::error_code ec;
    if (std::filesystem::create_directories(dir, ec)) return dir;
  }
  throw std::runtime_error("could not create spill directory under " +
                           base.string());
}

class BufferedRunReader {
 public:
  explicit BufferedRunReader(const std::filesystem::path& path)
      : in_(path, std::ios::binary) {
    if (!in_) throw std::runtime_error("cannot open spill run " + path.string());
  }

  bool next(double& value) {
    if (pos_ == filled_) {
      in_.read(reinterpret_cast<char*>(buf_.data()),
               static_cast<std::streamsize>(buf_.size() * sizeof(double)));
      filled_ = static_cast<std::size_t>(in_.gcount()) / sizeof(double);
      pos_ = 0;
      if (filled_ == 0) return false;
    }
    value = buf_[pos_++];
    return true;
  }

 private:
  std::ifstream in_;
  std::vector<double> buf_ = std::vector<double>(1 << 15);
  std::size_t pos_ = 0;
  std::size_t filled_ = 0;
};

class MergedRunStream final : public SortedScoreStream {
 public:
  explicit MergedRunStream(const std::vector<std::filesystem::path>& runs) {
    readers_.reserve(runs.size());
    for (const auto& run : runs) {
      readers_.push_back(std::make_unique<BufferedRunReader>(run));
      double v;
      if (readers_.back()->next(v)) {
        heap_.push({v, readers_.size() - 1});
      }
    }
  }

  bool next(double& value) override {
    if (heap_.empty()) return false;
    auto [v, idx] = heap_.top();
    heap_.pop();
    value = v;
    double refill;
    if (readers_[idx]->next(refill)) heap_.push({refill, idx});
    return true;
  }

 private:
  struct Entry {
    double value;
    std::size_t reader;
    bool operator>(const Entry& other) const {
      if (value != other.value) return value > other.value;
      return reader > other.reader;
    }
  };
  std::vector<std::unique_ptr<BufferedRunReader>> readers_;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap_;
};

}  // namespace

SpillScoreSink::SpillScoreSink(std::string spill_dir, std::int64_t run_length)
    : dir_(make_spill_dir(spill_dir)), run_length_(run_length) {
  if (run_length_ < 1024) run_length_ = 1024;
  pending_.reserve(static_cast<std::size_t>(run_length_));
}

SpillScoreSink::~SpillScoreSink() {
  std::error_code ec;
  std::filesystem::remove_all(dir_, ec);
}

void SpillScoreSink::append(std::span<const double> block) {
  if (finalized_) throw std::logic_error("append after finalize");
  for (double v : block) {
    pending_.push_back(v);
    if (static_cast<std::int64_t>(pending_.size()) == run_length_) flush_run();
  }
  count_ += static_cast<std::int64_t>(block.size());
}

void SpillScoreSink::flush_run() {
  if (pending_.empty()) return;
  std::sort(pending_.begin(), pending_.end());
  std::filesystem::path run =
      dir_ / ("run-" + std::to_string(runs_.size()) + ".f64");
  std::ofstream out(run, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot create spill run " + run.string());
  out.write(reinterpret_cast<const char*>(pending_.data()),
            static_cast<std::streamsize>(pending_.size() * sizeof(double)));
  if (!out) throw std::runtime_error("short write to spill run " + run.string());
  runs_.push_back(run);
  pending_.clear();
}

void SpillScoreSink::finalize() {
  if (finalized_) return;
  flush_run();
  pending_.shrink_to_fit();
  finalized_ = true;
}

std::unique_ptr<SortedScoreStream> SpillScoreSink::sorted_stream() const {
  if (!finalized_) throw std::logic_error("sorted_stream before finalize");
  return std::make_unique<MergedRunStream>(runs_);
}

}  // namespace shuffleaudit
