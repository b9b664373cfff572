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
#ifndef SHUFFLEAUDIT_SCORE_BUFFER_HPP_
#define SHUFFLEAUDIT_SCORE_BUFFER_HPP_

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "shuffleaudit/estimator.hpp"

namespace shuffleaudit {

// Disk-backed score store for audits too large for RAM. Appended blocks are
// cut into sorted runs on the way out; sorted_stream() k-way merges the
// runs. Run files live in their own temp directory and are removed with the
// sink.
class SpillScoreSink {
 public:
  // spill_dir may be empty (system temp). run_length is in doubles.
  explicit SpillScoreSink(std::string spill_dir = {},
                          std::int64_t run_length = std::int64_t{1} << 23);
  ~SpillScoreSink();

  SpillScoreSink(const SpillScoreSink&) = delete;
  SpillScoreSink& operator=(const SpillScoreSink&) = delete;

  void append(std::span<const double> block);
  void finalize();  // flush the partial run; no appends afterwards
  std::int64_t size() const { return count_; }

  // Merged non-decreasing stream over all runs; sink must be finalized.
  // May be called repeatedly (each call re-opens the runs).
  std::unique_ptr<SortedScoreStream> sorted_stream() const;

 private:
  void flush_run();

  std::filesystem::path dir_;
  std::int64_t run_length_;
  std::int64_t count_ = 0;
  std::vector<std::filesystem::path> runs_;
  std::vector<double> pending_;
  bool finalized_ = false;
};

}  // namespace shuffleaudit

#endif  // SHUFFLEAUDIT_SCORE_BUFFER_HPP_
