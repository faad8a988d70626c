// Copyright 2026 The qrnme Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// On-disk formats.
//
// Datasets and checkpoints are JSON documents with a versioned header.
// Doubles are written in shortest round-trip form, so reading a file back
// reproduces every value bitwise. Every state is stored as 2 d^2 reals: real
// parts row-major, then imaginary parts row-major.

#include <filesystem>
#include <string>
#include <vector>

#include "qrnme/experiments.hpp"

namespace qrnme::io {

inline constexpr int kSchemaVersion = 1;

std::string dataset_to_string(const experiments::Dataset& ds);
// Throws SchemaError on malformed or inconsistent content.
experiments::Dataset dataset_from_string(const std::string& text);

void write_dataset(const std::filesystem::path& path, const experiments::Dataset& ds);
experiments::Dataset read_dataset(const std::filesystem::path& path);

struct Checkpoint {
  experiments::ExperimentConfig config;
  experiments::TrainingState state;
};

std::string checkpoint_to_string(const Checkpoint& ckpt);
Checkpoint checkpoint_from_string(const std::string& text);

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

// "time,metric,n" table, one row per time step.
std::string metrics_to_csv(const experiments::MetricsCurve& curve);

// "epoch mean_loss" per line, epochs numbered from 1.
std::string loss_log(const std::vector<double>& epoch_losses);

// Writes to a sibling temporary file and renames it over `path`.
void atomic_write(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

}  // namespace qrnme::io
