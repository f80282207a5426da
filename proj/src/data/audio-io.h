// src/data/audio-io.h

// Copyright 2026  The seqdistill Authors

// See ../../COPYING for clarification regarding multiple authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef SEQDISTILL_DATA_AUDIO_IO_H_
#define SEQDISTILL_DATA_AUDIO_IO_H_

#include <span>
#include <string>
#include <vector>

#include "data/toy-task.h"

namespace seqdistill {

// 16-bit PCM mono RIFF/WAVE. Samples are clipped to [-1, 1] and scaled by
// 32767 on write; reading divides by 32768.
void WriteWav(const std::string& path, std::span<const float> samples, int sample_rate);
std::vector<float> ReadWav(const std::string& path, int* sample_rate);

struct ManifestEntry {
  std::string id;
  std::string wav_path;                 // relative to the manifest directory
  std::vector<std::string> transcript;  // empty for "-"
};

// Lines "id<TAB>wav-path<TAB>transcript-or-'-'".
void WriteManifest(const std::string& path, const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> ReadManifest(const std::string& path);

// Directory layout: lexicon.txt, corpus.txt, task.txt (sample rate),
// {labeled,unlabeled,test}.tsv manifests and wav/<id>.wav. Audio goes
// through 16-bit quantization, so a loaded task differs from the generated
// one by at most half a quantization step per sample.
void SaveToyTask(const ToyTask& task, const std::string& dir);
ToyTask LoadToyTask(const std::string& dir);

}  // namespace seqdistill

#endif  // SEQDISTILL_DATA_AUDIO_IO_H_
