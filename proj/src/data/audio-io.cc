// src/data/audio-io.cc

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

#include "data/audio-io.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "base/error.h"

namespace seqdistill {

namespace fs = std::filesystem;

namespace {

void PutU32(std::ostream& os, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

void PutU16(std::ostream& os, uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
  os.write(reinterpret_cast<const char*>(b), 2);
}

uint32_t GetU32(const unsigned char* p) {
  return p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t GetU16(const unsigned char* p) { return static_cast<uint16_t>(p[0] | (p[1] << 8)); }

std::string Slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) SEQDISTILL_THROW(std::runtime_error, "cannot read " << path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

void WriteWav(const std::string& path, std::span<const float> samples, int sample_rate) {
  std::ofstream os(path, std::ios::binary);
  if (!os) SEQDISTILL_THROW(std::runtime_error, "cannot write " << path);
  const uint32_t data_bytes = static_cast<uint32_t>(samples.size() * 2);
  os.write("RIFF", 4);
  PutU32(os, 36 + data_bytes);
  os.write("WAVEfmt ", 8);
  PutU32(os, 16);
  PutU16(os, 1);  // PCM
  PutU16(os, 1);  // mono
  PutU32(os, static_cast<uint32_t>(sample_rate));
  PutU32(os, static_cast<uint32_t>(sample_rate * 2));
  PutU16(os, 2);
  PutU16(os, 16);
  os.write("data", 4);
  PutU32(os, data_bytes);
  for (float x : samples) {
    double v = std::clamp(static_cast<double>(x), -1.0, 1.0) * 32767.0;
    PutU16(os, static_cast<uint16_t>(static_cast<int16_t>(std::lround(v))));
  }
  if (!os) SEQDISTILL_THROW(std::runtime_error, "write failed for " << path);
}

std::vector<float> ReadWav(const std::string& path, int* sample_rate) {
  std::string bytes = Slurp(path);
  auto data = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < 12 || std::memcmp(data, "RIFF", 4) || std::memcmp(data + 8, "WAVE", 4))
    SEQDISTILL_THROW(std::runtime_error, path << ": not a RIFF/WAVE file");
  size_t pos = 12;
  bool have_fmt = false;
  int rate = 0;
  while (pos + 8 <= bytes.size()) {
    uint32_t size = GetU32(data + pos + 4);
    const unsigned char* body = data + pos + 8;
    if (pos + 8 + size > bytes.size()) SEQDISTILL_THROW(std::runtime_error, path << ": truncated chunk");
    if (!std::memcmp(data + pos, "fmt ", 4)) {
      if (size < 16 || GetU16(body) != 1 || GetU16(body + 2) != 1 || GetU16(body + 14) != 16)
        SEQDISTILL_THROW(std::runtime_error, path << ": only 16-bit PCM mono is supported");
      rate = static_cast<int>(GetU32(body + 4));
      have_fmt = true;
    } else if (!std::memcmp(data + pos, "data", 4)) {
      if (!have_fmt) SEQDISTILL_THROW(std::runtime_error, path << ": data before fmt chunk");
      std::vector<float> out(size / 2);
      for (size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<float>(static_cast<int16_t>(GetU16(body + 2 * i)) / 32768.0);
      if (sample_rate) *sample_rate = rate;
      return out;
    }
    pos += 8 + size + (size & 1);
  }
  SEQDISTILL_THROW(std::runtime_error, path << ": no data chunk");
}

void WriteManifest(const std::string& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream os(path);
  if (!os) SEQDISTILL_THROW(std::runtime_error, "cannot write " << path);
  for (const ManifestEntry& e : entries) {
    os << e.id << '\t' << e.wav_path << '\t';
    if (e.transcript.empty()) os << '-';
    for (size_t i = 0; i < e.transcript.size(); ++i) os << (i ? " " : "") << e.transcript[i];
    os << '\n';
  }
}

std::vector<ManifestEntry> ReadManifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) SEQDISTILL_THROW(std::runtime_error, "cannot read " << path);
  std::vector<ManifestEntry> out;
  std::string line;
  for (int n = 1; std::getline(is, line); ++n) {
    if (line.empty()) continue;
    auto t1 = line.find('\t'), t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos)
      SEQDISTILL_THROW(std::runtime_error, path << ":" << n << ": expected three tab-separated fields");
    ManifestEntry e{line.substr(0, t1), line.substr(t1 + 1, t2 - t1 - 1), {}};
    std::string text = line.substr(t2 + 1);
    if (text != "-") {
      std::istringstream ws(text);
      for (std::string w; ws >> w;) e.transcript.push_back(w);
    }
    out.push_back(std::move(e));
  }
  return out;
}

void SaveToyTask(const ToyTask& task, const std::string& dir) {
  fs::create_directories(fs::path(dir) / "wav");
  task.lexicon.WriteFile(dir + "/lexicon.txt");
  {
    std::ofstream os(dir + "/corpus.txt");
    for (const auto& s : task.text_corpus) {
      for (size_t i = 0; i < s.size(); ++i) os << (i ? " " : "") << task.lexicon.WordName(s[i]);
      os << '\n';
    }
    std::ofstream meta(dir + "/task.txt");
    meta << "sample_rate=" << task.sample_rate << '\n';
  }
  auto save_set = [&](const std::vector<Utterance>& set, const char* name) {
    std::vector<ManifestEntry> entries;
    for (const Utterance& u : set) {
      ManifestEntry e{u.id, "wav/" + u.id + ".wav", {}};
      for (int w : u.transcript) e.transcript.push_back(task.lexicon.WordName(w));
      WriteWav(dir + "/" + e.wav_path, u.samples, task.sample_rate);
      entries.push_back(std::move(e));
    }
    WriteManifest(dir + "/" + name + ".tsv", entries);
  };
  save_set(task.labeled, "labeled");
  save_set(task.unlabeled, "unlabeled");
  save_set(task.test, "test");
}

ToyTask LoadToyTask(const std::string& dir) {
  ToyTask task;
  task.lexicon = Lexicon::ReadFile(dir + "/lexicon.txt");
  for (const auto& s : ReadCorpusFile(dir + "/corpus.txt"))
    task.text_corpus.push_back(task.lexicon.WordsToIds(s));
  {
    std::ifstream meta(dir + "/task.txt");
    std::string line;
    if (!std::getline(meta, line) || line.rfind("sample_rate=", 0) != 0)
      SEQDISTILL_THROW(std::runtime_error, dir << "/task.txt: missing sample_rate");
    task.sample_rate = std::stoi(line.substr(12));
  }
  auto load_set = [&](const char* name) {
    std::vector<Utterance> set;
    for (const ManifestEntry& e : ReadManifest(dir + "/" + name + ".tsv")) {
      Utterance u;
      u.id = e.id;
      int rate = 0;
      u.samples = ReadWav(dir + "/" + e.wav_path, &rate);
      if (rate != task.sample_rate)
        SEQDISTILL_THROW(std::runtime_error, e.wav_path << " has rate " << rate << ", task "
                                                        << task.sample_rate);
      u.transcript = task.lexicon.WordsToIds(e.transcript);
      set.push_back(std::move(u));
    }
    return set;
  };
  task.labeled = load_set("labeled");
  task.unlabeled = load_set("unlabeled");
  task.test = load_set("test");
  task.Validate();
  return task;
}

}  // namespace seqdistill
