// src/fst/forward-backward.h

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

#ifndef SEQDISTILL_FST_FORWARD_BACKWARD_H_
#define SEQDISTILL_FST_FORWARD_BACKWARD_H_

#include <cstddef>

#include "autodiff/tensor.h"
#include "fst/wfst.h"

namespace seqdistill {

struct ForwardBackwardResult {
  double log_z = 0.0;
  // [T x m] posterior of each pdf per frame; rows sum to one.
  Tensor occupancies;
};

// Sums over all accepting paths of exactly T arcs, where T = loglikes.Rows()
// and arc ilabel k scores loglikes(t, k - 1). Throws EmptyCompositionError
// when no such path exists and std::invalid_argument when the graph has an
// epsilon or out-of-range input label.
ForwardBackwardResult ForwardBackward(const Wfst& graph, const Tensor& loglikes);

// Same quantity as ForwardBackward().log_z by explicit path enumeration.
// Throws std::runtime_error when more than `max_paths` paths exist.
double BruteForceLogZ(const Wfst& graph, const Tensor& loglikes, size_t max_paths = 1000000);

// Checks loglikes against graph labels; shared by the decoders.
void CheckGraphAndLoglikes(const Wfst& graph, const Tensor& loglikes);

}  // namespace seqdistill

#endif  // SEQDISTILL_FST_FORWARD_BACKWARD_H_
