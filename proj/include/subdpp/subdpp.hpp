// Copyright 2026 The subdpp Authors.
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

#ifndef SUBDPP_SUBDPP_HPP_
#define SUBDPP_SUBDPP_HPP_

#include "subdpp/errors.hpp"
#include "subdpp/evaluation.hpp"
#include "subdpp/fourier.hpp"
#include "subdpp/ground_set.hpp"
#include "subdpp/io.hpp"
#include "subdpp/kernel_family.hpp"
#include "subdpp/likelihood.hpp"
#include "subdpp/optimizer.hpp"
#include "subdpp/rng.hpp"
#include "subdpp/sampling.hpp"
#include "subdpp/summarizer.hpp"

#endif  // SUBDPP_SUBDPP_HPP_
