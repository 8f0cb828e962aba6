// Copyright 2026 The clintext Authors.
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

#ifndef CLINTEXT_CLINTEXT_HPP
#define CLINTEXT_CLINTEXT_HPP

#include "clintext/context.hpp"
#include "clintext/document.hpp"
#include "clintext/errors.hpp"
#include "clintext/matcher.hpp"
#include "clintext/normalizer.hpp"
#include "clintext/pipeline.hpp"
#include "clintext/sectionizer.hpp"
#include "clintext/sentencizer.hpp"
#include "clintext/tabular.hpp"
#include "clintext/tokenizer.hpp"
#include "clintext/visualizer.hpp"

#endif  // CLINTEXT_CLINTEXT_HPP
