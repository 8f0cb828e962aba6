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

// Runs the default pipeline on one note and prints the extracted rows.

#include <iostream>

#include "clintext/clintext.hpp"

int main() {
  const clintext::Pipeline pipeline(
      clintext::load_config(CLINTEXT_DATA_DIR "/default_config.json"));
  const auto doc = pipeline.process(
      "Past Medical History: diabetes.\n"
      "HPI: denies chest pain but reports cough.\n");
  for (const auto& row : clintext::to_rows(doc, "demo")) {
    std::cout << clintext::to_csv_line(row);
  }
  return 0;
}
