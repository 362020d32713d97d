/*
 Copyright 2026 The gjump Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#pragma once

// Built-in model registry. Every model is one-dimensional in state, noise and
// action; parameters are passed as a name -> value map and unknown names are
// rejected.

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "gjump/controls.hpp"
#include "gjump/jumps.hpp"
#include "gjump/model.hpp"

namespace gjump {

using ModelParams = std::map<std::string, double>;

struct ModelInfo {
  std::string name;
  std::string description;
  ModelParams defaults;
};

const std::vector<ModelInfo>& list_models();

/// Defaults merged with `params`; throws InvalidArgument for an unknown model
/// or an unknown parameter name.
ModelSpec make_model(const std::string& name, const ModelParams& params = {});

/// Fills in defaults and rejects unknown keys.
ModelParams resolve_params(const std::string& name, const ModelParams& params);

/// Closed-form mean, second moment and cost of the linear_jump_lq model under
/// a deterministic control, from the linear moment ODE for (1, E x, E x^2, running cost)
/// integrated exactly with matrix exponentials. For relaxed controls u_mean and
/// u_sq are the per-step first and second moments of mu; a strict control has
/// u_sq = u_mean^2. `cov` holds the scenario's a_k per step.
struct LqReference {
  double cost = 0.0;
  double mean = 0.0;
  double second_moment = 0.0;
};

LqReference linear_jump_lq_reference(const ModelParams& params, const MarkSpace& marks,
                                     const TimeGrid& grid, const std::vector<double>& cov,
                                     const std::vector<double>& u_mean,
                                     const std::vector<double>& u_sq, double x0);

LqReference linear_jump_lq_reference(const ModelParams& params, const MarkSpace& marks,
                                     const TimeGrid& grid, const std::vector<double>& cov,
                                     const RelaxedControl& mu, double x0);

}  // namespace gjump
