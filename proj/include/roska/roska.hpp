#pragma once

// Reward-policy co-evolution for language-instructed skill acquisition on
// desk-scale control tasks: a reward DSL, vectorized environments, PPO,
// GP-based short-cut Bayesian optimization of the parameter fusion ratio,
// and the co-evolution orchestrator with its baseline modes.

#include "roska/common/errors.hpp"
#include "roska/common/rng.hpp"
#include "roska/dsl/ast.hpp"
#include "roska/dsl/eval.hpp"
#include "roska/dsl/mutate.hpp"
#include "roska/dsl/parse.hpp"
#include "roska/dsl/print.hpp"
#include "roska/env/env.hpp"
#include "roska/policy/checkpoint.hpp"
#include "roska/policy/net.hpp"
#include "roska/ppo/grad_check.hpp"
#include "roska/ppo/ppo.hpp"
#include "roska/bo/sc_bo.hpp"
#include "roska/llm/backend.hpp"
#include "roska/llm/prompt.hpp"
#include "roska/coevo/coevolution.hpp"
#include "roska/metrics/metrics.hpp"
#include "roska/metrics/report.hpp"
#include "roska/runstore/run_store.hpp"
#include "roska/config.hpp"
