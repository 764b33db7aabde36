#pragma once

#include "causal_bandits/arm.hpp"
#include "causal_bandits/causal_ucb.hpp"
#include "causal_bandits/cumulative_budgeted.hpp"
#include "causal_bandits/env_json.hpp"
#include "causal_bandits/environment.hpp"
#include "causal_bandits/error.hpp"
#include "causal_bandits/experiment.hpp"
#include "causal_bandits/general_env.hpp"
#include "causal_bandits/metrics.hpp"
#include "causal_bandits/no_backdoor_env.hpp"
#include "causal_bandits/policy.hpp"
#include "causal_bandits/policy_run.hpp"
#include "causal_bandits/rng.hpp"
#include "causal_bandits/simple_regret.hpp"
