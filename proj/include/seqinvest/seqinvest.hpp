#pragma once

#include "seqinvest/equilibrium.hpp"
#include "seqinvest/errors.hpp"
#include "seqinvest/optima.hpp"
#include "seqinvest/profile.hpp"
#include "seqinvest/reward_rule.hpp"
#include "seqinvest/rule_spec.hpp"
#include "seqinvest/simulate.hpp"
#include "seqinvest/success_rate.hpp"
