#pragma once

#include "heurevo/bundled.hpp"
#include "heurevo/collapse.hpp"
#include "heurevo/config.hpp"
#include "heurevo/engine.hpp"
#include "heurevo/error.hpp"
#include "heurevo/evaluation.hpp"
#include "heurevo/grpo.hpp"
#include "heurevo/heuristic.hpp"
#include "heurevo/http_backend.hpp"
#include "heurevo/journal.hpp"
#include "heurevo/llm_backend.hpp"
#include "heurevo/operators.hpp"
#include "heurevo/pool.hpp"
#include "heurevo/problems.hpp"
#include "heurevo/prompts.hpp"
#include "heurevo/response_parser.hpp"
#include "heurevo/reward.hpp"
#include "heurevo/rng.hpp"
#include "heurevo/stub_evaluator.hpp"
#include "heurevo/subprocess_evaluator.hpp"
#include "heurevo/worker_protocol.hpp"
