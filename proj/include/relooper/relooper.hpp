#pragma once

#include "relooper/agent.hpp"
#include "relooper/harness.hpp"
#include "relooper/llm.hpp"
#include "relooper/oracle.hpp"
#include "relooper/prompt.hpp"
#include "relooper/remote.hpp"
#include "relooper/textworld.hpp"
