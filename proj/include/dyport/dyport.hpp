#pragma once

#include "dyport/attribution.hpp"
#include "dyport/baselines.hpp"
#include "dyport/common.hpp"
#include "dyport/config.hpp"
#include "dyport/dyngraph.hpp"
#include "dyport/evaluation.hpp"
#include "dyport/gcn.hpp"
#include "dyport/ingest.hpp"
#include "dyport/measures.hpp"
#include "dyport/pipeline.hpp"
