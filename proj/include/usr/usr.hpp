#pragma once

#include "boxplot.hpp"
#include "dataset.hpp"
#include "error.hpp"
#include "evaluate.hpp"
#include "experiment.hpp"
#include "expression.hpp"
#include "gp/config.hpp"
#include "gp/creator.hpp"
#include "gp/engine.hpp"
#include "gp/fitness.hpp"
#include "gp/selection.hpp"
#include "gp/variation.hpp"
#include "infix.hpp"
#include "network.hpp"
#include "random.hpp"
#include "relevance.hpp"
#include "report.hpp"
