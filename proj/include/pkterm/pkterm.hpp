#pragma once

#include "pkterm/categories.hpp"
#include "pkterm/categorizer.hpp"
#include "pkterm/common.hpp"
#include "pkterm/corpus_io.hpp"
#include "pkterm/document.hpp"
#include "pkterm/evaluation.hpp"
#include "pkterm/features.hpp"
#include "pkterm/hash.hpp"
#include "pkterm/kterm.hpp"
#include "pkterm/memory.hpp"
#include "pkterm/model.hpp"
#include "pkterm/novelty.hpp"
#include "pkterm/pipeline.hpp"
#include "pkterm/svm.hpp"
#include "pkterm/synth.hpp"
#include "pkterm/text_analysis.hpp"
#include "pkterm/training.hpp"
