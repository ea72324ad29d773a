#pragma once

#include "parlshift/error.hpp"
#include "parlshift/text.hpp"
#include "parlshift/csv.hpp"
#include "parlshift/io.hpp"
#include "parlshift/corpus.hpp"
#include "parlshift/parser.hpp"
#include "parlshift/resolve.hpp"
#include "parlshift/preprocess.hpp"
#include "parlshift/matrix.hpp"
#include "parlshift/random.hpp"
#include "parlshift/embed.hpp"
#include "parlshift/align.hpp"
#include "parlshift/detect.hpp"
#include "parlshift/eval.hpp"
