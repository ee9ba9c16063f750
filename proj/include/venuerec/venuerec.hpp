#pragma once

#include "venuerec/corpus.hpp"
#include "venuerec/csv.hpp"
#include "venuerec/evaluation.hpp"
#include "venuerec/factorization.hpp"
#include "venuerec/neighborhood.hpp"
#include "venuerec/rating.hpp"
#include "venuerec/similarity.hpp"
#include "venuerec/synth.hpp"
