#pragma once

#include "cmilab/circuits.hpp"
#include "cmilab/distributions.hpp"
#include "cmilab/entswap.hpp"
#include "cmilab/errors.hpp"
#include "cmilab/hamiltonians.hpp"
#include "cmilab/markov.hpp"
#include "cmilab/parallel.hpp"
#include "cmilab/rng.hpp"
#include "cmilab/state.hpp"
#include "cmilab/tensornet.hpp"
#include "cmilab/vmc.hpp"
