#pragma once

#include "qclt/error.hpp"
#include "qclt/linalg.hpp"
#include "qclt/chain.hpp"
#include "qclt/chain_io.hpp"
#include "qclt/spectral.hpp"
#include "qclt/martingale.hpp"
#include "qclt/random.hpp"
#include "qclt/parallel.hpp"
#include "qclt/ks.hpp"
#include "qclt/simulate.hpp"
#include "qclt/group_walk.hpp"
#include "qclt/torus.hpp"
#include "qclt/inequalities.hpp"
