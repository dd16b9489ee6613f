#pragma once

#include "qite/types.hpp"
#include "qite/state.hpp"
#include "qite/pauli.hpp"
#include "qite/simulator.hpp"
#include "qite/ansatz.hpp"
#include "qite/mclachlan.hpp"
#include "qite/spectra.hpp"
#include "qite/cmf.hpp"
#include "qite/qite_engine.hpp"
#include "qite/ham_io.hpp"
#include "qite/scan.hpp"
