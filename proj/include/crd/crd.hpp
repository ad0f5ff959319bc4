#ifndef CRD_CRD_HPP
#define CRD_CRD_HPP

#include "crd/crd_game.hpp"
#include "crd/evo_dynamics.hpp"
#include "crd/markov_engine.hpp"
#include "crd/simulators.hpp"
#include "crd/sweep.hpp"
#include "crd/validation.hpp"
#include "crd/version.hpp"

#endif  // CRD_CRD_HPP
