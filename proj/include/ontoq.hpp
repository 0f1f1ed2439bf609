#pragma once

#include "ontoq/automaton.hpp"
#include "ontoq/census.hpp"
#include "ontoq/map_io.hpp"
#include "ontoq/oscillators.hpp"
#include "ontoq/permutation.hpp"
#include "ontoq/prequantize.hpp"
#include "ontoq/spectral.hpp"
