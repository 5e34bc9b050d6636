#pragma once

/** @file heatchain.hpp
 *  @brief Umbrella header.
 */

#include "certificate.hpp"
#include "chain.hpp"
#include "conductivity.hpp"
#include "config.hpp"
#include "csv.hpp"
#include "graphs.hpp"
#include "langevin.hpp"
#include "oracle.hpp"
#include "ou.hpp"
#include "polymer.hpp"
#include "selfconsistent.hpp"
#include "ssd.hpp"
