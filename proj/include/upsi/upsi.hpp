#pragma once

#include "upsi/error.hpp"
#include "upsi/types.hpp"
#include "upsi/prob.hpp"
#include "upsi/covering.hpp"
#include "upsi/qstar.hpp"
#include "upsi/portfolio.hpp"
#include "upsi/montecarlo.hpp"
#include "upsi/empirical.hpp"
#include "upsi/regret.hpp"
#include "upsi/data.hpp"
#include "upsi/io.hpp"
