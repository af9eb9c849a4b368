#pragma once

#include "gridpod/common.hpp"
#include "gridpod/spec.hpp"
#include "gridpod/network.hpp"
#include "gridpod/pod.hpp"
#include "gridpod/sg.hpp"
#include "gridpod/gfor.hpp"
#include "gridpod/assembly.hpp"
#include "gridpod/simulate.hpp"
#include "gridpod/linearize.hpp"
#include "gridpod/modal.hpp"
#include "gridpod/design.hpp"
#include "gridpod/scenarios.hpp"
#include "gridpod/io.hpp"
