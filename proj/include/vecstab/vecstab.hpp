#pragma once

#include "vecstab/analysis.hpp"
#include "vecstab/controller.hpp"
#include "vecstab/error.hpp"
#include "vecstab/linalg.hpp"
#include "vecstab/observer.hpp"
#include "vecstab/plant.hpp"
#include "vecstab/presets.hpp"
#include "vecstab/sim.hpp"
#include "vecstab/so3.hpp"
#include "vecstab/tuning.hpp"
