#pragma once

#include "skewfatou/disks/disks.hpp"
#include "skewfatou/dynamics/parse.hpp"
#include "skewfatou/koenigs/koenigs.hpp"
#include "skewfatou/render/render.hpp"
#include "skewfatou/resonance/resonance.hpp"
