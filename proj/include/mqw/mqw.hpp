#pragma once

#include "mqw/error.hpp"
#include "mqw/core.hpp"
#include "mqw/walk.hpp"
#include "mqw/spectral.hpp"
#include "mqw/ncg.hpp"
#include "mqw/reference.hpp"
#include "mqw/io.hpp"
