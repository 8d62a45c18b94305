#pragma once

#include "relaycap/capacity.hpp"
#include "relaycap/channel.hpp"
#include "relaycap/codec.hpp"
#include "relaycap/gaussian.hpp"
#include "relaycap/info.hpp"
#include "relaycap/io.hpp"
#include "relaycap/pmf.hpp"
