#pragma once

#include "hstream/runtime/device.hpp"
#include "hstream/runtime/execute.hpp"
#include "hstream/runtime/host_arrays.hpp"
#include "hstream/runtime/kernel.hpp"
#include "hstream/runtime/scheduler.hpp"
