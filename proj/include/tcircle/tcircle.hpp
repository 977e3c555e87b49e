#pragma once

#include "tcircle/error.hpp"
#include "tcircle/roots.hpp"
#include "tcircle/circle.hpp"
#include "tcircle/covering_map.hpp"
#include "tcircle/dyadic.hpp"
#include "tcircle/thompson.hpp"
#include "tcircle/periodic.hpp"
#include "tcircle/lambda.hpp"
#include "tcircle/distortion.hpp"
#include "tcircle/report.hpp"
#include "tcircle/verify.hpp"
