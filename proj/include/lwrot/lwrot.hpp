#pragma once

#include "lwrot/classify.hpp"
#include "lwrot/core.hpp"
#include "lwrot/error.hpp"
#include "lwrot/export.hpp"
#include "lwrot/integrate.hpp"
#include "lwrot/intersect.hpp"
#include "lwrot/mesh.hpp"
#include "lwrot/params.hpp"
#include "lwrot/phase.hpp"
#include "lwrot/report.hpp"
