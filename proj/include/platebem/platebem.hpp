#ifndef PLATEBEM_PLATEBEM_HPP
#define PLATEBEM_PLATEBEM_HPP

#include "platebem/assembly.hpp"
#include "platebem/geometry.hpp"
#include "platebem/kernels.hpp"
#include "platebem/manufactured.hpp"
#include "platebem/quadrature.hpp"
#include "platebem/solver_errors.hpp"
#include "platebem/study.hpp"
#include "platebem/trace_spaces.hpp"

#endif
