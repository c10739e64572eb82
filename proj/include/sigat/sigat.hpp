#ifndef SIGAT_SIGAT_HPP
#define SIGAT_SIGAT_HPP

#include "sigat/adam.hpp"
#include "sigat/autograd.hpp"
#include "sigat/common.hpp"
#include "sigat/eval.hpp"
#include "sigat/grad_check.hpp"
#include "sigat/graph.hpp"
#include "sigat/logreg.hpp"
#include "sigat/metrics.hpp"
#include "sigat/model.hpp"
#include "sigat/motif.hpp"
#include "sigat/tensor.hpp"

#endif  // SIGAT_SIGAT_HPP
