// Copyright 2026 The qtomo Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#ifndef QTOMO_QTOMO_HPP
#define QTOMO_QTOMO_HPP

#include "qtomo/bayes.hpp"
#include "qtomo/errors.hpp"
#include "qtomo/finite_diff.hpp"
#include "qtomo/hermitian.hpp"
#include "qtomo/io.hpp"
#include "qtomo/laplace.hpp"
#include "qtomo/laplace_check.hpp"
#include "qtomo/likelihood.hpp"
#include "qtomo/maxlike.hpp"
#include "qtomo/oracle_mc.hpp"
#include "qtomo/povm.hpp"
#include "qtomo/quadrature.hpp"
#include "qtomo/random.hpp"

#endif  // QTOMO_QTOMO_HPP
