#include "doctest.h"

TEST_SUITE("baselines") {}
