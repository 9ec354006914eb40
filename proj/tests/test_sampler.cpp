#include "doctest.h"

TEST_SUITE("sampler") {}
