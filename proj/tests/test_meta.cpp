#include "doctest.h"

TEST_SUITE("meta") {}
