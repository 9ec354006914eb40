#include "doctest.h"

TEST_SUITE("influence") {}
