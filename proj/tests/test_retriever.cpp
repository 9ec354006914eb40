#include "doctest.h"

TEST_SUITE("retriever") {}
