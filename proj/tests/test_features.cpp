#include <doctest.h>
TEST_SUITE("features") {}
