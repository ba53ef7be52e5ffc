#include <doctest.h>
TEST_SUITE("predict") {}
