#include <doctest.h>
TEST_SUITE("adaptive") {}
